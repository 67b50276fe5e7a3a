//! Concatenated heralded beam splitters.
//!
//! A sequence is written `(k1,n1),(k2,n2),...`: `k` photons are injected into
//! the auxiliary port of each splitter and `n` are detected at its output.
//! Composing the per-element conditional maps gives a single diagonal map on
//! `(α, β, γ)`; an NS gate is a composed map proportional to `diag(1, 1, -1)`.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::fock::{BeamSplitter, ModeState, Oracle};

/// Tolerance on the NS residual norm below which a map counts as a gate.
pub const NS_TOLERANCE: f64 = 1e-6;

/// One heralded splitter: `k` injected, `n` detected.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ElementSpec {
    pub k: u32,
    pub n: u32,
}

impl ElementSpec {
    pub const fn new(k: u32, n: u32) -> Self {
        Self { k, n }
    }

    /// Photons added to the signal beam.
    pub fn shift(&self) -> i64 {
        self.k as i64 - self.n as i64
    }

    pub fn preserves_photons(&self) -> bool {
        self.k == self.n
    }
}

impl fmt::Display for ElementSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{})", self.k, self.n)
    }
}

/// Ordered list of elements.
///
/// Offsets are not validated on construction because correction pairs are
/// meaningful only after an element that has already added a photon; use
/// [`SequenceSpec::offsets`] to check a chain that starts from the bare beam.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct SequenceSpec {
    pub elements: Vec<ElementSpec>,
}

impl SequenceSpec {
    pub fn new(elements: Vec<ElementSpec>) -> Self {
        Self { elements }
    }

    pub fn from_pairs(pairs: &[(u32, u32)]) -> Self {
        Self::new(pairs.iter().map(|&(k, n)| ElementSpec::new(k, n)).collect())
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn net_offset(&self) -> i64 {
        self.elements.iter().map(ElementSpec::shift).sum()
    }

    /// Input offset of every element followed by the final offset, starting
    /// from the bare beam. Fails if the running offset ever goes negative.
    pub fn offsets(&self) -> Result<Vec<u32>> {
        let mut out = Vec::with_capacity(self.len() + 1);
        let mut off: i64 = 0;
        out.push(0);
        for e in &self.elements {
            let next = off + e.shift();
            if next < 0 {
                return Err(Error::LossyBranch {
                    input_offset: off as u32,
                    k: e.k,
                    n: e.n,
                });
            }
            off = next;
            out.push(off as u32);
        }
        Ok(out)
    }

    pub fn is_offset_valid(&self) -> bool {
        self.offsets().is_ok()
    }

    pub fn concat(&self, other: &SequenceSpec) -> SequenceSpec {
        let mut elements = self.elements.clone();
        elements.extend_from_slice(&other.elements);
        SequenceSpec { elements }
    }

    /// Canonical representative for sequences made only of photon-preserving
    /// elements, whose maps commute: elements sorted by decreasing `k`.
    /// Other sequences are returned unchanged.
    pub fn canonical(&self) -> SequenceSpec {
        if !self.elements.iter().all(ElementSpec::preserves_photons) {
            return self.clone();
        }
        let mut elements = self.elements.clone();
        elements.sort_by(|a, b| b.cmp(a));
        SequenceSpec { elements }
    }
}

impl fmt::Display for SequenceSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, e) in self.elements.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            write!(f, "{e}")?;
        }
        Ok(())
    }
}

struct Cursor<'a> {
    chars: Vec<(usize, char)>,
    pos: usize,
    src: &'a str,
}

impl<'a> Cursor<'a> {
    fn new(src: &'a str) -> Self {
        Self {
            chars: src.char_indices().collect(),
            pos: 0,
            src,
        }
    }

    fn skip_ws(&mut self) {
        while self.pos < self.chars.len() && self.chars[self.pos].1.is_whitespace() {
            self.pos += 1;
        }
    }

    fn offset(&self) -> usize {
        self.chars.get(self.pos).map_or(self.src.len(), |c| c.0)
    }

    fn peek(&mut self) -> Option<char> {
        self.skip_ws();
        self.chars.get(self.pos).map(|c| c.1)
    }

    fn error(&self, message: impl Into<String>) -> Error {
        Error::Parse {
            offset: self.offset(),
            message: message.into(),
        }
    }

    fn expect(&mut self, want: char) -> Result<()> {
        match self.peek() {
            Some(c) if c == want => {
                self.pos += 1;
                Ok(())
            }
            Some(c) => Err(self.error(format!("expected '{want}', found '{c}'"))),
            None => Err(self.error(format!("expected '{want}', found end of input"))),
        }
    }

    fn number(&mut self) -> Result<u32> {
        self.peek();
        let start = self.pos;
        while self.pos < self.chars.len() && self.chars[self.pos].1.is_ascii_digit() {
            self.pos += 1;
        }
        if start == self.pos {
            return Err(match self.chars.get(self.pos) {
                Some((_, c)) => self.error(format!("expected a photon count, found '{c}'")),
                None => self.error("expected a photon count, found end of input"),
            });
        }
        let digits: String = self.chars[start..self.pos].iter().map(|c| c.1).collect();
        digits.parse().map_err(|_| {
            let offset = self.chars[start].0;
            Error::Parse {
                offset,
                message: format!("photon count '{digits}' is too large"),
            }
        })
    }
}

impl FromStr for SequenceSpec {
    type Err = Error;

    /// Parses `"(k,n),(k,n),..."`; whitespace is ignored and the list may be
    /// wrapped in square brackets. Error offsets are byte offsets into `s`.
    fn from_str(s: &str) -> Result<Self> {
        let mut cur = Cursor::new(s);
        let bracketed = cur.peek() == Some('[');
        if bracketed {
            cur.pos += 1;
        }
        let mut elements = Vec::new();
        loop {
            cur.expect('(')?;
            let k = cur.number()?;
            cur.expect(',')?;
            let n = cur.number()?;
            cur.expect(')')?;
            elements.push(ElementSpec::new(k, n));
            match cur.peek() {
                Some(',') => cur.pos += 1,
                Some(']') if bracketed => {
                    cur.pos += 1;
                    bracketed_done(&mut cur)?;
                    break;
                }
                None if !bracketed => break,
                None => return Err(cur.error("expected ']', found end of input")),
                Some(c) => {
                    return Err(cur.error(format!("expected ',' or end of sequence, found '{c}'")))
                }
            }
        }
        Ok(SequenceSpec { elements })
    }
}

fn bracketed_done(cur: &mut Cursor<'_>) -> Result<()> {
    match cur.peek() {
        None => Ok(()),
        Some(c) => Err(cur.error(format!("unexpected '{c}' after ']'"))),
    }
}

impl Serialize for SequenceSpec {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for SequenceSpec {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Product of the element maps along a sequence.
#[derive(Debug, Clone, PartialEq)]
pub struct ComposedMap {
    pub factors: [f64; 3],
    pub net_offset: i64,
    pub amplitudes: Vec<f64>,
}

impl ComposedMap {
    pub fn is_gate(&self) -> bool {
        self.net_offset == 0
    }
}

/// Composes the conditional maps of `seq` at the given signed transmission
/// amplitudes, threading the photon offset from element to element.
pub fn compose_with(oracle: &Oracle, seq: &SequenceSpec, amps: &[f64]) -> Result<ComposedMap> {
    if amps.len() != seq.len() {
        return Err(Error::LengthMismatch {
            expected: seq.len(),
            got: amps.len(),
        });
    }
    let mut maps = Vec::with_capacity(seq.len());
    let mut off: u32 = 0;
    for (e, &t) in seq.elements.iter().zip(amps) {
        let map = oracle.conditional_map(off, e.k, e.n, &BeamSplitter::new(t)?)?;
        off = map.output_offset;
        maps.push((*e, t, map.factors));
    }
    // diagonal maps commute; a fixed multiplication order makes permuted
    // sequences agree to the last bit
    if seq.elements.iter().all(ElementSpec::preserves_photons) {
        maps.sort_by(|a, b| a.0.cmp(&b.0).then(a.1.total_cmp(&b.1)));
    }
    let mut factors = [1.0; 3];
    for (_, _, g) in &maps {
        for (f, g) in factors.iter_mut().zip(g) {
            *f *= g;
        }
    }
    Ok(ComposedMap {
        factors,
        net_offset: off as i64,
        amplitudes: amps.to_vec(),
    })
}

pub fn compose(seq: &SequenceSpec, amps: &[f64]) -> Result<ComposedMap> {
    compose_with(&Oracle::default(), seq, amps)
}

/// `(F1/F0 - 1, F2/F0 + 1)`; both vanish exactly on an NS gate.
pub fn ns_residuals(map: &ComposedMap) -> Result<[f64; 2]> {
    if map.net_offset != 0 {
        return Err(Error::NotAGate {
            net_offset: map.net_offset,
        });
    }
    let [f0, f1, f2] = map.factors;
    if f0 == 0.0 {
        return Err(Error::Degenerate);
    }
    Ok([f1 / f0 - 1.0, f2 / f0 + 1.0])
}

/// Heralding probability of an NS gate, `F0²`. Refuses maps that are not NS
/// gates, for which the probability would depend on the input state.
pub fn success_probability(map: &ComposedMap) -> Result<f64> {
    let [r1, r2] = ns_residuals(map)?;
    let norm = r1.hypot(r2);
    if !(norm <= NS_TOLERANCE) {
        return Err(Error::NotNsSolution {
            norm,
            tol: NS_TOLERANCE,
        });
    }
    Ok(map.factors[0] * map.factors[0])
}

/// Probability that the heralding pattern of `map` occurs for `state`.
pub fn branch_probability(map: &ComposedMap, state: &ModeState) -> Result<f64> {
    let norm_sq = state.norm_sq();
    if (norm_sq - 1.0).abs() > 1e-9 {
        return Err(Error::Unnormalized { norm_sq });
    }
    Ok(map
        .factors
        .iter()
        .zip(state.coeffs)
        .map(|(f, c)| f * f * c * c)
        .sum())
}
