//! Exact two-mode beam-splitter arithmetic on Fock states.
//!
//! Convention: a beam splitter with signed transmission amplitude `t` and
//! reflection magnitude `r = sqrt(1 - t²)` maps creation operators as
//!
//! ```text
//! a† -> t·a† + i·r·b†
//! b† -> i·r·a† + t·b†
//! ```
//!
//! Every matrix element is then a real number times a power of `i`, and the
//! power has a fixed parity for a given element. This module is the ground
//! truth that the closed forms and the sequence solver are checked against.

use std::collections::BTreeMap;

use nalgebra::Complex;

use crate::error::{Error, Result};

/// Largest two-mode photon total the oracle will evaluate.
pub const DEFAULT_PHOTON_CAP: u32 = 12;

/// A lossless beam splitter parametrised by its signed transmission amplitude.
///
/// The transmitivity `eta = t²` is stored alongside `t` so that even powers of
/// `t` and `r` can be evaluated from `eta` directly, without a round trip
/// through a square root.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BeamSplitter {
    t: f64,
    r: f64,
    eta: f64,
}

impl BeamSplitter {
    pub fn new(t: f64) -> Result<Self> {
        if !(-1.0..=1.0).contains(&t) {
            return Err(Error::AmplitudeDomain { t });
        }
        let eta = t * t;
        Ok(Self {
            t,
            r: (1.0 - eta).max(0.0).sqrt(),
            eta,
        })
    }

    /// Splitter with `t = +sqrt(eta)`.
    pub fn from_eta(eta: f64) -> Result<Self> {
        Self::from_eta_signed(eta, false)
    }

    /// Splitter with `t = ±sqrt(eta)`, negative when `negative` is set.
    pub fn from_eta_signed(eta: f64, negative: bool) -> Result<Self> {
        if !(0.0..=1.0).contains(&eta) {
            return Err(Error::EtaDomain { eta });
        }
        let t = if negative { -eta.sqrt() } else { eta.sqrt() };
        Ok(Self {
            t,
            r: (1.0 - eta).sqrt(),
            eta,
        })
    }

    pub fn t(&self) -> f64 {
        self.t
    }

    pub fn r(&self) -> f64 {
        self.r
    }

    pub fn eta(&self) -> f64 {
        self.eta
    }

    fn t_pow(&self, e: u32) -> f64 {
        let even = self.eta.powi((e / 2) as i32);
        if e % 2 == 1 {
            even * self.t
        } else {
            even
        }
    }

    fn r_pow(&self, e: u32) -> f64 {
        let even = (1.0 - self.eta).powi((e / 2) as i32);
        if e % 2 == 1 {
            even * self.r
        } else {
            even
        }
    }
}

/// A complex amplitude of the form `value · i^power` with `power ∈ {0, 1}`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct PhasedAmplitude {
    pub value: f64,
    pub power: u8,
}

impl PhasedAmplitude {
    pub const ZERO: Self = Self {
        value: 0.0,
        power: 0,
    };

    pub fn new(value: f64, power: u8) -> Self {
        // i² = -1 folds into the sign.
        let p = power % 4;
        let value = if p >= 2 { -value } else { value };
        Self {
            value,
            power: p % 2,
        }
    }

    pub fn is_zero(&self) -> bool {
        self.value == 0.0
    }

    pub fn norm_sqr(&self) -> f64 {
        self.value * self.value
    }

    pub fn to_complex(&self) -> Complex<f64> {
        if self.power == 0 {
            Complex::new(self.value, 0.0)
        } else {
            Complex::new(0.0, self.value)
        }
    }
}

fn factorial(n: u32) -> u64 {
    (1..=n as u64).product()
}

fn binomial(n: u32, k: u32) -> u64 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k) as u64;
    let n = n as u64;
    (0..k).fold(1u64, |acc, i| acc * (n - i) / (i + 1))
}

/// Signal-mode state `α|off⟩ + β|off+1⟩ + γ|off+2⟩` with real coefficients.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModeState {
    pub coeffs: [f64; 3],
    pub offset: u32,
}

impl ModeState {
    pub fn new(alpha: f64, beta: f64, gamma: f64) -> Self {
        Self {
            coeffs: [alpha, beta, gamma],
            offset: 0,
        }
    }

    pub fn with_offset(mut self, offset: u32) -> Self {
        self.offset = offset;
        self
    }

    pub fn norm_sq(&self) -> f64 {
        self.coeffs.iter().map(|c| c * c).sum()
    }

    /// Rescales to unit norm. A zero state is returned unchanged.
    pub fn normalized(&self) -> Self {
        let n = self.norm_sq().sqrt();
        if n == 0.0 {
            return *self;
        }
        Self {
            coeffs: self.coeffs.map(|c| c / n),
            offset: self.offset,
        }
    }
}

/// Factor triple with its global phase stripped.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CanonicalFactors {
    pub factors: [f64; 3],
    /// `m` such that raw = `i^m` · canonical, `m ∈ 0..4`.
    pub removed_phase_power: u8,
}

/// Strips the common `i^m` (and a global sign) from a raw factor triple so
/// that the first nonzero factor is positive. Relative signs are kept.
pub fn canonical_phase(raw: [PhasedAmplitude; 3]) -> CanonicalFactors {
    let Some(lead) = raw.iter().find(|a| !a.is_zero()) else {
        return CanonicalFactors {
            factors: [0.0; 3],
            removed_phase_power: 0,
        };
    };
    let power = lead.power;
    debug_assert!(
        raw.iter().all(|a| a.is_zero() || a.power == power),
        "factors do not share a phase: {raw:?}"
    );
    let flip = lead.value < 0.0;
    let sign = if flip { -1.0 } else { 1.0 };
    CanonicalFactors {
        factors: raw.map(|a| sign * a.value),
        removed_phase_power: (power + if flip { 2 } else { 0 }) % 4,
    }
}

/// The `(k, n, t)` that produced a conditional map.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AppliedElement {
    pub k: u32,
    pub n: u32,
    pub t: f64,
}

/// Diagonal action of one heralded beam splitter on `(α, β, γ)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConditionalMap {
    pub factors: [f64; 3],
    pub input_offset: u32,
    pub output_offset: u32,
    pub element: AppliedElement,
    pub removed_phase_power: u8,
}

impl ConditionalMap {
    pub(crate) fn from_canonical(
        canon: CanonicalFactors,
        input_offset: u32,
        element: AppliedElement,
    ) -> Result<Self> {
        let out = input_offset as i64 + element.k as i64 - element.n as i64;
        if out < 0 {
            return Err(Error::LossyBranch {
                input_offset,
                k: element.k,
                n: element.n,
            });
        }
        Ok(Self {
            factors: canon.factors,
            input_offset,
            output_offset: out as u32,
            element,
            removed_phase_power: canon.removed_phase_power,
        })
    }

    /// Unnormalized output state; its squared norm is the outcome probability.
    pub fn apply(&self, state: &ModeState) -> Result<ModeState> {
        if state.offset != self.input_offset {
            return Err(Error::Config(format!(
                "state offset {} does not match map input offset {}",
                state.offset, self.input_offset
            )));
        }
        let mut coeffs = state.coeffs;
        for (c, f) in coeffs.iter_mut().zip(self.factors) {
            *c *= f;
        }
        Ok(ModeState {
            coeffs,
            offset: self.output_offset,
        })
    }

    pub fn branch_probability(&self, state: &ModeState) -> Result<f64> {
        Ok(self.apply(state)?.norm_sq())
    }
}

/// Oracle with a configurable photon cap.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Oracle {
    pub photon_cap: u32,
}

impl Default for Oracle {
    fn default() -> Self {
        Self {
            photon_cap: DEFAULT_PHOTON_CAP,
        }
    }
}

impl Oracle {
    pub fn new(photon_cap: u32) -> Self {
        Self { photon_cap }
    }

    /// `⟨p_a, p_b| U |m_a, m_b⟩`.
    pub fn amplitude(
        &self,
        p_a: u32,
        p_b: u32,
        m_a: u32,
        m_b: u32,
        bs: &BeamSplitter,
    ) -> Result<PhasedAmplitude> {
        if p_a + p_b != m_a + m_b {
            return Ok(PhasedAmplitude::ZERO);
        }
        let total = m_a + m_b;
        if total > self.photon_cap {
            return Err(Error::CapacityExceeded {
                total,
                cap: self.photon_cap,
            });
        }
        // Choose j of the m_a signal operators to stay in mode a (factor t
        // each) and p_a - j of the m_b auxiliary operators to cross over
        // (factor i·r each). The crossings number m_a + p_a - 2j, so the
        // phase is i^(m_a + p_a) · (-1)^j.
        let j_lo = p_a.saturating_sub(m_b);
        let j_hi = m_a.min(p_a);
        let mut sum = 0.0;
        for j in j_lo..=j_hi {
            let l = p_a - j;
            let coeff = (binomial(m_a, j) * binomial(m_b, l)) as f64;
            let term = coeff * bs.t_pow(j + m_b - l) * bs.r_pow(m_a - j + l);
            if j % 2 == 0 {
                sum += term;
            } else {
                sum -= term;
            }
        }
        let num = factorial(p_a) * factorial(p_b);
        let den = factorial(m_a) * factorial(m_b);
        let norm = (num as f64 / den as f64).sqrt();
        Ok(PhasedAmplitude::new(sum * norm, ((m_a + p_a) % 4) as u8))
    }

    /// Raw amplitudes for detecting `n` auxiliary photons, without the
    /// lossy-branch check: components that would need a negative photon
    /// number in the signal mode are exact zeros.
    pub fn raw_branch(
        &self,
        input_offset: u32,
        k: u32,
        n: u32,
        bs: &BeamSplitter,
    ) -> Result<[PhasedAmplitude; 3]> {
        let available = k + input_offset + 2;
        if n > available {
            return Err(Error::InvalidDetection { n, available });
        }
        let mut raw = [PhasedAmplitude::ZERO; 3];
        for (j, slot) in raw.iter_mut().enumerate() {
            let m_a = j as u32 + input_offset;
            let total = m_a + k;
            if total < n {
                continue;
            }
            *slot = self.amplitude(total - n, n, m_a, k, bs)?;
        }
        Ok(raw)
    }

    /// Conditional map for injecting `k` and detecting `n` auxiliary photons
    /// on a signal state carrying `input_offset` extra photons.
    pub fn conditional_map(
        &self,
        input_offset: u32,
        k: u32,
        n: u32,
        bs: &BeamSplitter,
    ) -> Result<ConditionalMap> {
        let available = k + input_offset + 2;
        if n > available {
            return Err(Error::InvalidDetection { n, available });
        }
        if n > k + input_offset {
            return Err(Error::LossyBranch { input_offset, k, n });
        }
        let raw = self.raw_branch(input_offset, k, n, bs)?;
        ConditionalMap::from_canonical(
            canonical_phase(raw),
            input_offset,
            AppliedElement { k, n, t: bs.t() },
        )
    }
}

/// `⟨p_a, p_b| U |m_a, m_b⟩` with the default photon cap.
pub fn two_mode_amplitude(
    p_a: u32,
    p_b: u32,
    m_a: u32,
    m_b: u32,
    bs: &BeamSplitter,
) -> Result<PhasedAmplitude> {
    Oracle::default().amplitude(p_a, p_b, m_a, m_b, bs)
}

pub fn conditional_map_oracle(
    input_offset: u32,
    k: u32,
    n: u32,
    bs: &BeamSplitter,
) -> Result<ConditionalMap> {
    Oracle::default().conditional_map(input_offset, k, n, bs)
}

/// Sparse two-mode state `Σ c(p_a, p_b) |p_a, p_b⟩`.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct TwoModeFockVector {
    amplitudes: BTreeMap<(u32, u32), Complex<f64>>,
    oracle: Oracle,
}

impl TwoModeFockVector {
    pub fn new(oracle: Oracle) -> Self {
        Self {
            amplitudes: BTreeMap::new(),
            oracle,
        }
    }

    pub fn set(&mut self, p_a: u32, p_b: u32, amp: Complex<f64>) -> Result<()> {
        let total = p_a + p_b;
        if total > self.oracle.photon_cap {
            return Err(Error::CapacityExceeded {
                total,
                cap: self.oracle.photon_cap,
            });
        }
        self.amplitudes.insert((p_a, p_b), amp);
        Ok(())
    }

    pub fn get(&self, p_a: u32, p_b: u32) -> Complex<f64> {
        self.amplitudes
            .get(&(p_a, p_b))
            .copied()
            .unwrap_or_default()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&(u32, u32), &Complex<f64>)> {
        self.amplitudes.iter()
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes.values().map(|a| a.norm_sqr()).sum()
    }

    /// Squared norm restricted to one photon-number sector.
    pub fn sector_norm_sqr(&self, total: u32) -> f64 {
        self.amplitudes
            .iter()
            .filter(|((a, b), _)| a + b == total)
            .map(|(_, v)| v.norm_sqr())
            .sum()
    }

    pub fn apply(&self, bs: &BeamSplitter) -> Result<Self> {
        let mut out = Self::new(self.oracle);
        let totals: std::collections::BTreeSet<u32> =
            self.amplitudes.keys().map(|(a, b)| a + b).collect();
        for total in totals {
            for p_a in 0..=total {
                let p_b = total - p_a;
                let mut acc = Complex::new(0.0, 0.0);
                for (&(m_a, m_b), c) in &self.amplitudes {
                    if m_a + m_b != total {
                        continue;
                    }
                    let u = self.oracle.amplitude(p_a, p_b, m_a, m_b, bs)?;
                    acc += u.to_complex() * c;
                }
                if acc != Complex::new(0.0, 0.0) {
                    out.set(p_a, p_b, acc)?;
                }
            }
        }
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const TOL: f64 = 1e-12;

    fn bs(t: f64) -> BeamSplitter {
        BeamSplitter::new(t).unwrap()
    }

    #[test]
    fn identity_splitter_is_identity() {
        let id = bs(1.0);
        for m_a in 0..4 {
            for m_b in 0..4 {
                for p_a in 0..=(m_a + m_b) {
                    let p_b = m_a + m_b - p_a;
                    let a = two_mode_amplitude(p_a, p_b, m_a, m_b, &id).unwrap();
                    let want = if (p_a, p_b) == (m_a, m_b) { 1.0 } else { 0.0 };
                    assert!(
                        (a.value - want).abs() < TOL,
                        "{p_a},{p_b}|{m_a},{m_b}: {a:?}"
                    );
                }
            }
        }
    }

    #[test]
    fn single_reflection_carries_i() {
        let a = two_mode_amplitude(1, 0, 0, 1, &bs(0.6)).unwrap();
        assert_eq!(a.power, 1);
        assert!((a.value - 0.8).abs() < TOL);
    }

    #[test]
    fn hong_ou_mandel_zero() {
        let a = two_mode_amplitude(1, 1, 1, 1, &bs(0.5f64.sqrt())).unwrap();
        assert!(a.value.abs() < TOL);
        let exact = two_mode_amplitude(1, 1, 1, 1, &BeamSplitter::from_eta(0.5).unwrap()).unwrap();
        assert_eq!(exact.value, 0.0);
    }

    #[test]
    fn mismatched_totals_are_exact_zero() {
        let a = two_mode_amplitude(2, 1, 1, 1, &bs(0.3)).unwrap();
        assert_eq!(a, PhasedAmplitude::ZERO);
    }

    #[test]
    fn photon_cap_is_enforced() {
        let err = two_mode_amplitude(7, 6, 7, 6, &bs(0.3)).unwrap_err();
        assert_eq!(err, Error::CapacityExceeded { total: 13, cap: 12 });
        assert!(two_mode_amplitude(6, 6, 6, 6, &bs(0.3)).is_ok());
    }

    #[test]
    fn splitter_domain() {
        assert!(BeamSplitter::new(1.2).is_err());
        assert!(BeamSplitter::from_eta(-0.1).is_err());
        let b = bs(-0.6);
        assert!((b.t() * b.t() + b.r() * b.r() - 1.0).abs() < TOL);
        assert!(b.r() >= 0.0);
        assert!((b.eta() - 0.36).abs() < TOL);
    }

    #[test]
    fn canonical_phase_examples() {
        let raw = [
            PhasedAmplitude::new(0.5, 1),
            PhasedAmplitude::new(0.2, 1),
            PhasedAmplitude::new(-0.1, 1),
        ];
        let c = canonical_phase(raw);
        assert_eq!(c.factors, [0.5, 0.2, -0.1]);
        assert_eq!(c.removed_phase_power, 1);

        let raw = [
            PhasedAmplitude::new(-0.3, 0),
            PhasedAmplitude::new(0.3, 0),
            PhasedAmplitude::new(0.3, 0),
        ];
        let c = canonical_phase(raw);
        assert_eq!(c.factors, [0.3, -0.3, -0.3]);
        assert_eq!(c.removed_phase_power, 2);

        let c = canonical_phase([PhasedAmplitude::ZERO; 3]);
        assert_eq!(c.factors, [0.0; 3]);

        let raw = [
            PhasedAmplitude::ZERO,
            PhasedAmplitude::new(-0.4, 0),
            PhasedAmplitude::new(0.1, 0),
        ];
        assert_eq!(canonical_phase(raw).factors, [0.0, 0.4, -0.1]);
    }

    #[test]
    fn add_photon_branch_carries_one_power_of_i() {
        let b = BeamSplitter::from_eta(0.75).unwrap();
        let raw = Oracle::default().raw_branch(0, 1, 0, &b).unwrap();
        assert!(raw.iter().all(|a| a.power == 1));
        let m = conditional_map_oracle(0, 1, 0, &b).unwrap();
        assert_eq!(m.removed_phase_power, 1);
        // √(1-η), √(2η(1-η)), √3·η·√(1-η)
        let want = [0.5, (2.0 * 0.75 * 0.25f64).sqrt(), 3f64.sqrt() * 0.75 * 0.5];
        for (f, w) in m.factors.iter().zip(want) {
            assert!((f - w).abs() < 1e-12, "{:?}", m.factors);
        }
    }

    #[test]
    fn keep_one_photon_at_half() {
        let m = conditional_map_oracle(0, 1, 1, &BeamSplitter::from_eta(0.5).unwrap()).unwrap();
        let s = 0.5f64.sqrt();
        assert!((m.factors[0] - s).abs() < TOL);
        assert_eq!(m.factors[1], 0.0);
        assert!((m.factors[2] + s / 2.0).abs() < TOL);
        assert_eq!((m.input_offset, m.output_offset), (0, 0));
    }

    #[test]
    fn transparent_splitter_keeps_everything() {
        let m = conditional_map_oracle(0, 2, 2, &bs(1.0)).unwrap();
        assert_eq!(m.factors, [1.0, 1.0, 1.0]);
        assert_eq!((m.input_offset, m.output_offset), (0, 0));
    }

    #[test]
    fn lossy_and_invalid_detections() {
        let b = bs(0.4);
        assert_eq!(
            conditional_map_oracle(0, 0, 1, &b).unwrap_err(),
            Error::LossyBranch {
                input_offset: 0,
                k: 0,
                n: 1
            }
        );
        assert_eq!(
            conditional_map_oracle(0, 1, 4, &b).unwrap_err(),
            Error::InvalidDetection { n: 4, available: 3 }
        );
        let m = conditional_map_oracle(1, 0, 1, &b).unwrap();
        assert_eq!((m.input_offset, m.output_offset), (1, 0));
    }

    #[test]
    fn map_apply_checks_offset() {
        let m = conditional_map_oracle(1, 1, 1, &bs(0.7)).unwrap();
        assert!(m.apply(&ModeState::new(1.0, 0.0, 0.0)).is_err());
        let out = m
            .apply(&ModeState::new(1.0, 0.0, 0.0).with_offset(1))
            .unwrap();
        assert_eq!(out.offset, 1);
    }

    #[test]
    fn vector_application_conserves_sectors() {
        let mut v = TwoModeFockVector::new(Oracle::default());
        v.set(2, 1, Complex::new(0.6, 0.0)).unwrap();
        v.set(0, 1, Complex::new(0.0, 0.8)).unwrap();
        let out = v.apply(&bs(-0.35)).unwrap();
        assert!((out.sector_norm_sqr(3) - 0.36).abs() < 1e-12);
        assert!((out.sector_norm_sqr(1) - 0.64).abs() < 1e-12);
        assert!((out.norm_sqr() - 1.0).abs() < 1e-12);
    }
}
