//! Self-checks of the Fock oracle: agreement with the closed forms,
//! probability conservation, photon bookkeeping and sign parity.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::closed_form::{map_add, map_keep, map_keep_offset1, map_remove};
use crate::error::Result;
use crate::fock::{BeamSplitter, ConditionalMap, ModeState, Oracle};

pub const FACTOR_TOL: f64 = 1e-9;
pub const UNITARITY_TOL: f64 = 1e-9;

/// `0.05, 0.10, ..., 0.95`
pub fn eta_grid() -> Vec<f64> {
    (1..20).map(|i| i as f64 * 0.05).collect()
}

/// `±0.1, ±0.3, ±0.5, ±0.7, ±0.9`
pub fn signed_t_grid() -> Vec<f64> {
    [0.1, 0.3, 0.5, 0.7, 0.9]
        .iter()
        .flat_map(|&t| [-t, t])
        .collect()
}

/// Normalized real states drawn from a fixed seed.
pub fn random_states(count: usize, seed: u64) -> Vec<ModeState> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(count);
    while out.len() < count {
        let s = ModeState::new(
            rng.gen_range(-1.0..1.0),
            rng.gen_range(-1.0..1.0),
            rng.gen_range(-1.0..1.0),
        );
        if s.norm_sq() > 1e-3 {
            out.push(s.normalized());
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuiteOutcome {
    pub name: String,
    pub checks: usize,
    pub failures: usize,
    pub max_error: f64,
    pub first_failure: Option<String>,
}

impl SuiteOutcome {
    fn new(name: &str) -> Self {
        Self {
            name: name.into(),
            checks: 0,
            failures: 0,
            max_error: 0.0,
            first_failure: None,
        }
    }

    fn record(&mut self, err: f64, tol: f64, what: impl FnOnce() -> String) {
        self.checks += 1;
        if err > self.max_error || err.is_nan() {
            self.max_error = err;
        }
        if !(err <= tol) {
            self.failures += 1;
            if self.first_failure.is_none() {
                self.first_failure = Some(what());
            }
        }
    }

    pub fn passed(&self) -> bool {
        self.failures == 0
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OracleReport {
    pub suites: Vec<SuiteOutcome>,
}

impl OracleReport {
    pub fn passed(&self) -> bool {
        self.suites.iter().all(SuiteOutcome::passed)
    }
}

type ClosedForm = fn(u32, f64) -> Result<ConditionalMap>;

/// Closed-form families with their `(input_offset, detected - injected)`
/// and the smallest `k` they accept.
pub fn closed_form_families() -> [(&'static str, ClosedForm, u32, i64, u32); 4] {
    [
        ("keep", map_keep as ClosedForm, 0, 0, 0),
        ("add", map_add as ClosedForm, 0, -1, 1),
        ("remove", map_remove as ClosedForm, 1, 1, 0),
        ("keep_offset1", map_keep_offset1 as ClosedForm, 1, 0, 0),
    ]
}

pub fn closed_form_suite(oracle: &Oracle, max_k: u32) -> Result<SuiteOutcome> {
    let mut out = SuiteOutcome::new("closed forms vs oracle");
    for (name, form, offset, dn, k_min) in closed_form_families() {
        for k in k_min..=max_k {
            let n = (k as i64 + dn) as u32;
            for eta in eta_grid() {
                let closed = form(k, eta)?;
                let exact = oracle.conditional_map(offset, k, n, &BeamSplitter::from_eta(eta)?)?;
                let err = closed
                    .factors
                    .iter()
                    .zip(exact.factors)
                    .map(|(a, b)| (a - b).abs())
                    .fold(0.0, f64::max);
                let offsets_ok = closed.input_offset == exact.input_offset
                    && closed.output_offset == exact.output_offset
                    && closed.removed_phase_power == exact.removed_phase_power;
                let err = if offsets_ok { err } else { f64::INFINITY };
                out.record(err, FACTOR_TOL, || {
                    format!(
                        "{name} k={k} eta={eta}: closed {:?} vs oracle {:?}",
                        closed.factors, exact.factors
                    )
                });
            }
        }
    }
    Ok(out)
}

/// Sum over every detection outcome of the branch probability, for each
/// offset, `k`, signed `t` and state.
pub fn unitarity_suite(oracle: &Oracle, max_k: u32, states: &[ModeState]) -> Result<SuiteOutcome> {
    let mut out = SuiteOutcome::new("probability conservation");
    for offset in 0..=1u32 {
        for k in 0..=max_k {
            for t in signed_t_grid() {
                let bs = BeamSplitter::new(t)?;
                let branches = (0..=k + offset + 2)
                    .map(|n| oracle.raw_branch(offset, k, n, &bs))
                    .collect::<Result<Vec<_>>>()?;
                for s in states {
                    let total: f64 = branches
                        .iter()
                        .map(|raw| {
                            raw.iter()
                                .zip(s.coeffs)
                                .map(|(a, c)| a.norm_sqr() * c * c)
                                .sum::<f64>()
                        })
                        .sum();
                    out.record((total - 1.0).abs(), UNITARITY_TOL, || {
                        format!(
                            "offset={offset} k={k} t={t} state={:?}: sum {total}",
                            s.coeffs
                        )
                    });
                }
            }
        }
    }
    Ok(out)
}

pub fn bookkeeping_suite(oracle: &Oracle, max_k: u32) -> Result<SuiteOutcome> {
    let mut out = SuiteOutcome::new("photon bookkeeping");
    for offset in 0..=1u32 {
        for k in 0..=max_k {
            for n in 0..=k + offset {
                for t in signed_t_grid() {
                    let m = oracle.conditional_map(offset, k, n, &BeamSplitter::new(t)?)?;
                    let shift = m.output_offset as i64 - m.input_offset as i64;
                    let err = if shift == k as i64 - n as i64 && m.input_offset == offset {
                        0.0
                    } else {
                        1.0
                    };
                    out.record(err, 0.0, || {
                        format!("offset={offset} k={k} n={n}: shift {shift}")
                    });
                }
            }
        }
    }
    Ok(out)
}

/// Flipping the sign of `t` changes factor signs but never magnitudes.
pub fn parity_suite(oracle: &Oracle, max_k: u32) -> Result<SuiteOutcome> {
    let mut out = SuiteOutcome::new("sign parity");
    for offset in 0..=1u32 {
        for k in 0..=max_k {
            for n in 0..=k + offset {
                for t in [0.1, 0.3, 0.5, 0.7, 0.9] {
                    let plus = oracle.conditional_map(offset, k, n, &BeamSplitter::new(t)?)?;
                    let minus = oracle.conditional_map(offset, k, n, &BeamSplitter::new(-t)?)?;
                    let err = plus
                        .factors
                        .iter()
                        .zip(minus.factors)
                        .map(|(a, b)| (a.abs() - b.abs()).abs())
                        .fold(0.0, f64::max);
                    out.record(err, 1e-12, || format!("offset={offset} k={k} n={n} t=±{t}"));
                }
            }
        }
    }
    Ok(out)
}

pub fn run_oracle_suites(oracle: &Oracle) -> Result<OracleReport> {
    let states = random_states(20, 0x5eed);
    Ok(OracleReport {
        suites: vec![
            closed_form_suite(oracle, 4)?,
            unitarity_suite(oracle, 4, &states)?,
            bookkeeping_suite(oracle, 4)?,
            parity_suite(oracle, 4)?,
        ],
    })
}
