//! Closed-form conditional maps for the four single-photon-change families.
//!
//! All maps are written in terms of the transmitivity `η` and
//! `ξ = (1 - η)/η`, with `t = +sqrt(η)`. Each one is the `j`-th diagonal
//! matrix element collapsed into a short polynomial in `ξ`; the coefficient
//! of `ξ^i` is a product of binomials, so the falling factorials of `k`
//! always appear divided by `i!`.
//!
//! Signed amplitudes are not handled here: those maps come from the oracle.

use crate::error::{Error, Result};
use crate::fock::{canonical_phase, AppliedElement, ConditionalMap, PhasedAmplitude};

/// Transmitivity together with `ξ = (1 - η)/η`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EtaXi {
    pub eta: f64,
    pub xi: f64,
}

impl EtaXi {
    pub fn new(eta: f64) -> Result<Self> {
        if !(eta > 0.0 && eta <= 1.0) {
            return Err(Error::EtaDomain { eta });
        }
        Ok(Self {
            eta,
            xi: (1.0 - eta) / eta,
        })
    }

    /// `sqrt(η)^p`
    fn root_pow(&self, p: u32) -> f64 {
        self.eta.sqrt().powi(p as i32)
    }
}

fn build(
    raw: [f64; 3],
    power: u8,
    input_offset: u32,
    k: u32,
    n: u32,
    ex: &EtaXi,
) -> Result<ConditionalMap> {
    let canon = canonical_phase(raw.map(|v| PhasedAmplitude::new(v, power)));
    ConditionalMap::from_canonical(
        canon,
        input_offset,
        AppliedElement {
            k,
            n,
            t: ex.eta.sqrt(),
        },
    )
}

/// Inject and detect `k` photons on a state with no extra photons.
pub fn map_keep(k: u32, eta: f64) -> Result<ConditionalMap> {
    let ex = EtaXi::new(eta)?;
    let (kf, x) = (k as f64, ex.xi);
    let f0 = ex.root_pow(k);
    let f1 = ex.root_pow(k + 1) * (1.0 - kf * x);
    let f2 = ex.root_pow(k + 2) * (1.0 - 2.0 * kf * x + kf * (kf - 1.0) * x * x / 2.0);
    build([f0, f1, f2], 0, 0, k, k, &ex)
}

/// Inject `k ≥ 1` photons and detect `k - 1`, adding one photon to the beam.
pub fn map_add(k: u32, eta: f64) -> Result<ConditionalMap> {
    if k == 0 {
        return Err(Error::ClosedFormDomain { k });
    }
    let ex = EtaXi::new(eta)?;
    let (km1, x) = ((k - 1) as f64, ex.xi);
    let pre = (k as f64 * (1.0 - eta)).sqrt();
    let f0 = pre * ex.root_pow(k - 1);
    let f1 = 2f64.sqrt() * pre * ex.root_pow(k) * (1.0 - km1 * x / 2.0);
    let f2 =
        3f64.sqrt() * pre * ex.root_pow(k + 1) * (1.0 - km1 * x + km1 * (km1 - 1.0) * x * x / 6.0);
    build([f0, f1, f2], 1, 0, k, k - 1, &ex)
}

/// Inject `k` photons and detect `k + 1` on a beam that already carries one
/// extra photon, removing it again.
pub fn map_remove(k: u32, eta: f64) -> Result<ConditionalMap> {
    let ex = EtaXi::new(eta)?;
    let (kf, x) = (k as f64, ex.xi);
    let pre = ((kf + 1.0) * (1.0 - eta)).sqrt();
    let f0 = pre * ex.root_pow(k);
    let f1 = 2f64.sqrt() * pre * ex.root_pow(k + 1) * (1.0 - kf * x / 2.0);
    let f2 =
        3f64.sqrt() * pre * ex.root_pow(k + 2) * (1.0 - kf * x + kf * (kf - 1.0) * x * x / 6.0);
    build([f0, f1, f2], 1, 1, k, k + 1, &ex)
}

/// Inject and detect `k` photons on a beam carrying one extra photon.
pub fn map_keep_offset1(k: u32, eta: f64) -> Result<ConditionalMap> {
    let ex = EtaXi::new(eta)?;
    let (kf, x) = (k as f64, ex.xi);
    let pairs = kf * (kf - 1.0);
    let triples = pairs * (kf - 2.0);
    let f0 = ex.root_pow(k + 1) * (1.0 - kf * x);
    let f1 = ex.root_pow(k + 2) * (1.0 - 2.0 * kf * x + pairs * x * x / 2.0);
    let f2 =
        ex.root_pow(k + 3) * (1.0 - 3.0 * kf * x + 1.5 * pairs * x * x - triples * x * x * x / 6.0);
    build([f0, f1, f2], 0, 1, k, k, &ex)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: [f64; 3], b: [f64; 3], tol: f64) -> bool {
        a.iter().zip(b).all(|(x, y)| (x - y).abs() < tol)
    }

    #[test]
    fn eta_xi_identity() {
        for eta in [0.05, 0.3, 0.5, 0.99, 1.0] {
            let ex = EtaXi::new(eta).unwrap();
            assert!(ex.xi >= 0.0);
            assert!((ex.eta * (1.0 + ex.xi) - 1.0).abs() < 1e-12);
        }
        assert!(EtaXi::new(0.0).is_err());
        assert!(EtaXi::new(1.5).is_err());
    }

    #[test]
    fn keep_zero_photons_is_positive() {
        for eta in [0.1, 0.4, 0.8] {
            let m = map_keep(0, eta).unwrap();
            assert!(close(m.factors, [1.0, eta.sqrt(), eta], 1e-14));
        }
    }

    #[test]
    fn keep_one_photon() {
        let s = 0.5f64.sqrt();
        let m = map_keep(1, 0.5).unwrap();
        assert!(
            close(m.factors, [s, 0.0, -s / 2.0], 1e-14),
            "{:?}",
            m.factors
        );
        assert_eq!(map_keep(1, 1.0).unwrap().factors, [1.0, 1.0, 1.0]);
    }

    #[test]
    fn add_one_photon() {
        let m = map_add(1, 0.75).unwrap();
        let want = [0.5, (2.0 * 0.75 * 0.25f64).sqrt(), 3f64.sqrt() * 0.75 * 0.5];
        assert!(close(m.factors, want, 1e-14), "{:?}", m.factors);
        assert_eq!((m.input_offset, m.output_offset), (0, 1));
        assert_eq!(m.removed_phase_power, 1);
        assert_eq!(map_add(2, 1.0).unwrap().factors, [0.0, 0.0, 0.0]);
        assert_eq!(
            map_add(0, 0.5).unwrap_err(),
            Error::ClosedFormDomain { k: 0 }
        );
    }

    #[test]
    fn remove_one_photon() {
        let m = map_remove(0, 0.5).unwrap();
        let want = [
            0.5f64.sqrt(),
            0.5f64.sqrt(),
            3f64.sqrt() * 0.5 * 0.5f64.sqrt(),
        ];
        assert!(close(m.factors, want, 1e-14), "{:?}", m.factors);
        assert_eq!((m.input_offset, m.output_offset), (1, 0));
        assert_eq!(map_remove(1, 1.0).unwrap().factors, [0.0, 0.0, 0.0]);
    }

    #[test]
    fn keep_offset1_zero_photons() {
        let eta: f64 = 0.36;
        let m = map_keep_offset1(0, eta).unwrap();
        assert!(close(m.factors, [eta.sqrt(), eta, eta.powf(1.5)], 1e-14));
        // one extra √η per photon relative to the offset-0 map
        let base = map_keep(0, eta).unwrap();
        for (a, b) in m.factors.iter().zip(base.factors) {
            assert!((a / b - eta.sqrt()).abs() < 1e-14);
        }
    }

    #[test]
    fn keep_offset1_half_has_zero_lead() {
        let m = map_keep_offset1(1, 0.5).unwrap();
        assert!(m.factors[0].abs() < 1e-15);
        assert_eq!(m.input_offset, 1);
        assert_eq!(m.output_offset, 1);
    }
}
