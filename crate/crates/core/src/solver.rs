//! Multistart damped Newton search for NS gates.
//!
//! The unknowns are the signed transmission amplitudes of the free elements;
//! the equations are the two NS residuals. Seeds cover a uniform magnitude
//! grid with every sign pattern. Converged points are grouped into solution
//! classes by their transmitivity vector and ranked by success probability.
//!
//! With more than two free amplitudes the solutions form a manifold, and each
//! seed is additionally pushed uphill in `F0²` along it by projected gradient
//! steps, each followed by a Newton projection back onto the manifold.

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fock::Oracle;
use crate::sequence::{compose_with, ns_residuals, SequenceSpec};

/// Two success probabilities closer than this are treated as tied.
pub const PROBABILITY_TIE: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverConfig {
    /// Magnitudes per axis; each is seeded with both signs.
    pub grid: usize,
    /// Residual norm a seed must reach to count as converged.
    pub newton_tol: f64,
    /// Max-norm distance between transmitivity vectors of one class.
    pub dedupe_radius: f64,
    pub max_iter: usize,
    pub min_abs_t: f64,
    pub max_abs_t: f64,
    /// Upper bound on the number of seeds; the per-axis density shrinks to fit.
    pub seed_cap: usize,
    pub fd_step: f64,
    pub oracle: Oracle,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            grid: 41,
            newton_tol: 1e-10,
            dedupe_radius: 1e-6,
            max_iter: 200,
            min_abs_t: 1e-4,
            max_abs_t: 1.0 - 1e-9,
            seed_cap: 200_000,
            fd_step: 1e-7,
            oracle: Oracle::default(),
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        if self.grid < 5 {
            return Err(Error::Config(format!(
                "grid must be at least 5, got {}",
                self.grid
            )));
        }
        if !(self.newton_tol > 0.0) || !(self.dedupe_radius > 0.0) {
            return Err(Error::Config("tolerances must be positive".into()));
        }
        if self.seed_cap == 0 {
            return Err(Error::Config("seed cap must be positive".into()));
        }
        Ok(())
    }

    /// Per-axis magnitude count for `free` unknowns under the seed cap.
    pub fn axis_points(&self, free: usize) -> usize {
        let mut g = self.grid;
        while g > 2
            && (2 * g)
                .checked_pow(free as u32)
                .is_none_or(|n| n > self.seed_cap)
        {
            g -= 1;
        }
        g
    }
}

/// One NS solution class.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GateSolution {
    pub sequence: SequenceSpec,
    /// Signed transmission amplitudes of the class representative.
    pub amplitudes: Vec<f64>,
    pub etas: Vec<f64>,
    pub residuals: [f64; 2],
    pub residual_norm: f64,
    pub probability: f64,
    /// 1-based rank within the solve.
    pub class_index: usize,
    pub class_count: usize,
    /// Distinct amplitude sign patterns that converged to this class.
    pub gauge_count: usize,
}

impl GateSolution {
    pub fn eta(&self, i: usize) -> f64 {
        self.etas[i]
    }
}

struct Problem<'a> {
    seq: &'a SequenceSpec,
    frozen: &'a [Option<f64>],
    free: Vec<usize>,
    cfg: &'a SolverConfig,
}

impl<'a> Problem<'a> {
    fn full(&self, x: &[f64]) -> Vec<f64> {
        let mut it = x.iter();
        self.frozen
            .iter()
            .map(|f| f.unwrap_or_else(|| *it.next().expect("free amplitude")))
            .collect()
    }

    fn in_domain(&self, x: &[f64]) -> bool {
        x.iter().all(|t| {
            let a = t.abs();
            a >= self.cfg.min_abs_t && a <= self.cfg.max_abs_t
        })
    }

    /// `(residuals, F0)` or `None` where the map is degenerate.
    fn eval(&self, x: &[f64]) -> Option<([f64; 2], f64)> {
        let map = compose_with(&self.cfg.oracle, self.seq, &self.full(x)).ok()?;
        let r = ns_residuals(&map).ok()?;
        if r.iter().all(|v| v.is_finite()) {
            Some((r, map.factors[0]))
        } else {
            None
        }
    }

    fn residual(&self, x: &[f64]) -> Option<DVector<f64>> {
        self.eval(x).map(|(r, _)| DVector::from_row_slice(&r))
    }

    fn jacobian(&self, x: &[f64]) -> Option<DMatrix<f64>> {
        let h = self.cfg.fd_step;
        let mut jac = DMatrix::zeros(2, x.len());
        let mut xp = x.to_vec();
        for i in 0..x.len() {
            xp[i] = x[i] + h;
            let up = self.eval(&xp)?.0;
            xp[i] = x[i] - h;
            let dn = self.eval(&xp)?.0;
            xp[i] = x[i];
            for row in 0..2 {
                jac[(row, i)] = (up[row] - dn[row]) / (2.0 * h);
            }
        }
        Some(jac)
    }

    fn probability_gradient(&self, x: &[f64]) -> Option<DVector<f64>> {
        let h = self.cfg.fd_step;
        let mut g = DVector::zeros(x.len());
        let mut xp = x.to_vec();
        for i in 0..x.len() {
            xp[i] = x[i] + h;
            let up = self.eval(&xp)?.1.powi(2);
            xp[i] = x[i] - h;
            let dn = self.eval(&xp)?.1.powi(2);
            xp[i] = x[i];
            g[i] = (up - dn) / (2.0 * h);
        }
        Some(g)
    }

    /// Damped Newton (least squares or minimum norm when not square).
    /// Returns the final point and residual norm.
    fn newton(&self, x0: &[f64], max_iter: usize) -> Option<(Vec<f64>, f64)> {
        let mut x = x0.to_vec();
        let mut r = self.residual(&x)?;
        let mut norm = r.norm();
        for _ in 0..max_iter {
            if norm < self.cfg.newton_tol * 1e-3 {
                break;
            }
            let jac = self.jacobian(&x)?;
            let step = solve_step(&jac, &r)?;
            let mut lambda = 1.0;
            let mut accepted = false;
            while lambda > 1e-10 {
                let trial: Vec<f64> = x
                    .iter()
                    .zip(step.iter())
                    .map(|(a, s)| a - lambda * s)
                    .collect();
                if self.in_domain(&trial) {
                    if let Some(rt) = self.residual(&trial) {
                        let nt = rt.norm();
                        if nt < norm {
                            x = trial;
                            r = rt;
                            norm = nt;
                            accepted = true;
                            break;
                        }
                    }
                }
                lambda *= 0.5;
            }
            if !accepted {
                break;
            }
        }
        Some((x, norm))
    }

    /// Climbs `F0²` along the solution manifold from a converged point.
    fn climb(&self, x0: Vec<f64>, norm0: f64) -> (Vec<f64>, f64) {
        let (mut x, mut norm) = (x0, norm0);
        let Some((_, f0)) = self.eval(&x) else {
            return (x, norm);
        };
        let mut p = f0 * f0;
        let mut alpha = 0.05;
        for _ in 0..200 {
            let (Some(jac), Some(g)) = (self.jacobian(&x), self.probability_gradient(&x)) else {
                break;
            };
            let Some(pinv) = jac.clone().pseudo_inverse(1e-12).ok() else {
                break;
            };
            let d = &g - &pinv * (&jac * &g);
            let dn = d.norm();
            if dn < 1e-10 {
                break;
            }
            let dir = d / dn;
            let mut improved = false;
            while alpha > 1e-9 {
                let trial: Vec<f64> = x
                    .iter()
                    .zip(dir.iter())
                    .map(|(a, s)| a + alpha * s)
                    .collect();
                let trial: Vec<f64> = trial
                    .into_iter()
                    .map(|t| t.signum() * t.abs().clamp(self.cfg.min_abs_t, self.cfg.max_abs_t))
                    .collect();
                if let Some((xt, nt)) = self.newton(&trial, 50) {
                    if nt < self.cfg.newton_tol {
                        if let Some((_, ft)) = self.eval(&xt) {
                            if ft * ft > p + 1e-15 {
                                x = xt;
                                norm = nt;
                                p = ft * ft;
                                improved = true;
                                alpha = (alpha * 2.0).min(0.2);
                                break;
                            }
                        }
                    }
                }
                alpha *= 0.5;
            }
            if !improved {
                break;
            }
        }
        (x, norm)
    }
}

fn solve_step(jac: &DMatrix<f64>, r: &DVector<f64>) -> Option<DVector<f64>> {
    if jac.nrows() == jac.ncols() {
        if let Some(s) = jac.clone().lu().solve(r) {
            if s.iter().all(|v| v.is_finite()) {
                return Some(s);
            }
        }
    }
    let pinv = jac.clone().pseudo_inverse(1e-14).ok()?;
    let s = pinv * r;
    s.iter().all(|v| v.is_finite()).then_some(s)
}

fn seeds(free: usize, axis: usize) -> Vec<Vec<f64>> {
    let values: Vec<f64> = (0..axis)
        .map(|i| -((axis - i) as f64) / (axis + 1) as f64)
        .chain((0..axis).map(|i| (i + 1) as f64 / (axis + 1) as f64))
        .collect();
    let base = values.len();
    let count = base.pow(free as u32);
    (0..count)
        .map(|mut idx| {
            let mut x = vec![0.0; free];
            for slot in x.iter_mut().rev() {
                *slot = values[idx % base];
                idx /= base;
            }
            x
        })
        .collect()
}

struct Candidate {
    amplitudes: Vec<f64>,
    etas: Vec<f64>,
    residuals: [f64; 2],
    residual_norm: f64,
    probability: f64,
}

struct Class {
    best: Candidate,
    signs: Vec<Vec<bool>>,
}

/// All NS solution classes of `seq`, every amplitude free.
pub fn solve_ns(seq: &SequenceSpec, cfg: &SolverConfig) -> Result<Vec<GateSolution>> {
    solve_ns_frozen(seq, &vec![None; seq.len()], cfg)
}

/// All NS solution classes of `seq` with some amplitudes held fixed.
pub fn solve_ns_frozen(
    seq: &SequenceSpec,
    frozen: &[Option<f64>],
    cfg: &SolverConfig,
) -> Result<Vec<GateSolution>> {
    cfg.validate()?;
    if frozen.len() != seq.len() {
        return Err(Error::LengthMismatch {
            expected: seq.len(),
            got: frozen.len(),
        });
    }
    seq.offsets()?;
    let net = seq.net_offset();
    if net != 0 {
        return Err(Error::NotAGate { net_offset: net });
    }
    let free: Vec<usize> = frozen
        .iter()
        .enumerate()
        .filter(|(_, f)| f.is_none())
        .map(|(i, _)| i)
        .collect();
    let problem = Problem {
        seq,
        frozen,
        free,
        cfg,
    };
    if problem.free.is_empty() {
        let cand = problem.eval(&[]).and_then(|_| finish(&problem, Vec::new()));
        return Ok(rank(
            seq,
            cluster(cand.into_iter().collect(), cfg.dedupe_radius),
        ));
    }

    let axis = cfg.axis_points(problem.free.len());
    let starts = seeds(problem.free.len(), axis);
    let candidates: Vec<Option<Candidate>> = starts
        .par_iter()
        .map(|x0| {
            problem.eval(x0)?;
            let (x, norm) = problem.newton(x0, cfg.max_iter)?;
            if !(norm < cfg.newton_tol) {
                return None;
            }
            let x = if problem.free.len() > 2 {
                problem.climb(x, norm).0
            } else {
                x
            };
            finish(&problem, x)
        })
        .collect();
    let converged: Vec<Candidate> = candidates.into_iter().flatten().collect();
    Ok(rank(seq, cluster(converged, cfg.dedupe_radius)))
}

/// Re-evaluates a converged point through the public composition path.
fn finish(problem: &Problem<'_>, x: Vec<f64>) -> Option<Candidate> {
    let amplitudes = problem.full(&x);
    let map = compose_with(&problem.cfg.oracle, problem.seq, &amplitudes).ok()?;
    let residuals = ns_residuals(&map).ok()?;
    let residual_norm = residuals[0].hypot(residuals[1]);
    if !(residual_norm < problem.cfg.newton_tol) {
        return None;
    }
    let probability = map.factors[0] * map.factors[0];
    let etas = amplitudes.iter().map(|t| t * t).collect();
    Some(Candidate {
        amplitudes,
        etas,
        residuals,
        residual_norm,
        probability,
    })
}

fn cluster(cands: Vec<Candidate>, radius: f64) -> Vec<Class> {
    let mut classes: Vec<Class> = Vec::new();
    for c in cands {
        let signs: Vec<bool> = c.amplitudes.iter().map(|t| *t < 0.0).collect();
        let hit = classes.iter_mut().find(|cl| {
            cl.best
                .etas
                .iter()
                .zip(&c.etas)
                .all(|(a, b)| (a - b).abs() <= radius)
        });
        match hit {
            Some(cl) => {
                if !cl.signs.contains(&signs) {
                    cl.signs.push(signs);
                }
                if c.residual_norm < cl.best.residual_norm {
                    cl.best = c;
                }
            }
            None => classes.push(Class {
                best: c,
                signs: vec![signs],
            }),
        }
    }
    classes
}

fn lex_cmp(a: &[f64], b: &[f64]) -> std::cmp::Ordering {
    a.iter()
        .zip(b)
        .map(|(x, y)| x.total_cmp(y))
        .find(|o| o.is_ne())
        .unwrap_or(std::cmp::Ordering::Equal)
}

/// Orders by probability, descending; runs of ties within
/// [`PROBABILITY_TIE`] are ordered by transmitivity vector.
pub(crate) fn order_by_probability<T>(
    items: &mut [T],
    prob: impl Fn(&T) -> f64,
    etas: impl Fn(&T) -> &[f64],
) {
    items.sort_by(|a, b| {
        prob(b)
            .total_cmp(&prob(a))
            .then_with(|| lex_cmp(etas(a), etas(b)))
    });
    let mut start = 0;
    while start < items.len() {
        let head = prob(&items[start]);
        let mut end = start + 1;
        while end < items.len() && head - prob(&items[end]) <= PROBABILITY_TIE {
            end += 1;
        }
        items[start..end].sort_by(|a, b| lex_cmp(etas(a), etas(b)));
        start = end;
    }
}

fn rank(seq: &SequenceSpec, classes: Vec<Class>) -> Vec<GateSolution> {
    let mut classes = classes;
    order_by_probability(&mut classes, |c| c.best.probability, |c| &c.best.etas);
    let count = classes.len();
    classes
        .into_iter()
        .enumerate()
        .map(|(i, cl)| {
            let c = cl.best;
            debug_assert!(
                c.probability > 0.0 && c.probability < 0.5,
                "P = {}",
                c.probability
            );
            GateSolution {
                sequence: seq.clone(),
                amplitudes: c.amplitudes,
                etas: c.etas,
                residuals: c.residuals,
                residual_norm: c.residual_norm,
                probability: c.probability,
                class_index: i + 1,
                class_count: count,
                gauge_count: cl.signs.len(),
            }
        })
        .collect()
}

/// One row of a configuration scan.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScanEntry {
    pub sequence: SequenceSpec,
    pub best: Option<GateSolution>,
    pub class_count: usize,
}

/// Every offset-valid, photon-neutral sequence of `length` elements with
/// `k, n ≤ max_k`. Sequences of photon-preserving elements are listed once,
/// in their canonical order.
pub fn enumerate_sequences(max_k: u32, length: usize) -> Vec<SequenceSpec> {
    fn extend(
        prefix: &mut Vec<(u32, u32)>,
        off: u32,
        left: usize,
        max_k: u32,
        out: &mut Vec<SequenceSpec>,
    ) {
        if left == 0 {
            if off == 0 {
                out.push(SequenceSpec::from_pairs(prefix));
            }
            return;
        }
        for k in 0..=max_k {
            for n in 0..=max_k.min(k + off) {
                prefix.push((k, n));
                extend(prefix, off + k - n, left - 1, max_k, out);
                prefix.pop();
            }
        }
    }
    let mut out = Vec::new();
    extend(&mut Vec::new(), 0, length, max_k, &mut out);
    out.retain(|s| s.canonical() == *s);
    out
}

/// Solves every sequence from [`enumerate_sequences`] and ranks them by their
/// best success probability. Sequences without a solution come last.
pub fn scan_sequences(max_k: u32, length: usize, cfg: &SolverConfig) -> Result<Vec<ScanEntry>> {
    if !(2..=3).contains(&length) {
        return Err(Error::Config(format!(
            "scan length must be 2 or 3, got {length}"
        )));
    }
    if max_k > 4 {
        return Err(Error::Config(format!(
            "scan photon bound must be at most 4, got {max_k}"
        )));
    }
    cfg.validate()?;
    let seqs = enumerate_sequences(max_k, length);
    let results: Vec<Result<ScanEntry>> = seqs
        .par_iter()
        .map(|s| {
            let sols = solve_ns(s, cfg)?;
            Ok(ScanEntry {
                sequence: s.clone(),
                class_count: sols.len(),
                best: sols.into_iter().next(),
            })
        })
        .collect();
    let mut entries = results.into_iter().collect::<Result<Vec<_>>>()?;
    entries.sort_by(|a, b| match (&a.best, &b.best) {
        (Some(x), Some(y)) => y
            .probability
            .total_cmp(&x.probability)
            .then_with(|| a.sequence.cmp(&b.sequence)),
        (Some(_), None) => std::cmp::Ordering::Less,
        (None, Some(_)) => std::cmp::Ordering::Greater,
        (None, None) => a.sequence.cmp(&b.sequence),
    });
    Ok(entries)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn seq(s: &str) -> SequenceSpec {
        s.parse().unwrap()
    }

    #[test]
    fn seed_grid_covers_both_signs() {
        let s = seeds(1, 3);
        assert_eq!(
            s,
            vec![
                vec![-0.75],
                vec![-0.5],
                vec![-0.25],
                vec![0.25],
                vec![0.5],
                vec![0.75]
            ]
        );
        assert_eq!(seeds(2, 41).len(), 82 * 82);
    }

    #[test]
    fn seed_cap_shrinks_density() {
        let cfg = SolverConfig {
            seed_cap: 1000,
            ..Default::default()
        };
        let g = cfg.axis_points(3);
        assert!((2 * g).pow(3) <= 1000);
        assert_eq!(cfg.axis_points(1), 41);
    }

    #[test]
    fn config_validation() {
        assert!(SolverConfig {
            grid: 4,
            ..Default::default()
        }
        .validate()
        .is_err());
        assert!(SolverConfig {
            newton_tol: 0.0,
            ..Default::default()
        }
        .validate()
        .is_err());
        assert!(SolverConfig::default().validate().is_ok());
    }

    #[test]
    fn rejects_non_gates() {
        let cfg = SolverConfig {
            grid: 5,
            ..Default::default()
        };
        assert_eq!(
            solve_ns(&seq("(1,0)"), &cfg).unwrap_err(),
            Error::NotAGate { net_offset: 1 }
        );
        assert!(matches!(
            solve_ns(&seq("(0,1),(1,0)"), &cfg),
            Err(Error::LossyBranch { .. })
        ));
    }

    #[test]
    fn single_keep_element_has_no_solution() {
        let cfg = SolverConfig {
            grid: 11,
            ..Default::default()
        };
        assert!(solve_ns(&seq("(1,1)"), &cfg).unwrap().is_empty());
    }

    #[test]
    fn tie_ordering_is_lexicographic() {
        let mut v = vec![
            (0.3, vec![0.9, 0.2]),
            (0.3 + 1e-12, vec![0.2, 0.9]),
            (0.4, vec![0.5, 0.5]),
        ];
        order_by_probability(&mut v, |x| x.0, |x| &x.1);
        assert_eq!(v[0].1, vec![0.5, 0.5]);
        assert_eq!(v[1].1, vec![0.2, 0.9]);
        assert_eq!(v[2].1, vec![0.9, 0.2]);
    }

    #[test]
    fn enumeration_is_offset_valid_and_neutral() {
        let all = enumerate_sequences(2, 2);
        assert!(all
            .iter()
            .all(|s| s.is_offset_valid() && s.net_offset() == 0));
        assert!(all.contains(&seq("(1,1),(0,0)")));
        assert!(!all.contains(&seq("(0,0),(1,1)")));
        assert!(all.contains(&seq("(1,0),(0,1)")));
        assert!(all.contains(&seq("(2,1),(0,1)")));
        assert!(!all.contains(&seq("(0,1),(1,0)")));
    }

    #[test]
    fn scan_rejects_bad_bounds() {
        let cfg = SolverConfig {
            grid: 5,
            ..Default::default()
        };
        assert!(scan_sequences(5, 2, &cfg).is_err());
        assert!(scan_sequences(2, 4, &cfg).is_err());
    }
}
