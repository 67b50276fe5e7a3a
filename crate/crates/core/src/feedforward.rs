//! Feed-forward correction of the `(1,0)` error at the first splitter.
//!
//! A two-element NS gate that starts with `(1,1)` fails when the first
//! detector reports zero photons: the injected photon has been added to the
//! signal beam. That branch is routed into a correction pair which must
//! remove one photon again. The full error-then-correct chain is a three
//! element sequence `[(1,0), pair...]` whose first amplitude is fixed by the
//! main gate, and its heralding probability adds to the main gate's, since the
//! two first-detector outcomes are disjoint.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::sequence::{ElementSpec, SequenceSpec};
use crate::solver::{solve_ns, solve_ns_frozen, GateSolution, SolverConfig};

/// The error outcome at the first splitter.
pub const ERROR_ELEMENT: ElementSpec = ElementSpec::new(1, 0);

/// Solutions below this probability are left out of the correction table.
pub const APPRECIABLE_PROBABILITY: f64 = 1e-4;

/// Two-element correction pairs that remove one photon with at most one
/// auxiliary photon per splitter.
pub const CANDIDATE_PAIRS: [[(u32, u32); 2]; 8] = [
    [(0, 1), (0, 0)],
    [(0, 1), (1, 1)],
    [(1, 2), (0, 0)],
    [(1, 2), (1, 1)],
    [(0, 0), (0, 1)],
    [(1, 1), (0, 1)],
    [(0, 0), (1, 2)],
    [(1, 1), (1, 2)],
];

/// First-splitter transmitivities of the two-element gates with `(1,1)` first.
pub const FIRST_SPLITTER_ETAS: [f64; 3] = [0.2265, 0.9197, 0.2275];

/// Literature values for three-splitter corrections, as printed to four
/// decimals: correction pair, then `η1, η2, η3, P`.
pub const REFERENCE_ROWS: [ReferenceRow; 7] = [
    ReferenceRow::new([(0, 1), (1, 1)], [0.9197, 0.2947, 0.2567], 0.0145),
    ReferenceRow::new([(1, 2), (0, 0)], [0.9197, 0.1472, 0.5137], 0.0202),
    ReferenceRow::new([(1, 2), (1, 1)], [0.9197, 0.1511, 0.8398], 0.0173),
    ReferenceRow::new([(0, 0), (1, 2)], [0.9197, 0.5137, 0.1472], 0.0104),
    ReferenceRow::new([(1, 1), (0, 1)], [0.9197, 0.6500, 0.4182], 0.0042),
    ReferenceRow::new([(1, 1), (1, 2)], [0.2265, 0.3315, 0.0531], 0.0088),
    ReferenceRow::new([(1, 1), (1, 2)], [0.9197, 0.8690, 0.1766], 0.0127),
];

/// Tolerances used when comparing against [`REFERENCE_ROWS`].
pub const REFERENCE_ETA_TOL: f64 = 1e-3;
pub const REFERENCE_P_TOL: f64 = 5e-4;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReferenceRow {
    pub pair: [(u32, u32); 2],
    pub etas: [f64; 3],
    pub probability: f64,
}

impl ReferenceRow {
    pub const fn new(pair: [(u32, u32); 2], etas: [f64; 3], probability: f64) -> Self {
        Self {
            pair,
            etas,
            probability,
        }
    }

    pub fn chain(&self) -> SequenceSpec {
        correction_chain(&SequenceSpec::from_pairs(&self.pair))
    }
}

fn correction_chain(pair: &SequenceSpec) -> SequenceSpec {
    SequenceSpec::new(vec![ERROR_ELEMENT]).concat(pair)
}

/// Correction pair applied after the error at a fixed first splitter.
#[derive(Debug, Clone, PartialEq)]
pub struct CorrectionProblem {
    pub eta1: f64,
    pub pair: SequenceSpec,
}

impl CorrectionProblem {
    pub fn new(eta1: f64, pair: SequenceSpec) -> Result<Self> {
        if !(eta1 > 0.0 && eta1 < 1.0) {
            return Err(Error::EtaDomain { eta: eta1 });
        }
        let net = pair.net_offset();
        if pair.len() != 2 || net != -1 || !correction_chain(&pair).is_offset_valid() {
            return Err(Error::NotACorrection {
                pair: pair.to_string(),
                net_offset: net,
            });
        }
        Ok(Self { eta1, pair })
    }

    /// `[(1,0), pair...]`
    pub fn chain(&self) -> SequenceSpec {
        correction_chain(&self.pair)
    }
}

/// NS solutions of the error-then-correct chain with the first amplitude
/// frozen at `+sqrt(eta1)`.
pub fn correction_search(
    problem: &CorrectionProblem,
    cfg: &SolverConfig,
) -> Result<Vec<GateSolution>> {
    let frozen = [Some(problem.eta1.sqrt()), None, None];
    solve_ns_frozen(&problem.chain(), &frozen, cfg)
}

/// Main gate plus (optionally) its correction branch.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeedForwardReport {
    pub main: GateSolution,
    pub correction: Option<GateSolution>,
    pub total: f64,
}

/// Adds the probabilities of the two disjoint first-detector outcomes.
pub fn total_gate_probability(
    main: &GateSolution,
    correction: Option<&GateSolution>,
) -> Result<FeedForwardReport> {
    let main_seq = &main.sequence;
    if main_seq.len() != 2
        || main_seq.elements[0] != ElementSpec::new(1, 1)
        || main_seq.net_offset() != 0
    {
        return Err(Error::Config(format!(
            "main branch must be a two-element gate starting with (1,1), got {main_seq}"
        )));
    }
    let mut total = main.probability;
    if let Some(c) = correction {
        if c.sequence.elements.first() != Some(&ERROR_ELEMENT) {
            return Err(Error::Config(format!(
                "correction branch must start with {ERROR_ELEMENT}, got {}",
                c.sequence
            )));
        }
        if (c.etas[0] - main.etas[0]).abs() > 1e-9 {
            return Err(Error::IncompatibleBranches {
                main_eta: main.etas[0],
                correction_eta: c.etas[0],
            });
        }
        total += c.probability;
    }
    Ok(FeedForwardReport {
        main: main.clone(),
        correction: correction.cloned(),
        total,
    })
}

/// Solves the main gate, picks the class whose first transmitivity is
/// closest to `eta1_hint`, and attaches the best correction through `pair`
/// with the first splitter frozen at exactly that class's value.
pub fn feedforward_report(
    main_seq: &SequenceSpec,
    eta1_hint: f64,
    pair: &SequenceSpec,
    cfg: &SolverConfig,
) -> Result<Option<FeedForwardReport>> {
    let mains = solve_ns(main_seq, cfg)?;
    let Some(main) = mains.into_iter().min_by(|a, b| {
        (a.etas[0] - eta1_hint)
            .abs()
            .total_cmp(&(b.etas[0] - eta1_hint).abs())
    }) else {
        return Ok(None);
    };
    let problem = CorrectionProblem::new(main.etas[0], pair.clone())?;
    let corrections = correction_search(&problem, cfg)?;
    total_gate_probability(&main, corrections.first()).map(Some)
}

/// The main gates considered for feed-forward, each with the first-splitter
/// transmitivity that selects its solution class.
pub fn feedforward_mains() -> Vec<(SequenceSpec, f64)> {
    vec![
        (
            SequenceSpec::from_pairs(&[(1, 1), (0, 0)]),
            FIRST_SPLITTER_ETAS[0],
        ),
        (
            SequenceSpec::from_pairs(&[(1, 1), (1, 1)]),
            FIRST_SPLITTER_ETAS[1],
        ),
        (
            SequenceSpec::from_pairs(&[(1, 1), (1, 1)]),
            FIRST_SPLITTER_ETAS[2],
        ),
    ]
}

/// Every main gate from [`feedforward_mains`] against every candidate pair
/// that corrects it.
pub fn feedforward_reports(cfg: &SolverConfig) -> Result<Vec<FeedForwardReport>> {
    let jobs: Vec<(SequenceSpec, f64, SequenceSpec)> = feedforward_mains()
        .into_iter()
        .flat_map(|(m, eta)| {
            CANDIDATE_PAIRS
                .iter()
                .map(move |p| (m.clone(), eta, SequenceSpec::from_pairs(p)))
        })
        .collect();
    let out: Vec<Result<Option<FeedForwardReport>>> = jobs
        .par_iter()
        .map(|(m, eta, p)| feedforward_report(m, *eta, p, cfg))
        .collect();
    let all: Vec<FeedForwardReport> = out
        .into_iter()
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .flatten()
        .collect();
    // pairs that cannot correct are dropped unless the main gate has none at all
    let mut kept: Vec<FeedForwardReport> = Vec::new();
    for r in all {
        let same_main = |k: &FeedForwardReport| {
            k.main.sequence == r.main.sequence && k.main.etas == r.main.etas
        };
        match kept.iter().position(same_main) {
            Some(i) if kept[i].correction.is_none() => kept[i] = r,
            Some(_) if r.correction.is_none() => {}
            _ => kept.push(r),
        }
    }
    Ok(kept)
}

/// Comparison of one computed solution with a reference row.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReferenceComparison {
    pub reference: ReferenceRow,
    /// Closest computed solution by transmitivities, if any.
    pub nearest: Option<GateSolution>,
    /// `computed - reference` for `η2, η3, P`.
    pub deltas: Option<[f64; 3]>,
    pub within_tolerance: bool,
}

impl ReferenceComparison {
    pub fn compare(reference: ReferenceRow, solutions: &[GateSolution]) -> Self {
        let nearest = solutions
            .iter()
            .min_by(|a, b| {
                let da = (a.etas[1] - reference.etas[1])
                    .abs()
                    .max((a.etas[2] - reference.etas[2]).abs());
                let db = (b.etas[1] - reference.etas[1])
                    .abs()
                    .max((b.etas[2] - reference.etas[2]).abs());
                da.total_cmp(&db)
            })
            .cloned();
        let deltas = nearest.as_ref().map(|s| {
            [
                s.etas[1] - reference.etas[1],
                s.etas[2] - reference.etas[2],
                s.probability - reference.probability,
            ]
        });
        let within_tolerance = deltas.is_some_and(|d| {
            d[0].abs() <= REFERENCE_ETA_TOL
                && d[1].abs() <= REFERENCE_ETA_TOL
                && d[2].abs() <= REFERENCE_P_TOL
        });
        Self {
            reference,
            nearest,
            deltas,
            within_tolerance,
        }
    }
}

/// Correction table: every appreciable solution for every candidate pair and
/// first-splitter value, plus the comparison with the reference rows.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorrectionTable {
    pub rows: Vec<GateSolution>,
    pub references: Vec<ReferenceComparison>,
}

pub fn table1_report(cfg: &SolverConfig) -> Result<CorrectionTable> {
    let problems: Vec<CorrectionProblem> = FIRST_SPLITTER_ETAS
        .iter()
        .flat_map(|&eta| {
            CANDIDATE_PAIRS
                .iter()
                .map(move |p| CorrectionProblem::new(eta, SequenceSpec::from_pairs(p)))
        })
        .collect::<Result<_>>()?;
    let solved: Vec<Result<Vec<GateSolution>>> = problems
        .par_iter()
        .map(|p| correction_search(p, cfg))
        .collect();
    let solved = solved.into_iter().collect::<Result<Vec<_>>>()?;

    let mut rows = Vec::new();
    for sols in &solved {
        rows.extend(
            sols.iter()
                .filter(|s| s.probability >= APPRECIABLE_PROBABILITY)
                .cloned(),
        );
    }
    let references = REFERENCE_ROWS
        .iter()
        .map(|r| {
            let pair = SequenceSpec::from_pairs(&r.pair);
            let sols = problems
                .iter()
                .zip(&solved)
                .find(|(p, _)| p.pair == pair && p.eta1 == r.etas[0])
                .map(|(_, s)| s.as_slice())
                .unwrap_or(&[]);
            ReferenceComparison::compare(*r, sols)
        })
        .collect();
    Ok(CorrectionTable { rows, references })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn problem_validation() {
        let ok =
            CorrectionProblem::new(0.9197, SequenceSpec::from_pairs(&[(1, 2), (0, 0)])).unwrap();
        assert_eq!(ok.chain().to_string(), "(1,0),(1,2),(0,0)");
        for bad in [&[(1, 1), (0, 0)][..], &[(0, 2), (0, 0)][..], &[(0, 1)][..]] {
            assert!(matches!(
                CorrectionProblem::new(0.5, SequenceSpec::from_pairs(bad)),
                Err(Error::NotACorrection { .. })
            ));
        }
        assert!(CorrectionProblem::new(1.0, SequenceSpec::from_pairs(&[(0, 1), (0, 0)])).is_err());
    }

    #[test]
    fn candidate_pairs_are_corrections() {
        for p in CANDIDATE_PAIRS {
            assert!(
                CorrectionProblem::new(0.5, SequenceSpec::from_pairs(&p)).is_ok(),
                "{p:?}"
            );
        }
        for r in REFERENCE_ROWS {
            assert!(CANDIDATE_PAIRS.contains(&r.pair));
            assert!(FIRST_SPLITTER_ETAS.contains(&r.etas[0]));
        }
    }

    fn fake(seq: &str, etas: Vec<f64>, p: f64) -> GateSolution {
        GateSolution {
            sequence: seq.parse().unwrap(),
            amplitudes: etas.iter().map(|e| e.sqrt()).collect(),
            etas,
            residuals: [0.0; 2],
            residual_norm: 0.0,
            probability: p,
            class_index: 1,
            class_count: 1,
            gauge_count: 1,
        }
    }

    #[test]
    fn totals_add_disjoint_branches() {
        let main = fake("(1,1),(1,1)", vec![0.9197, 0.2275], 0.209);
        let corr = fake("(1,0),(1,2),(0,0)", vec![0.9197, 0.1472, 0.5137], 0.0202);
        let rep = total_gate_probability(&main, Some(&corr)).unwrap();
        assert!((rep.total - 0.2292).abs() < 1e-12);
        let alone = total_gate_probability(&main, None).unwrap();
        assert_eq!(alone.total, 0.209);
    }

    #[test]
    fn totals_reject_mismatched_first_splitter() {
        let main = fake("(1,1),(0,0)", vec![0.2265, 0.757], 0.2265);
        let corr = fake("(1,0),(1,1),(1,2)", vec![0.2275, 0.33, 0.05], 0.0088);
        assert!(matches!(
            total_gate_probability(&main, Some(&corr)),
            Err(Error::IncompatibleBranches { .. })
        ));
        let wrong_main = fake("(0,0),(1,1)", vec![0.757, 0.2265], 0.2265);
        assert!(total_gate_probability(&wrong_main, None).is_err());
        let wrong_corr = fake("(1,1),(1,2),(0,1)", vec![0.2265, 0.3, 0.3], 0.01);
        assert!(total_gate_probability(&main, Some(&wrong_corr)).is_err());
    }

    #[test]
    fn reference_comparison_picks_nearest() {
        let r = REFERENCE_ROWS[1];
        let sols = vec![
            fake("(1,0),(1,2),(0,0)", vec![0.9197, 0.5, 0.5], 0.01),
            fake("(1,0),(1,2),(0,0)", vec![0.9197, 0.1471, 0.5139], 0.0203),
        ];
        let c = ReferenceComparison::compare(r, &sols);
        assert!(c.within_tolerance);
        assert_eq!(c.nearest.unwrap().etas[1], 0.1471);
        let none = ReferenceComparison::compare(r, &[]);
        assert!(!none.within_tolerance && none.deltas.is_none());
    }
}
