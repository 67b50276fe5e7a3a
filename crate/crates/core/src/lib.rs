// `!(x < tol)` rejects NaN as well; that is the intent wherever it appears.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod closed_form;
pub mod error;
pub mod feedforward;
pub mod fock;
pub mod report;
pub mod sequence;
pub mod solver;
pub mod verify;

pub use error::{Error, Result};
pub use fock::{BeamSplitter, ConditionalMap, ModeState, Oracle};
pub use sequence::{ComposedMap, ElementSpec, SequenceSpec};
pub use solver::{solve_ns, GateSolution, SolverConfig};
