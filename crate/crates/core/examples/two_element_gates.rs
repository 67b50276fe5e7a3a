//! Nonlinear sign gates from two heralded splitters.

use nsgate::{solve_ns, SequenceSpec, SolverConfig};

fn main() -> nsgate::Result<()> {
    let cfg = SolverConfig::default();
    for text in ["(1,1),(0,0)", "(1,1),(1,1)", "(1,0),(0,1)"] {
        let seq: SequenceSpec = text.parse()?;
        let sols = solve_ns(&seq, &cfg)?;
        println!("{seq}: {} class(es)", sols.len());
        for s in &sols {
            println!(
                "  eta = {:.5?}  P = {:.5}  residual = {:.1e}",
                s.etas, s.probability, s.residual_norm
            );
        }
    }
    Ok(())
}
