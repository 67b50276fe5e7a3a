//! Ranks every photon-neutral two-splitter sequence with up to two photons
//! per ancilla.

use nsgate::solver::scan_sequences;
use nsgate::SolverConfig;

fn main() -> nsgate::Result<()> {
    let entries = scan_sequences(2, 2, &SolverConfig::default())?;
    for e in &entries {
        match &e.best {
            Some(b) => println!(
                "{:<14} P = {:.5}  eta = {:.4?}",
                e.sequence.to_string(),
                b.probability,
                b.etas
            ),
            None => println!("{:<14} no NS solution", e.sequence.to_string()),
        }
    }
    Ok(())
}
