//! Closed-form maps for the four photon-number families, checked against the
//! Fock oracle.

use nsgate::closed_form::{map_add, map_keep, map_keep_offset1, map_remove};
use nsgate::fock::{BeamSplitter, Oracle};

fn main() -> nsgate::Result<()> {
    let oracle = Oracle::default();
    let eta = 0.3;
    let bs = BeamSplitter::from_eta(eta)?;
    let k = 2;
    let cases = [
        (
            "keep",
            map_keep(k, eta)?,
            oracle.conditional_map(0, k, k, &bs)?,
        ),
        (
            "add",
            map_add(k, eta)?,
            oracle.conditional_map(0, k, k - 1, &bs)?,
        ),
        (
            "remove",
            map_remove(k, eta)?,
            oracle.conditional_map(1, k, k + 1, &bs)?,
        ),
        (
            "keep, one extra photon",
            map_keep_offset1(k, eta)?,
            oracle.conditional_map(1, k, k, &bs)?,
        ),
    ];
    for (name, closed, exact) in cases {
        let diff = closed
            .factors
            .iter()
            .zip(exact.factors)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        println!(
            "{name:<24} {:?}  max |closed - oracle| = {diff:.1e}",
            closed.factors
        );
    }
    Ok(())
}
