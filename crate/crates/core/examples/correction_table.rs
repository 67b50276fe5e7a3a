//! Correction chains after the (1,0) error outcome, compared with the
//! reference rows.

use nsgate::feedforward::table1_report;
use nsgate::SolverConfig;

fn main() -> nsgate::Result<()> {
    let table = table1_report(&SolverConfig::default())?;
    for c in &table.references {
        let status = if c.within_tolerance {
            "match"
        } else {
            "mismatch"
        };
        let deltas = c.deltas.map_or("none".into(), |d| {
            format!("({:+.1e}, {:+.1e}, {:+.1e})", d[0], d[1], d[2])
        });
        println!(
            "{}  eta1 = {}  deltas = {deltas}  {status}",
            c.reference.chain(),
            c.reference.etas[0]
        );
    }
    Ok(())
}
