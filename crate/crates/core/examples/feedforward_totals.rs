//! Total success probability when the (1,0) error branch is rerouted into a
//! correction pair.

use nsgate::feedforward::feedforward_report;
use nsgate::{SequenceSpec, SolverConfig};

fn main() -> nsgate::Result<()> {
    let cfg = SolverConfig::default();
    let cases = [
        ("(1,1),(1,1)", 0.9197, "(1,2),(0,0)"),
        ("(1,1),(0,0)", 0.2265, "(1,1),(1,2)"),
    ];
    for (main, eta1, pair) in cases {
        let main: SequenceSpec = main.parse()?;
        let pair: SequenceSpec = pair.parse()?;
        if let Some(r) = feedforward_report(&main, eta1, &pair, &cfg)? {
            let extra = r.correction.as_ref().map_or(0.0, |c| c.probability);
            println!(
                "{main} + (1,0),{pair}: {:.5} + {:.5} = {:.5}",
                r.main.probability, extra, r.total
            );
        }
    }
    Ok(())
}
