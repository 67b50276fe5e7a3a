//! Two-mode beam-splitter amplitudes and the conditional map they induce.

use nsgate::fock::{BeamSplitter, ModeState, Oracle};

fn main() -> nsgate::Result<()> {
    let oracle = Oracle::default();
    let bs = BeamSplitter::from_eta(0.5)?;

    // Hong-Ou-Mandel: |1,1> never leaves as |1,1> on a balanced splitter
    let hom = oracle.amplitude(1, 1, 1, 1, &bs)?;
    println!("<1,1|U|1,1> at eta = 0.5: {:.3e}", hom.value.abs());

    for n in 0..=1 {
        let m = oracle.conditional_map(0, 1, n, &bs)?;
        println!(
            "inject 1, detect {n}: factors {:?}, offset {} -> {}, removed phase i^{}",
            m.factors, m.input_offset, m.output_offset, m.removed_phase_power
        );
    }

    let state = ModeState::new(1.0, 1.0, 1.0).normalized();
    let keep = oracle.conditional_map(0, 1, 1, &bs)?;
    println!(
        "heralding probability of (1,1) on a uniform state: {:.6}",
        keep.branch_probability(&state)?
    );
    Ok(())
}
