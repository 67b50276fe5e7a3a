//! Command-line front end.

use std::io::Write;

use clap::{Parser, Subcommand};

use crate::error::{Error, Result};
use crate::feedforward::{feedforward_reports, table1_report};
use crate::fock::Oracle;
use crate::report::{
    render_feedforward, render_oracle, render_scan, render_solutions, render_table, Format,
    SolveOutput,
};
use crate::sequence::SequenceSpec;
use crate::solver::{scan_sequences, solve_ns, SolverConfig};
use crate::verify::run_oracle_suites;

#[derive(Debug, Clone, Parser)]
#[command(
    name = "nsgate",
    version,
    about = "Heralded nonlinear sign gates from beam-splitter chains"
)]
pub struct RunConfig {
    #[arg(long, global = true, value_enum, default_value_t = Format::Text)]
    pub format: Format,
    /// Seed magnitudes per free amplitude (each used with both signs).
    #[arg(long, global = true, default_value_t = 41)]
    pub grid: usize,
    /// Residual norm a Newton run must reach.
    #[arg(long, global = true, default_value_t = 1e-10)]
    pub tol: f64,
    /// Worker threads; defaults to all cores.
    #[arg(long, global = true)]
    pub workers: Option<usize>,
    #[arg(long, global = true, default_value_t = 200_000)]
    pub seed_cap: usize,
    #[arg(long, global = true, default_value_t = 12)]
    pub photon_cap: u32,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Subcommand)]
pub enum Command {
    /// Check the Fock oracle against closed forms and conservation laws.
    VerifyOracle,
    /// Find every NS solution class of one sequence, e.g. "(1,1),(0,0)".
    Solve {
        #[arg(long)]
        sequence: String,
    },
    /// Solve every photon-neutral sequence and rank by success probability.
    Scan {
        #[arg(long, default_value_t = 2)]
        length: usize,
        #[arg(long, default_value_t = 4)]
        max_k: u32,
    },
    /// Correction solutions after the (1,0) error outcome.
    Table1,
    /// Main gate plus correction branch totals.
    Feedforward,
}

impl RunConfig {
    pub fn solver_config(&self) -> Result<SolverConfig> {
        let cfg = SolverConfig {
            grid: self.grid,
            newton_tol: self.tol,
            seed_cap: self.seed_cap,
            oracle: Oracle {
                photon_cap: self.photon_cap,
            },
            ..SolverConfig::default()
        };
        cfg.validate()?;
        Ok(cfg)
    }
}

/// Runs one command, writing the report to `out`. Returns the process exit
/// code: 0 on success, 1 when a verification suite fails.
pub fn run(config: &RunConfig, out: &mut dyn Write) -> Result<i32> {
    let cfg = config.solver_config()?;
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(w) = config.workers {
        if w == 0 {
            return Err(Error::Config("workers must be positive".into()));
        }
        builder = builder.num_threads(w);
    }
    let pool = builder.build().map_err(|e| Error::Config(e.to_string()))?;
    let (text, code) = pool.install(|| execute(config, &cfg))?;
    out.write_all(text.as_bytes())
        .map_err(|e| Error::Config(format!("write failed: {e}")))?;
    Ok(code)
}

fn execute(config: &RunConfig, cfg: &SolverConfig) -> Result<(String, i32)> {
    let format = config.format;
    Ok(match &config.command {
        Command::VerifyOracle => {
            let report = run_oracle_suites(&cfg.oracle)?;
            let code = if report.passed() { 0 } else { 1 };
            (render_oracle(&report, format), code)
        }
        Command::Solve { sequence } => {
            let sequence: SequenceSpec = sequence.parse()?;
            let solutions = solve_ns(&sequence, cfg)?;
            (
                render_solutions(
                    &SolveOutput {
                        sequence,
                        solutions,
                    },
                    format,
                ),
                0,
            )
        }
        Command::Scan { length, max_k } => (
            render_scan(&scan_sequences(*max_k, *length, cfg)?, format),
            0,
        ),
        Command::Table1 => (render_table(&table1_report(cfg)?, format), 0),
        Command::Feedforward => (render_feedforward(&feedforward_reports(cfg)?, format), 0),
    })
}
