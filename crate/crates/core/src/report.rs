//! Text, CSV and JSON rendering of solver results.
//!
//! Text output rounds to 6 significant digits. CSV and JSON keep full
//! precision (shortest round-trip form), so the same input always renders to
//! the same bytes.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::feedforward::{CorrectionTable, FeedForwardReport};
use crate::solver::{GateSolution, ScanEntry};
use crate::verify::OracleReport;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, clap::ValueEnum)]
pub enum Format {
    #[default]
    Text,
    Csv,
    Json,
}

/// `x` rounded to 6 significant digits.
pub fn sig6(x: f64) -> String {
    if x == 0.0 || !x.is_finite() {
        return format!("{x}");
    }
    let mag = x.abs().log10().floor() as i32;
    if !(-4..6).contains(&mag) {
        return format!("{x:.5e}");
    }
    format!("{x:.*}", (5 - mag).max(0) as usize)
}

fn csv_header(out: &mut String, columns: usize, extra: &[&str]) {
    out.push_str("sequence");
    for i in 1..=columns {
        let _ = write!(out, ",eta{i}");
    }
    out.push_str(",P,residual_norm,solution_class");
    for e in extra {
        let _ = write!(out, ",{e}");
    }
    out.push('\n');
}

fn csv_row(out: &mut String, s: &GateSolution, columns: usize) {
    let _ = write!(out, "\"{}\"", s.sequence);
    for i in 0..columns {
        match s.etas.get(i) {
            Some(e) => {
                let _ = write!(out, ",{e}");
            }
            None => out.push(','),
        }
    }
    let _ = write!(
        out,
        ",{},{:e},{}/{}",
        s.probability, s.residual_norm, s.class_index, s.class_count
    );
}

fn text_row(out: &mut String, s: &GateSolution) {
    let etas: Vec<String> = s.etas.iter().map(|e| sig6(*e)).collect();
    let _ = writeln!(
        out,
        "  class {}/{}  eta = ({})  P = {}  residual = {:.2e}",
        s.class_index,
        s.class_count,
        etas.join(", "),
        sig6(s.probability),
        s.residual_norm
    );
}

fn json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("report types serialize");
    s.push('\n');
    s
}

/// All classes found for one sequence.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolveOutput {
    pub sequence: crate::sequence::SequenceSpec,
    pub solutions: Vec<GateSolution>,
}

pub fn render_solutions(out: &SolveOutput, format: Format) -> String {
    match format {
        Format::Json => json(out),
        Format::Csv => {
            let mut s = String::new();
            let w = out.sequence.len();
            csv_header(&mut s, w, &[]);
            for sol in &out.solutions {
                csv_row(&mut s, sol, w);
                s.push('\n');
            }
            s
        }
        Format::Text => {
            let mut s = format!(
                "{}: {} solution class(es)\n",
                out.sequence,
                out.solutions.len()
            );
            for sol in &out.solutions {
                text_row(&mut s, sol);
            }
            s
        }
    }
}

pub fn render_scan(entries: &[ScanEntry], format: Format) -> String {
    match format {
        Format::Json => json(&entries),
        Format::Csv => {
            let mut s = String::new();
            let w = entries.iter().map(|e| e.sequence.len()).max().unwrap_or(0);
            csv_header(&mut s, w, &[]);
            for e in entries {
                match &e.best {
                    Some(b) => csv_row(&mut s, b, w),
                    None => {
                        let _ = write!(s, "\"{}\"{},,,0/0", e.sequence, ",".repeat(w));
                    }
                }
                s.push('\n');
            }
            s
        }
        Format::Text => {
            let mut s = String::new();
            let solved = entries.iter().filter(|e| e.best.is_some()).count();
            let _ = writeln!(s, "{} sequences, {} with solutions", entries.len(), solved);
            for (rank, e) in entries.iter().enumerate() {
                match &e.best {
                    Some(b) => {
                        let etas: Vec<String> = b.etas.iter().map(|x| sig6(*x)).collect();
                        let _ = writeln!(
                            s,
                            "{:>4}  {:<24} P = {:<10} eta = ({})  classes = {}",
                            rank + 1,
                            e.sequence.to_string(),
                            sig6(b.probability),
                            etas.join(", "),
                            e.class_count
                        );
                    }
                    None => {
                        let _ = writeln!(
                            s,
                            "{:>4}  {:<24} no solution",
                            rank + 1,
                            e.sequence.to_string()
                        );
                    }
                }
            }
            s
        }
    }
}

pub fn render_table(table: &CorrectionTable, format: Format) -> String {
    match format {
        Format::Json => json(table),
        Format::Csv => {
            let mut s = String::new();
            csv_header(&mut s, 3, &[]);
            for r in &table.rows {
                csv_row(&mut s, r, 3);
                s.push('\n');
            }
            s
        }
        Format::Text => {
            let mut s = String::new();
            let _ = writeln!(
                s,
                "correction solutions with P >= 1e-4: {}",
                table.rows.len()
            );
            for r in &table.rows {
                let _ = write!(s, "{}", r.sequence);
                text_row(&mut s, r);
            }
            let _ = writeln!(s, "\nreference rows:");
            for c in &table.references {
                let pair = c.reference.chain();
                let r = &c.reference;
                let head = format!(
                    "{pair}  eta = ({}, {}, {})  P = {}",
                    sig6(r.etas[0]),
                    sig6(r.etas[1]),
                    sig6(r.etas[2]),
                    sig6(r.probability)
                );
                match (&c.nearest, c.deltas) {
                    (Some(n), Some(d)) => {
                        let _ = writeln!(
                            s,
                            "  {head}\n    nearest eta = ({}, {}, {})  P = {}  delta = ({:+.2e}, {:+.2e}, {:+.2e})  {}",
                            sig6(n.etas[0]),
                            sig6(n.etas[1]),
                            sig6(n.etas[2]),
                            sig6(n.probability),
                            d[0],
                            d[1],
                            d[2],
                            if c.within_tolerance { "match" } else { "MISMATCH" }
                        );
                    }
                    _ => {
                        let _ = writeln!(s, "  {head}\n    no computed solution  MISMATCH");
                    }
                }
            }
            s
        }
    }
}

pub fn render_feedforward(reports: &[FeedForwardReport], format: Format) -> String {
    match format {
        Format::Json => json(&reports),
        Format::Csv => {
            // one row per branch; the total is repeated on both
            let mut s = String::new();
            csv_header(&mut s, 3, &["total"]);
            for r in reports {
                for b in std::iter::once(&r.main).chain(r.correction.as_ref()) {
                    csv_row(&mut s, b, 3);
                    let _ = writeln!(s, ",{}", r.total);
                }
            }
            s
        }
        Format::Text => {
            let mut s = String::new();
            for r in reports {
                let m = &r.main;
                let _ = writeln!(
                    s,
                    "{} eta1 = {}  P = {}",
                    m.sequence,
                    sig6(m.etas[0]),
                    sig6(m.probability)
                );
                match &r.correction {
                    Some(c) => {
                        let etas: Vec<String> = c.etas.iter().map(|x| sig6(*x)).collect();
                        let _ = writeln!(
                            s,
                            "  + {}  eta = ({})  P = {}\n  total = {}",
                            c.sequence,
                            etas.join(", "),
                            sig6(c.probability),
                            sig6(r.total)
                        );
                    }
                    None => {
                        let _ = writeln!(s, "  no correction\n  total = {}", sig6(r.total));
                    }
                }
            }
            s
        }
    }
}

pub fn render_oracle(report: &OracleReport, format: Format) -> String {
    match format {
        Format::Json => json(report),
        Format::Csv => {
            let mut s = String::from("suite,checks,failures,max_error\n");
            for r in &report.suites {
                let _ = writeln!(
                    s,
                    "\"{}\",{},{},{}",
                    r.name, r.checks, r.failures, r.max_error
                );
            }
            s
        }
        Format::Text => {
            let mut s = String::new();
            for r in &report.suites {
                let status = if r.passed() { "ok" } else { "FAILED" };
                let _ = writeln!(
                    s,
                    "{:<26} {:>6} checks  max error {:.2e}  {status}",
                    r.name, r.checks, r.max_error
                );
                if let Some(f) = &r.first_failure {
                    let _ = writeln!(s, "    first failure: {f}");
                }
            }
            s
        }
    }
}
