//! Command-line front end: JSON problem specs in, JSON and CSV results out.
//!
//! Each `cmd_*` function writes its files and then reports; a failed check
//! (non-monotone sweep, oracle beating the solver, a comparison claim that
//! does not hold) still leaves the files on disk for inspection.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod output;
pub mod run;
pub mod spec;

use std::path::{Path, PathBuf};

use coarse_core::analysis::ComparisonKind;

pub use error::{CliError, Result};
pub use run::{Route, SolutionDoc};
pub use spec::{load_spec, parse_spec, Overrides, ProblemSpec, SeedFrom};

use crate::run::ORACLE_TOL;

pub struct Outcome {
    pub files: Vec<PathBuf>,
    pub summary: String,
}

pub fn cmd_solve(spec_path: &Path, out_dir: &Path, ov: &Overrides) -> Result<Outcome> {
    let spec = load_spec(spec_path)?;
    let doc = run::solve_spec(&spec, ov)?;
    let files = output::write_solution(out_dir, &doc)?;
    let summary = format!(
        "{:?} N={} structure {} payoff {} max residual {:.3e}",
        doc.route, doc.n, doc.structure, doc.payoff, doc.max_residual
    );
    Ok(Outcome { files, summary })
}

pub fn cmd_pricing(spec_path: &Path, out_dir: &Path, ov: &Overrides) -> Result<Outcome> {
    let spec = load_spec(spec_path)?;
    if spec.pricing_instance()?.is_none() {
        return Err(CliError::validation("mode", "pricing needs a pricing mode"));
    }
    let doc = run::solve_spec(&spec, ov)?;
    let files = output::write_solution(out_dir, &doc)?;
    let excl = doc.menu.as_ref().map_or(0.0, |m| m.exclusion_type);
    Ok(Outcome { files, summary: format!("profit {} exclusion below type {}", doc.payoff, excl) })
}

pub fn cmd_sweep(spec_path: &Path, from: usize, to: usize, out_dir: &Path, ov: &Overrides) -> Result<Outcome> {
    let spec = load_spec(spec_path)?;
    let rows = run::sweep(&spec, ov, from, to)?;
    let files = output::write_sweep(out_dir, &rows)?;
    if let Some(n) = run::sweep_violation(&rows) {
        return Err(CliError::Certification(format!("convex payoff fell at N = {n}")));
    }
    let payoffs: Vec<String> = rows.iter().map(|r| format!("{:.6}", r.payoff)).collect();
    Ok(Outcome { files, summary: format!("payoffs {}", payoffs.join(" ")) })
}

pub fn cmd_compare(
    base: &Path,
    shifted: &Path,
    kind: ComparisonKind,
    out_dir: &Path,
    ov: &Overrides,
) -> Result<Outcome> {
    let b = load_spec(base)?;
    let s = load_spec(shifted)?;
    let report = run::compare(&b, &s, kind, ov)?;
    let files = output::write_compare(out_dir, &report, b.domain())?;
    if report.holds == Some(false) {
        return Err(CliError::Certification(format!(
            "{kind:?} pattern fails: {} sign changes, orientation {:?}",
            report.sign_changes, report.orientation
        )));
    }
    let verdict = match report.holds {
        Some(true) => "holds",
        _ => "precondition not met, no claim",
    };
    Ok(Outcome {
        files,
        summary: format!(
            "{kind:?}: {verdict}; {} sign changes, orientation {:?}",
            report.sign_changes, report.orientation
        ),
    })
}

pub fn cmd_oracle(spec_path: &Path, grid: Option<usize>, out_dir: &Path, ov: &Overrides) -> Result<Outcome> {
    let spec = load_spec(spec_path)?;
    let doc = run::oracle(&spec, ov, grid)?;
    let files = output::write_oracle(out_dir, &doc)?;
    if doc.gap > ORACLE_TOL {
        return Err(CliError::Certification(format!("oracle beats the solver by {:.3e}", doc.gap)));
    }
    Ok(Outcome {
        files,
        summary: format!(
            "grid {}: solver {} ({}), oracle {} ({}), gap {:.3e}",
            doc.grid, doc.solver.payoff, doc.solver.structure, doc.oracle.payoff, doc.oracle.structure, doc.gap
        ),
    })
}
