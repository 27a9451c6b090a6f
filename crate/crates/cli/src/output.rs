//! JSON and CSV emission.
//!
//! Solution CSV columns: `k, s_km1, s_k, x_k, mass, width`. Pricing CSV
//! columns: `k, s_km1, s_k, x_k, q_k, p_k, mass`. Plot CSV: `position, type`
//! with type `cutoff` or `signal`, in ladder order.

use std::fs;
use std::path::{Path, PathBuf};

use coarse_core::analysis::ComparisonReport;
use serde::Serialize;

use crate::error::{CliError, Result};
use crate::run::{OracleDoc, SolutionDoc, SweepRow};

fn num(v: f64) -> String {
    format!("{v}")
}

fn write_bytes(path: &Path, bytes: Vec<u8>) -> Result<()> {
    fs::write(path, bytes).map_err(|source| CliError::Write { path: path.into(), source })
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut bytes = serde_json::to_vec_pretty(value)?;
    bytes.push(b'\n');
    write_bytes(path, bytes)
}

fn write_csv(path: &Path, header: &[&str], rows: Vec<Vec<String>>) -> Result<()> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header)?;
    for r in rows {
        w.write_record(&r)?;
    }
    let bytes = w.into_inner().map_err(|e| CliError::Write { path: path.into(), source: e.into_error() })?;
    write_bytes(path, bytes)
}

pub fn ensure_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(|source| CliError::Write { path: dir.into(), source })
}

pub fn solution_rows(doc: &SolutionDoc) -> (Vec<&'static str>, Vec<Vec<String>>) {
    if let Some(menu) = &doc.menu {
        let rows = menu
            .items
            .iter()
            .map(|i| {
                vec![i.k.to_string(), num(i.lower), num(i.upper), num(i.x), num(i.quality), num(i.price), num(i.mass)]
            })
            .collect();
        return (vec!["k", "s_km1", "s_k", "x_k", "q_k", "p_k", "mass"], rows);
    }
    let rows = doc
        .rows
        .iter()
        .map(|r| vec![r.k.to_string(), num(r.lower), num(r.upper), num(r.x), num(r.mass), num(r.width)])
        .collect();
    (vec!["k", "s_km1", "s_k", "x_k", "mass", "width"], rows)
}

/// Cutoffs and signals merged in increasing position.
pub fn plot_rows(doc: &SolutionDoc) -> Vec<(f64, &'static str)> {
    let mut out: Vec<(f64, &'static str)> = doc.cutoffs.iter().map(|c| (*c, "cutoff")).collect();
    out.extend(doc.rows.iter().map(|r| (r.x, "signal")));
    out.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(b.1)));
    out
}

/// Writes `solution.json`, `solution.csv` and `plot.csv` under `dir`.
pub fn write_solution(dir: &Path, doc: &SolutionDoc) -> Result<Vec<PathBuf>> {
    write_solution_named(dir, "solution", "plot", doc)
}

fn write_solution_named(dir: &Path, stem: &str, plot: &str, doc: &SolutionDoc) -> Result<Vec<PathBuf>> {
    ensure_dir(dir)?;
    let json = dir.join(format!("{stem}.json"));
    let csv = dir.join(format!("{stem}.csv"));
    let plot = dir.join(format!("{plot}.csv"));
    write_json(&json, doc)?;
    let (header, rows) = solution_rows(doc);
    write_csv(&csv, &header, rows)?;
    let prow = plot_rows(doc).into_iter().map(|(p, t)| vec![num(p), t.to_string()]).collect();
    write_csv(&plot, &["position", "type"], prow)?;
    Ok(vec![json, csv, plot])
}

pub fn write_sweep(dir: &Path, rows: &[SweepRow]) -> Result<Vec<PathBuf>> {
    ensure_dir(dir)?;
    let json = dir.join("sweep.json");
    let csv = dir.join("sweep.csv");
    write_json(&json, &rows)?;
    let body = rows
        .iter()
        .map(|r| vec![r.n.to_string(), num(r.payoff), num(r.max_residual), r.last_cutoff.map(num).unwrap_or_default()])
        .collect();
    write_csv(&csv, &["n", "payoff", "max_residual", "s_nm1"], body)?;
    Ok(vec![json, csv])
}

/// `compare.json` plus `compare.csv` with both ladders as
/// `series, position, type` rows on the external `domain`.
pub fn write_compare(dir: &Path, report: &ComparisonReport, domain: (f64, f64)) -> Result<Vec<PathBuf>> {
    let ext = |t: f64| domain.0 + (domain.1 - domain.0) * t;
    ensure_dir(dir)?;
    let json = dir.join("compare.json");
    let csv = dir.join("compare.csv");
    write_json(&json, report)?;
    let mut body = Vec::new();
    for (series, sol) in [("base", &report.base), ("shifted", &report.shifted)] {
        let mut pts: Vec<(f64, &str)> = sol.cutoffs.iter().map(|c| (*c, "cutoff")).collect();
        pts.extend(sol.signals.iter().map(|x| (*x, "signal")));
        pts.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(b.1)));
        body.extend(pts.into_iter().map(|(p, t)| vec![series.to_string(), num(ext(p)), t.to_string()]));
    }
    write_csv(&csv, &["series", "position", "type"], body)?;
    Ok(vec![json, csv])
}

/// `oracle.json` plus the oracle's own solution and plot CSVs.
pub fn write_oracle(dir: &Path, doc: &OracleDoc) -> Result<Vec<PathBuf>> {
    ensure_dir(dir)?;
    let json = dir.join("oracle.json");
    write_json(&json, doc)?;
    let mut out = vec![json];
    out.extend(write_solution_named(dir, "oracle_solution", "oracle_plot", &doc.oracle)?);
    Ok(out)
}
