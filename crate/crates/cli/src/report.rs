//! JSON report and CSV writers.

use std::fs::File;
use std::io::Write;
use std::path::Path;

use anyhow::{Context, Result};
use serde::Serialize;

/// Structured summary of one run. Everything except `timings_ms` is a
/// deterministic function of the config.
#[derive(Debug, Clone, Serialize)]
pub struct Report {
    pub mode: &'static str,
    pub verdict: String,
    /// Existence radius of the (first) local ball.
    pub h: Option<f64>,
    /// Right end of the computed solution.
    pub beta: Option<f64>,
    pub iterations: Option<usize>,
    pub integral_residual: Option<f64>,
    pub differential_residual: Option<f64>,
    pub certificate: Option<CertificateSummary>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub escape: Option<Escape>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub segments: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub hypotheses: Option<Vec<HypothesisLine>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub inconsistency_window: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub convergence: Option<Vec<LadderRow>>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub warnings: Vec<String>,
    pub timings_ms: Timings,
}

impl Report {
    pub fn new(mode: &'static str) -> Self {
        Self {
            mode,
            verdict: String::new(),
            h: None,
            beta: None,
            iterations: None,
            integral_residual: None,
            differential_residual: None,
            certificate: None,
            escape: None,
            segments: None,
            hypotheses: None,
            inconsistency_window: None,
            convergence: None,
            warnings: Vec::new(),
            timings_ms: Timings::default(),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct CertificateSummary {
    /// `issued`, `not-attempted` or `unavailable`.
    pub status: &'static str,
    pub holds: Option<bool>,
    pub iterations: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub reason: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness: Option<NodeLine>,
}

#[derive(Debug, Clone, Serialize)]
pub struct NodeLine {
    pub index: usize,
    pub t: f64,
    pub lhs: f64,
    pub rhs: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct Escape {
    pub t_star: f64,
    pub value: f64,
    pub threshold: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct HypothesisLine {
    pub name: &'static str,
    pub holds: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness: Option<WitnessLine>,
}

#[derive(Debug, Clone, Serialize)]
pub struct WitnessLine {
    pub s: f64,
    pub u: f64,
    pub v: Option<f64>,
    pub observed: f64,
    pub bound: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct LadderRow {
    pub n: usize,
    pub error: f64,
    pub order: Option<f64>,
}

#[derive(Debug, Clone, Default, Serialize)]
pub struct Timings {
    pub total: f64,
}

pub fn write_report(path: &Path, report: &Report) -> Result<()> {
    let mut text = serde_json::to_string_pretty(report)?;
    text.push('\n');
    create(path)?
        .write_all(text.as_bytes())
        .with_context(|| format!("cannot write {}", path.display()))
}

/// Writes `header` and `rows`; `None` cells are left empty.
pub fn write_csv(path: &Path, header: &[&str], rows: impl IntoIterator<Item = Vec<Option<String>>>) -> Result<()> {
    let mut w = csv::Writer::from_writer(create(path)?);
    w.write_record(header)?;
    for row in rows {
        w.write_record(row.iter().map(|c| c.as_deref().unwrap_or("")))?;
    }
    w.flush().with_context(|| format!("cannot write {}", path.display()))
}

/// Shortest round-trip decimal form, independent of locale.
pub fn num(x: f64) -> Option<String> {
    Some(format!("{x:?}"))
}

fn create(path: &Path) -> Result<File> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).with_context(|| format!("cannot create {}", dir.display()))?;
    }
    File::create(path).with_context(|| format!("cannot create {}", path.display()))
}
