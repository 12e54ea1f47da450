//! Artifact formats: versioned JSON records, sweep CSV and atomic writes.

use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::equilibrium::EquilibriumProfile;
use crate::error::LabError;
use crate::sweeps::SweepRow;
use crate::verification::{Diagnostics, MonteCarloReport};

pub const SCHEMA_VERSION: u32 = 1;

pub const SWEEP_HEADER: [&str; 16] = [
    "regime", "n", "b", "c", "L", "delta", "alpha", "pi_star", "pi_o", "q", "omega_star", "omega_star2",
    "informativeness", "pi", "residual", "status",
];

/// Write through a temporary file in the target directory, then rename.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<(), LabError> {
    let io = |source| LabError::Io { path: path.display().to_string(), source };
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(io)?;
    tmp.write_all(bytes).map_err(io)?;
    tmp.as_file().sync_all().map_err(io)?;
    tmp.persist(path).map_err(|e| io(e.error))?;
    Ok(())
}

/// 17 significant digits, enough to round-trip any double.
pub fn fmt_num(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else {
        x.to_string()
    }
}

pub fn sweep_csv(rows: &[SweepRow]) -> Result<Vec<u8>, LabError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(SWEEP_HEADER)?;
    for r in rows {
        let p = &r.params;
        let mut rec = vec![r.regime.cli_name().to_string(), p.n.to_string()];
        rec.extend(
            [p.b, p.c, p.l, p.delta, p.alpha, p.pi_star, p.pi_o, r.q, r.omega_star, r.omega_star2, r.informativeness, r.pi, r.residual]
                .map(fmt_num),
        );
        rec.push(r.status.as_str().to_string());
        w.write_record(&rec)?;
    }
    w.into_inner().map_err(|e| LabError::Io { path: "<csv buffer>".into(), source: e.into_error() })
}

pub fn monte_carlo_csv(report: &MonteCarloReport) -> Result<Vec<u8>, LabError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["reports", "convicted", "count", "frequency", "probability", "std_error", "z"])?;
    for row in report.events.iter().chain(&report.reports) {
        let convicted = row.convicted.map_or("any".to_string(), |c| c.to_string());
        w.write_record([
            row.reports.clone(),
            convicted,
            row.count.to_string(),
            fmt_num(row.frequency),
            fmt_num(row.probability),
            fmt_num(row.std_error),
            fmt_num(row.z_score()),
        ])?;
    }
    w.into_inner().map_err(|e| LabError::Io { path: "<csv buffer>".into(), source: e.into_error() })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolveRecord {
    pub schema_version: u32,
    pub status: String,
    pub regime: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub message: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub q: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub omega_star: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub omega_star2: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pi: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub informativeness: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub residual: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub equilibrium: Option<EquilibriumProfile>,
}

impl SolveRecord {
    pub fn solved(eq: EquilibriumProfile) -> Self {
        Self {
            schema_version: SCHEMA_VERSION,
            status: "Solved".into(),
            regime: eq.regime.cli_name().into(),
            message: None,
            q: Some(eq.q),
            omega_star: Some(eq.omega_star()),
            omega_star2: Some(eq.omega_star2()),
            pi: Some(eq.pi),
            informativeness: Some(eq.informativeness_max),
            residual: Some(eq.residual),
            equilibrium: Some(eq),
        }
    }

    pub fn failed(regime: &str, err: &LabError) -> Self {
        let status = match err {
            LabError::NoEquilibrium(_) => "NoEquilibrium",
            LabError::NonConvergence(_) => "NonConvergence",
            _ => "Error",
        };
        Self {
            schema_version: SCHEMA_VERSION,
            status: status.into(),
            regime: regime.into(),
            message: Some(err.to_string()),
            q: None,
            omega_star: None,
            omega_star2: None,
            pi: None,
            informativeness: None,
            residual: None,
            equilibrium: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerifyRecord {
    pub schema_version: u32,
    pub tol: f64,
    pub pass: bool,
    pub max_gap: f64,
    pub diagnostics: Diagnostics,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimulateRecord {
    pub schema_version: u32,
    pub max_z: f64,
    pub report: MonteCarloReport,
}
