use std::collections::BTreeMap;

use netloc_core::localization::{InvarianceReport, RankDiagnostics};
use serde::Serialize;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RankReport {
    pub rank: usize,
    pub free_columns: usize,
    pub sigma_max: f64,
    pub sigma_min: f64,
    pub rank_tol: f64,
    pub localizable: bool,
}

impl From<&RankDiagnostics> for RankReport {
    fn from(r: &RankDiagnostics) -> Self {
        RankReport {
            rank: r.rank,
            free_columns: r.free_columns,
            sigma_max: r.sigma_max,
            sigma_min: r.sigma_min,
            rank_tol: r.rank_tol,
            localizable: r.full_rank(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BuilderDiagnostics {
    pub tuples: usize,
    pub built: usize,
    pub degenerate: usize,
    pub skipped: BTreeMap<String, usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub max_residual: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct InvarianceSummary {
    pub scaling: f64,
    pub translation: f64,
    pub rotation: f64,
    pub angle_forms: f64,
}

impl From<&InvarianceReport> for InvarianceSummary {
    fn from(r: &InvarianceReport) -> Self {
        InvarianceSummary {
            scaling: r.scaling,
            translation: r.translation,
            rotation: r.rotation,
            angle_forms: r.max_angle(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunReport {
    pub rng_algorithm: &'static str,
    pub kind: String,
    pub solver: String,
    pub nodes: usize,
    pub anchors: usize,
    pub constraint_count: usize,
    pub builder: BuilderDiagnostics,
    pub rank: RankReport,
    pub residual_norm: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rmse: Option<f64>,
    pub iterations: usize,
    pub converged: bool,
    pub diverged: bool,
    /// `||B p||` per accepted round, thinned to at most `TRACE_POINTS`.
    pub trace: Vec<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub invariance: Option<InvarianceSummary>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub timings_ms: Option<BTreeMap<String, f64>>,
}

pub const TRACE_POINTS: usize = 256;

/// Evenly thinned copy of `trace`, always keeping the last entry.
pub fn thin_trace(trace: &[f64]) -> Vec<f64> {
    if trace.len() <= TRACE_POINTS {
        return trace.to_vec();
    }
    let stride = trace.len().div_ceil(TRACE_POINTS);
    let mut out: Vec<f64> = trace.iter().step_by(stride).copied().collect();
    if !(trace.len() - 1).is_multiple_of(stride) {
        out.push(*trace.last().unwrap());
    }
    out
}

impl RunReport {
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }
}
