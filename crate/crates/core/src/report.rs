//! The report record every metric returns: method, parameters, score,
//! optional per-batch breakdown, and wall-clock timings per pipeline stage.

use std::collections::BTreeMap;

use serde::Serialize;

use crate::error::{Error, Result};

/// Tolerance for the effective-number bounds `1 <= score <= n`.
pub const SCORE_BOUND_TOL: f64 = 1e-6;

#[derive(Debug, Clone, Serialize)]
pub struct DiversityReport {
    pub method: String,
    /// Parameters the score was computed with, in stable (sorted) key order.
    pub params: BTreeMap<String, serde_json::Value>,
    pub score: f64,
    /// Per-batch `(batch tag, score)` pairs in first-appearance order,
    /// present only under the batched protocol.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub batch_scores: Option<Vec<(String, f64)>>,
    /// Stage name -> wall-clock milliseconds.
    pub timings_ms: BTreeMap<String, f64>,
}

impl DiversityReport {
    pub fn new(method: impl Into<String>, score: f64) -> Result<Self> {
        if !score.is_finite() {
            return Err(Error::Numerical(format!("diversity score is not finite: {score}")));
        }
        Ok(Self {
            method: method.into(),
            params: BTreeMap::new(),
            score,
            batch_scores: None,
            timings_ms: BTreeMap::new(),
        })
    }

    pub fn with_param(mut self, key: &str, value: impl Into<serde_json::Value>) -> Self {
        self.params.insert(key.to_string(), value.into());
        self
    }

    pub fn with_timing(mut self, stage: &str, ms: f64) -> Self {
        self.timings_ms.insert(stage.to_string(), ms);
        self
    }

    pub fn with_batch_scores(mut self, scores: Vec<(String, f64)>) -> Self {
        self.batch_scores = Some(scores);
        self
    }

    /// Record a timing after construction (used by callers that measure
    /// stages the metric itself cannot see, e.g. representation).
    pub fn add_timing(&mut self, stage: &str, ms: f64) {
        self.timings_ms.insert(stage.to_string(), ms);
    }
}

/// Check the effective-number bounds `1 - tol <= score <= n + tol` that
/// DCScore and VendiScore must satisfy.
pub(crate) fn check_effective_number_bounds(method: &str, score: f64, n: usize) -> Result<()> {
    if score < 1.0 - SCORE_BOUND_TOL || score > n as f64 + SCORE_BOUND_TOL {
        return Err(Error::Numerical(format!(
            "{method} score {score} outside effective-number bounds [1, {n}]"
        )));
    }
    Ok(())
}
