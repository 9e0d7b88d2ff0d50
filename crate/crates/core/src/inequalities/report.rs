use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

/// Smallest tolerance any report uses.
pub const TOLERANCE_FLOOR: f64 = 1e-6;
/// Multiplier applied to the estimated discretization error.
pub const ERROR_SAFETY: f64 = 10.0;

/// Outcome of one verifier run.
///
/// `passed` holds exactly when `deficit ≥ -tolerance`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub name: String,
    pub quantities: BTreeMap<String, f64>,
    pub deficit: f64,
    pub tolerance: f64,
    pub passed: bool,
    pub error_estimate: f64,
}

/// Caller overrides shared by the verifiers.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct VerifyOptions {
    /// Constant of the inequality; `None` picks it by symmetry detection.
    pub c: Option<f64>,
    /// Fixed tolerance instead of the error-based policy.
    pub tolerance: Option<f64>,
}

impl VerifyOptions {
    pub fn with_c(c: f64) -> Self {
        Self { c: Some(c), ..Self::default() }
    }
}

/// `max(1e-6, 10 · error_estimate)`.
pub fn default_tolerance(error_estimate: f64) -> f64 {
    TOLERANCE_FLOOR.max(ERROR_SAFETY * error_estimate)
}

/// Error of a second-order value from its half-resolution twin.
pub fn richardson_error(full: f64, half: f64) -> f64 {
    (full - half).abs() / 3.0
}

impl VerificationReport {
    pub fn new(
        name: impl Into<String>,
        quantities: BTreeMap<String, f64>,
        deficit: f64,
        error_estimate: f64,
        opts: &VerifyOptions,
    ) -> Self {
        let tolerance = opts.tolerance.unwrap_or_else(|| default_tolerance(error_estimate));
        Self { name: name.into(), quantities, deficit, tolerance, passed: deficit >= -tolerance, error_estimate }
    }

    /// Replaces the tolerance and recomputes `passed`.
    pub fn with_tolerance(mut self, tolerance: f64) -> Self {
        self.tolerance = tolerance;
        self.passed = self.deficit >= -tolerance;
        self
    }

    pub fn quantity(&self, label: &str) -> Option<f64> {
        self.quantities.get(label).copied()
    }

    /// Every number in the report is finite.
    pub fn is_finite(&self) -> bool {
        self.deficit.is_finite()
            && self.tolerance.is_finite()
            && self.error_estimate.is_finite()
            && self.quantities.values().all(|v| v.is_finite())
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("serializable")
    }
}

/// Builds a quantity map from label/value pairs.
pub fn quantities<const N: usize>(pairs: [(&str, f64); N]) -> BTreeMap<String, f64> {
    pairs.into_iter().map(|(k, v)| (k.to_string(), v)).collect()
}

/// CSV summary with header `name,deficit,passed`.
pub fn csv_summary(reports: &[VerificationReport]) -> String {
    let mut out = String::from("name,deficit,passed\n");
    for r in reports {
        out.push_str(&format!("{},{:e},{}\n", r.name, r.deficit, r.passed));
    }
    out
}
