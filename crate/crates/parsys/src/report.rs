//! Verification reports: one record per checked inequality, serializable and
//! aggregatable into the suite CSV.

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Verdict {
    Pass,
    Fail,
}

impl std::fmt::Display for Verdict {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Verdict::Pass => write!(f, "PASS"),
            Verdict::Fail => write!(f, "FAIL"),
        }
    }
}

/// Witness point of the worst violation.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Witness {
    pub t: f64,
    pub x: Vec<f64>,
    pub component: Option<usize>,
}

/// Pass/fail plus the measured quantities for one inequality.
///
/// `worst_violation` is `measured_left - measured_right` in the convention of
/// the check (positive means the inequality is strained); the verdict is PASS
/// exactly when `worst_violation <= tolerance`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct VerificationReport {
    pub check: String,
    pub preset: String,
    pub measured_left: f64,
    pub measured_right: f64,
    pub worst_violation: f64,
    pub tolerance: f64,
    pub verdict: Verdict,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness: Option<Witness>,
    /// Check-specific extras (slopes, tables, measured constants).
    #[serde(default, skip_serializing_if = "serde_json::Value::is_null")]
    pub details: serde_json::Value,
}

impl VerificationReport {
    pub fn new(check: &str, preset: &str, left: f64, right: f64, tolerance: f64) -> Self {
        let worst = left - right;
        VerificationReport {
            check: check.to_string(),
            preset: preset.to_string(),
            measured_left: left,
            measured_right: right,
            worst_violation: worst,
            tolerance,
            verdict: if worst <= tolerance {
                Verdict::Pass
            } else {
                Verdict::Fail
            },
            witness: None,
            details: serde_json::Value::Null,
        }
    }

    pub fn with_witness(mut self, w: Witness) -> Self {
        self.witness = Some(w);
        self
    }

    pub fn with_details(mut self, details: serde_json::Value) -> Self {
        self.details = details;
        self
    }

    /// Force a failure with an explicit violation value (used when a check
    /// fails structurally rather than by a measured margin).
    pub fn failed(check: &str, preset: &str, violation: f64, tolerance: f64) -> Self {
        let mut r = VerificationReport::new(check, preset, violation, 0.0, tolerance);
        r.verdict = Verdict::Fail;
        r
    }

    pub fn passed(&self) -> bool {
        self.verdict == Verdict::Pass
    }

    /// One row of the suite summary CSV: check, preset, worst_violation,
    /// tolerance, verdict.
    pub fn csv_row(&self) -> String {
        format!(
            "{},{},{},{},{}\n",
            self.check, self.preset, self.worst_violation, self.tolerance, self.verdict
        )
    }
}

pub const SUITE_CSV_HEADER: &str = "check,preset,worst_violation,tolerance,verdict\n";
