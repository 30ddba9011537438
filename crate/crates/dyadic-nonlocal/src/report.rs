//! Machine-readable verification reports: a suite of named cases, each with a
//! residual checked against a tolerance. Serialized as versioned JSON so
//! downstream tooling can rely on the schema.

use serde::{Deserialize, Serialize};

use crate::error::Result;

pub const REPORT_VERSION: u32 = 1;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CaseResult {
    pub id: String,
    /// human-readable statement of the quantity being checked
    pub anchor: String,
    pub residual: f64,
    pub tol: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct VerificationReport {
    pub version: u32,
    pub suite: String,
    pub cases: Vec<CaseResult>,
    pub pass: bool,
    pub seconds: f64,
}

impl VerificationReport {
    pub fn new(suite: impl Into<String>) -> Self {
        VerificationReport {
            version: REPORT_VERSION,
            suite: suite.into(),
            cases: Vec::new(),
            pass: true,
            seconds: 0.0,
        }
    }

    /// Record one case; the case passes when `residual ≤ tol`. Returns the
    /// verdict so callers can log as they go.
    pub fn add_case(
        &mut self,
        id: impl Into<String>,
        anchor: impl Into<String>,
        residual: f64,
        tol: f64,
    ) -> bool {
        assert!(residual.is_finite() && residual >= 0.0, "residuals are nonnegative finite");
        assert!(tol.is_finite() && tol >= 0.0);
        let pass = residual <= tol;
        self.pass &= pass;
        self.cases.push(CaseResult {
            id: id.into(),
            anchor: anchor.into(),
            residual,
            tol,
            pass,
        });
        pass
    }

    pub fn finish(&mut self, seconds: f64) {
        self.seconds = seconds;
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serialization cannot fail")
    }

    pub fn from_json(s: &str) -> Result<Self> {
        serde_json::from_str(s).map_err(|e| crate::error::Error::Format(e.to_string()))
    }

    pub fn write_json(&self, path: &std::path::Path) -> Result<()> {
        std::fs::write(path, self.to_json())?;
        Ok(())
    }
}
