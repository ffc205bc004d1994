//! The persisted `report.json`.

use std::path::Path;
use std::time::{SystemTime, UNIX_EPOCH};

use serde::Serialize;

use crate::config::{CommandKind, RunConfig};
use crate::error::Result;
use crate::io::write_atomic;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// A named pass/fail check, with the measured value and its limit when numeric.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Gate {
    pub name: String,
    pub passed: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub value: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub limit: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub relation: Option<&'static str>,
}

impl Gate {
    pub fn at_most(name: &str, value: f64, limit: f64) -> Self {
        Self { name: name.into(), passed: value <= limit, value: Some(value), limit: Some(limit), relation: Some("<=") }
    }

    pub fn at_least(name: &str, value: f64, limit: f64) -> Self {
        Self { name: name.into(), passed: value >= limit, value: Some(value), limit: Some(limit), relation: Some(">=") }
    }

    pub fn check(name: &str, passed: bool) -> Self {
        Self { name: name.into(), passed, value: None, limit: None, relation: None }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Pass,
    Fail,
    Error,
}

#[derive(Debug, Clone, Serialize)]
pub struct Timing {
    pub started_unix_ms: u128,
    pub finished_unix_ms: u128,
}

pub fn now_ms() -> u128 {
    SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_millis()).unwrap_or(0)
}

#[derive(Debug, Clone, Serialize)]
pub struct OutputRecord {
    pub version: &'static str,
    pub command: CommandKind,
    pub status: Status,
    pub config: RunConfig,
    pub gates: Vec<Gate>,
    pub result: serde_json::Value,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
    /// Files written next to the report.
    pub artifacts: Vec<String>,
    pub timing: Timing,
}

impl OutputRecord {
    pub fn write(&self, dir: &Path) -> Result<()> {
        let mut text = serde_json::to_string_pretty(self).expect("report serializes");
        text.push('\n');
        write_atomic(&dir.join("report.json"), text.as_bytes())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gates_compare_inclusively() {
        assert!(Gate::at_most("x", 1.0, 1.0).passed);
        assert!(!Gate::at_most("x", f64::NAN, 1.0).passed);
        assert!(!Gate::at_least("x", 0.5, 1.0).passed);
        let json = serde_json::to_value(Gate::check("ok", true)).unwrap();
        assert_eq!(json, serde_json::json!({"name": "ok", "passed": true}));
    }
}
