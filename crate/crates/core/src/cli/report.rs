//! Run reports written next to the CSV artifacts.

use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::Serialize;

use crate::error::Result;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Pass,
    Fail,
    Skip,
}

/// Outcome of one named check. `margin` is positive when the check passes
/// with room to spare and negative when it fails.
#[derive(Debug, Clone, Serialize)]
pub struct Verdict {
    pub check: String,
    pub status: Status,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub value: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub limit: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub margin: Option<f64>,
    #[serde(skip_serializing_if = "String::is_empty")]
    pub detail: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct RunReport {
    pub command: String,
    pub config_digest: String,
    pub wall_time_seconds: f64,
    pub verdicts: Vec<Verdict>,
    pub artifacts: Vec<PathBuf>,
    pub summary: serde_json::Map<String, serde_json::Value>,
    #[serde(skip)]
    started: Option<Instant>,
}

impl RunReport {
    pub fn new(command: &str, config_digest: &str) -> Self {
        Self {
            command: command.to_string(),
            config_digest: config_digest.to_string(),
            wall_time_seconds: 0.0,
            verdicts: Vec::new(),
            artifacts: Vec::new(),
            summary: serde_json::Map::new(),
            started: Some(Instant::now()),
        }
    }

    fn push(
        &mut self,
        check: &str,
        status: Status,
        value: Option<f64>,
        limit: Option<f64>,
        margin: Option<f64>,
        detail: String,
    ) {
        self.verdicts.push(Verdict {
            check: check.to_string(),
            status,
            value,
            limit,
            margin,
            detail,
        });
    }

    /// Passes when `value <= limit`.
    pub fn at_most(&mut self, check: &str, value: f64, limit: f64) {
        let status = if value <= limit { Status::Pass } else { Status::Fail };
        self.push(
            check,
            status,
            Some(value),
            Some(limit),
            Some(limit - value),
            String::new(),
        );
    }

    /// Passes when `value >= limit`.
    pub fn at_least(&mut self, check: &str, value: f64, limit: f64) {
        let status = if value >= limit { Status::Pass } else { Status::Fail };
        self.push(
            check,
            status,
            Some(value),
            Some(limit),
            Some(value - limit),
            String::new(),
        );
    }

    pub fn pass(&mut self, check: &str, detail: impl Into<String>) {
        self.push(check, Status::Pass, None, None, None, detail.into());
    }

    pub fn fail(&mut self, check: &str, detail: impl Into<String>) {
        self.push(check, Status::Fail, None, None, None, detail.into());
    }

    pub fn skip(&mut self, check: &str, detail: impl Into<String>) {
        self.push(check, Status::Skip, None, None, None, detail.into());
    }

    pub fn note(&mut self, key: &str, value: impl Serialize) {
        let value = serde_json::to_value(value).unwrap_or(serde_json::Value::Null);
        self.summary.insert(key.to_string(), value);
    }

    pub fn passed(&self) -> bool {
        self.verdicts.iter().all(|v| v.status != Status::Fail)
    }

    pub fn finish(&mut self) {
        if let Some(t) = self.started {
            self.wall_time_seconds = t.elapsed().as_secs_f64();
        }
    }

    /// Writes `<dir>/<command>_report.json`.
    pub fn write(&mut self, dir: &Path) -> Result<PathBuf> {
        self.finish();
        let path = dir.join(format!("{}_report.json", self.command.replace('-', "_")));
        std::fs::write(&path, serde_json::to_string_pretty(self)? + "\n")?;
        Ok(path)
    }

    /// One line per verdict for the terminal.
    pub fn render(&self) -> String {
        let mut out = String::new();
        for v in &self.verdicts {
            let tag = match v.status {
                Status::Pass => "PASS",
                Status::Fail => "FAIL",
                Status::Skip => "SKIP",
            };
            out.push_str(&format!("{tag} {}", v.check));
            if let (Some(value), Some(limit)) = (v.value, v.limit) {
                out.push_str(&format!(" value={value:.6e} limit={limit:.6e}"));
            }
            if !v.detail.is_empty() {
                out.push_str(&format!(" ({})", v.detail));
            }
            out.push('\n');
        }
        out
    }
}
