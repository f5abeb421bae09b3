//! Check reports: the JSON document and the terminal summary.

use std::fmt::Write as _;
use std::str::FromStr;

use nalgebra::DMatrix;
use serde::Serialize;
use serde_json::{Number, Value};

use crate::metric::Classification;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum StageStatus {
    Pass,
    Fail,
    Skipped,
    /// Reported for information only; never affects the exit code.
    Info,
}

impl StageStatus {
    pub fn as_str(self) -> &'static str {
        match self {
            StageStatus::Pass => "pass",
            StageStatus::Fail => "fail",
            StageStatus::Skipped => "skipped",
            StageStatus::Info => "info",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StageResult {
    pub name: &'static str,
    pub status: StageStatus,
    pub max_residual: Option<f64>,
    pub worst_point: Option<Vec<f64>>,
    pub details: Value,
}

impl StageResult {
    pub fn skipped(name: &'static str, reason: &str) -> Self {
        Self {
            name,
            status: StageStatus::Skipped,
            max_residual: None,
            worst_point: None,
            details: serde_json::json!({ "reason": reason }),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckReport {
    pub instance: Value,
    pub stages: Vec<StageResult>,
    pub classification: Option<Classification>,
    pub exit_code: i32,
}

impl CheckReport {
    pub fn new(
        instance: Value,
        stages: Vec<StageResult>,
        classification: Option<Classification>,
    ) -> Self {
        let failed = stages.iter().any(|s| s.status == StageStatus::Fail);
        Self {
            instance,
            stages,
            classification,
            exit_code: i32::from(failed),
        }
    }

    pub fn passed(&self) -> bool {
        self.exit_code == 0
    }

    pub fn stage(&self, name: &str) -> Option<&StageResult> {
        self.stages.iter().find(|s| s.name == name)
    }

    /// The report as a JSON value, every float written with 17 significant digits.
    pub fn to_value(&self) -> Value {
        let mut v = serde_json::to_value(self).expect("report serializes");
        fix_floats(&mut v);
        v
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(&self.to_value()).expect("report serializes");
        s.push('\n');
        s
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let name = self
            .instance
            .get("name")
            .and_then(Value::as_str)
            .unwrap_or("?");
        let _ = writeln!(out, "instance {name}");
        for s in &self.stages {
            let residual = s
                .max_residual
                .map_or(String::new(), |r| format!("  max residual {r:.3e}"));
            let note = summary_note(s);
            let line = format!("  {:<13} {:<8}{residual}{note}", s.name, s.status.as_str());
            let _ = writeln!(out, "{}", line.trim_end());
        }
        if let Some(c) = &self.classification {
            let _ = writeln!(
                out,
                "  classification: {} ({})",
                serde_json::to_value(c.class)
                    .ok()
                    .and_then(|v| v.as_str().map(String::from))
                    .unwrap_or_default(),
                if c.reasons.is_empty() {
                    "transitive, not saturated".to_string()
                } else {
                    c.reasons.join(", ")
                },
            );
        }
        let _ = writeln!(
            out,
            "overall: {} (exit {})",
            if self.passed() { "pass" } else { "fail" },
            self.exit_code
        );
        out
    }
}

fn summary_note(s: &StageResult) -> String {
    let d = &s.details;
    let pick = |k: &str| d.get(k).and_then(Value::as_f64);
    if s.status == StageStatus::Skipped {
        return d
            .get("reason")
            .and_then(Value::as_str)
            .map_or(String::new(), |r| format!("  ({r})"));
    }
    match s.name {
        "existence" | "two_metric" => {
            match (d.get("status").and_then(Value::as_str), pick("max_eig")) {
                (Some(st), Some(e)) => format!("  max eig {e:.6} ({st})"),
                (None, Some(e)) => format!("  max eig {e:.6}"),
                _ => String::new(),
            }
        }
        _ => d
            .get("error")
            .and_then(Value::as_str)
            .map_or(String::new(), |e| format!("  ({e})")),
    }
}

fn fix_floats(v: &mut Value) {
    match v {
        Value::Number(n) if n.is_f64() => {
            if let Some(x) = n.as_f64() {
                *n = Number::from_str(&format_f64(x)).expect("valid number literal");
            }
        }
        Value::Array(items) => items.iter_mut().for_each(fix_floats),
        Value::Object(map) => map.values_mut().for_each(fix_floats),
        _ => {}
    }
}

/// `x` with 17 significant digits, enough to recover the exact double.
pub fn format_f64(x: f64) -> String {
    format!("{x:.16e}")
}

pub fn matrix_rows(m: &DMatrix<f64>) -> Vec<Vec<f64>> {
    m.row_iter().map(|r| r.iter().copied().collect()).collect()
}
