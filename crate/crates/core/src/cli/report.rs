use std::fmt::Write as _;

use serde_json::{json, Map, Value};

use super::config::Command;

/// Flat key/value results plus the config echo. The text table and the JSON
/// file are rendered from the same rows.
#[derive(Debug, Clone, PartialEq)]
pub struct Report {
    pub command: Command,
    pub seed: u64,
    pub config: Value,
    rows: Vec<(String, Value)>,
    failures: Vec<String>,
}

impl Report {
    pub fn new(command: Command, seed: u64, config: Value) -> Self {
        Self {
            command,
            seed,
            config,
            rows: Vec::new(),
            failures: Vec::new(),
        }
    }

    pub fn push(&mut self, key: impl Into<String>, value: impl Into<Value>) {
        self.rows.push((key.into(), value.into()));
    }

    /// Records a pass/fail row; failures make the run exit with status 2.
    pub fn check(&mut self, key: impl Into<String>, ok: bool) {
        let key = key.into();
        if !ok {
            self.failures.push(key.clone());
        }
        self.push(key, if ok { "pass" } else { "fail" });
    }

    pub fn get(&self, key: &str) -> Option<&Value> {
        self.rows.iter().find(|(k, _)| k == key).map(|(_, v)| v)
    }

    pub fn rows(&self) -> &[(String, Value)] {
        &self.rows
    }

    pub fn failures(&self) -> &[String] {
        &self.failures
    }

    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }

    pub fn to_json_value(&self) -> Value {
        let results: Map<String, Value> = self.rows.iter().cloned().collect();
        json!({
            "command": self.command.name(),
            "seed": self.seed,
            "config": self.config,
            "results": results,
            "status": if self.passed() { "pass" } else { "fail" },
        })
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(&self.to_json_value()).expect("report serializes");
        s.push('\n');
        s
    }

    pub fn to_table(&self) -> String {
        let width = self
            .rows
            .iter()
            .map(|(k, _)| k.len())
            .max()
            .unwrap_or(0)
            .max(6);
        let mut out = String::new();
        let _ = writeln!(
            out,
            "fhecore-sim {} (seed {})",
            self.command.name(),
            self.seed
        );
        let _ = writeln!(out, "{:-<1$}", "", width + 24);
        for (k, v) in &self.rows {
            let _ = writeln!(out, "{k:<width$}  {}", render(v));
        }
        let _ = writeln!(out, "{:-<1$}", "", width + 24);
        let status = if self.passed() { "pass" } else { "fail" };
        let _ = writeln!(out, "{:<width$}  {status}", "status");
        out
    }
}

fn render(v: &Value) -> String {
    match v {
        Value::String(s) => s.clone(),
        other => other.to_string(),
    }
}
