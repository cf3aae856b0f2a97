use std::collections::BTreeMap;
use std::time::Instant;

use num_complex::Complex64;
use serde::Serialize;
use serde_json::{json, Value};

use crate::config::RunConfig;

pub const SCHEMA: u32 = 1;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Pass,
    Undetermined,
    Fail,
    Error,
}

impl Status {
    pub fn from_bool(ok: bool) -> Self {
        if ok {
            Status::Pass
        } else {
            Status::Fail
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct CheckEntry {
    pub status: Status,
    pub residual: Option<f64>,
    pub certificate: Value,
    /// Seconds; only filled with `--timing`.
    pub timing: Option<f64>,
}

#[derive(Clone, Debug, Serialize)]
pub struct ReportDocument {
    pub schema: u32,
    pub command: String,
    pub config: RunConfig,
    pub status: Status,
    pub checks: BTreeMap<String, CheckEntry>,
    pub results: BTreeMap<String, Value>,
    #[serde(skip)]
    timing: bool,
}

impl ReportDocument {
    pub fn new(command: &str, cfg: &RunConfig) -> Self {
        Self {
            schema: SCHEMA,
            command: command.into(),
            config: cfg.clone(),
            status: Status::Pass,
            checks: BTreeMap::new(),
            results: BTreeMap::new(),
            timing: cfg.timing,
        }
    }

    pub fn check(
        &mut self,
        name: &str,
        status: Status,
        residual: Option<f64>,
        certificate: Value,
        started: Instant,
    ) {
        let timing = self.timing.then(|| started.elapsed().as_secs_f64());
        self.status = self.status.max(status);
        self.checks.insert(
            name.into(),
            CheckEntry {
                status,
                residual,
                certificate,
                timing,
            },
        );
    }

    pub fn result(&mut self, key: &str, value: Value) {
        self.results.insert(key.into(), value);
    }

    /// 0 pass, 1 fail, 3 undetermined, 4 domain error.
    pub fn exit_code(&self) -> i32 {
        match self.status {
            Status::Pass => 0,
            Status::Fail => 1,
            Status::Undetermined => 3,
            Status::Error => 4,
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    pub fn to_text(&self) -> String {
        let mut out = format!(
            "{} [{}]: {}\n",
            self.command,
            self.config.model,
            status_word(self.status)
        );
        for (name, c) in &self.checks {
            let r = c
                .residual
                .map(|r| format!("{r:.3e}"))
                .unwrap_or_else(|| "-".into());
            out.push_str(&format!(
                "  {:<28} {:<13} {}\n",
                name,
                status_word(c.status),
                r
            ));
        }
        for (key, v) in &self.results {
            match v {
                Value::Array(items) if items.len() > 20 => {
                    out.push_str(&format!("  {key}: <{} entries>\n", items.len()))
                }
                _ => out.push_str(&format!("  {key}: {v}\n")),
            }
        }
        out
    }
}

fn status_word(s: Status) -> &'static str {
    match s {
        Status::Pass => "pass",
        Status::Undetermined => "undetermined",
        Status::Fail => "FAIL",
        Status::Error => "ERROR",
    }
}

pub fn cx(c: Complex64) -> Value {
    json!([c.re, c.im])
}
