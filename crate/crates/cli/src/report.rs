//! Machine-parseable run reports.

use std::collections::BTreeMap;
use std::time::Instant;

use serde::Serialize;

use crate::config::RunConfig;

#[derive(Clone, Copy, PartialEq, Eq, Debug, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum CheckStatus {
    Pass,
    Fail,
    /// Informational outcome; never affects the exit code.
    Recorded,
}

#[derive(Serialize)]
pub struct Check {
    pub name: String,
    pub status: CheckStatus,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub details: Option<serde_json::Value>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub counterexample: Option<String>,
}

#[derive(Serialize)]
pub struct Report {
    pub command: String,
    pub config: RunConfig,
    /// "pass" iff no check failed.
    pub status: CheckStatus,
    pub checks: Vec<Check>,
    pub timings_ms: BTreeMap<String, u128>,
}

impl Report {
    pub fn new(command: &str, config: RunConfig) -> Self {
        Report {
            command: command.to_string(),
            config,
            status: CheckStatus::Pass,
            checks: Vec::new(),
            timings_ms: BTreeMap::new(),
        }
    }

    pub fn push(&mut self, check: Check) {
        if check.status == CheckStatus::Fail {
            self.status = CheckStatus::Fail;
        }
        self.checks.push(check);
    }

    pub fn pass(&mut self, name: impl Into<String>) {
        self.push(Check {
            name: name.into(),
            status: CheckStatus::Pass,
            details: None,
            counterexample: None,
        });
    }

    pub fn outcome(&mut self, name: impl Into<String>, ok: bool, counterexample: Option<String>) {
        self.push(Check {
            name: name.into(),
            status: if ok { CheckStatus::Pass } else { CheckStatus::Fail },
            details: None,
            counterexample,
        });
    }

    pub fn recorded(&mut self, name: impl Into<String>, details: serde_json::Value) {
        self.push(Check {
            name: name.into(),
            status: CheckStatus::Recorded,
            details: Some(details),
            counterexample: None,
        });
    }

    pub fn time(&mut self, label: &str, started: Instant) {
        self.timings_ms
            .insert(label.to_string(), started.elapsed().as_millis());
    }

    /// 0 on pass (recorded checks included), 1 on any failed check.
    pub fn exit_code(&self) -> i32 {
        match self.status {
            CheckStatus::Fail => 1,
            _ => 0,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::{Backend, RunConfig};

    fn config() -> RunConfig {
        RunConfig {
            n: 1,
            sites: 1,
            c: "1".into(),
            xi: vec!["1/3".into()],
            chi: vec!["1".into()],
            t: vec![vec![]],
            z: "0".into(),
            seed: 0,
            backend: Backend::Exact,
        }
    }

    #[test]
    fn exit_codes_follow_check_outcomes() {
        let mut report = Report::new("probe", config());
        assert_eq!(report.exit_code(), 0);
        report.pass("a");
        report.recorded("b", serde_json::json!(1));
        assert_eq!(report.exit_code(), 0, "recorded checks never fail a run");
        report.outcome("c", false, Some("counterexample".into()));
        assert_eq!(report.status, CheckStatus::Fail);
        assert_eq!(report.exit_code(), 1);
        // A later pass does not rescue the run.
        report.pass("d");
        assert_eq!(report.exit_code(), 1);
    }
}
