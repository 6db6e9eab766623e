use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use hmodlab_core::counterexample::DECIMAL_DIGITS;
use hmodlab_core::rational::{self, Rational};
use hmodlab_core::Interval;
use serde::Serialize;
use serde_json::Value;

use crate::config::RunConfig;
use crate::CliError;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    ExactZero,
    Enclosure,
}

#[derive(Clone, Debug, Serialize)]
pub struct Check {
    pub check: String,
    pub parameters: BTreeMap<String, Value>,
    pub verdict: Verdict,
    pub passed: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub interval: Option<[String; 2]>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness: Option<Value>,
}

impl Check {
    pub fn new(check: &str, verdict: Verdict, passed: bool) -> Self {
        Check {
            check: check.to_string(),
            parameters: BTreeMap::new(),
            verdict,
            passed,
            interval: None,
            witness: None,
        }
    }

    pub fn param(mut self, key: &str, value: impl Into<Value>) -> Self {
        self.parameters.insert(key.to_string(), value.into());
        self
    }

    pub fn rational(self, key: &str, value: &Rational) -> Self {
        self.param(key, rational::format(value))
    }

    pub fn interval(mut self, i: &Interval) -> Self {
        let (lo, hi) = i.to_decimal_pair(DECIMAL_DIGITS);
        self.interval = Some([lo, hi]);
        self
    }

    pub fn witness(mut self, w: impl Serialize) -> Result<Self, CliError> {
        self.witness = Some(serde_json::to_value(w).map_err(|e| CliError::Io(e.to_string()))?);
        Ok(self)
    }
}

#[derive(Debug, Serialize)]
pub struct Report<'a> {
    pub suite: &'a str,
    pub timestamp: String,
    pub config: &'a RunConfig,
    pub checks: &'a [Check],
}

impl Report<'_> {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    /// Writes `<out>/<suite>/report.json` and returns its path.
    pub fn write(&self, out: &Path) -> Result<PathBuf, CliError> {
        let dir = out.join(self.suite);
        std::fs::create_dir_all(&dir).map_err(|e| CliError::Io(format!("{}: {e}", dir.display())))?;
        let path = dir.join("report.json");
        let mut text = serde_json::to_string_pretty(self).map_err(|e| CliError::Io(e.to_string()))?;
        text.push('\n');
        std::fs::write(&path, text).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
        Ok(path)
    }
}

pub fn timestamp() -> String {
    chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Secs, true)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_report_is_valid_json() {
        let config = RunConfig::default();
        let r = Report { suite: "kernel", timestamp: "t".into(), config: &config, checks: &[] };
        let v: Value = serde_json::from_str(&serde_json::to_string(&r).unwrap()).unwrap();
        assert_eq!(v["checks"], Value::Array(vec![]));
        assert_eq!(v["config"]["tol"], "1/1073741824");
        assert!(r.passed());
    }

    #[test]
    fn verdict_spelling() {
        let c = Check::new("kernel", Verdict::ExactZero, true).param("k", 1);
        let v = serde_json::to_value(&c).unwrap();
        assert_eq!(v["verdict"], "exact-zero");
        assert!(v.get("interval").is_none());
        let v = serde_json::to_value(Verdict::Enclosure).unwrap();
        assert_eq!(v, "enclosure");
    }
}
