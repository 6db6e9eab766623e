//! Run configuration: defaults, an optional `key=value` file, command-line
//! flags and the `HMODLAB_OUT` environment variable, in increasing order of
//! precedence.

use std::path::{Path, PathBuf};

use hmodlab_core::counterexample::DenseSeq;
use hmodlab_core::enclosure::{default_tol, DEFAULT_BUDGET};
use hmodlab_core::rational::{self, Rational};
use hmodlab_core::Accuracy;
use num_traits::Signed;
use serde::Serialize;

use crate::CliError;

pub const OUT_ENV: &str = "HMODLAB_OUT";

#[derive(Clone, Debug, Serialize)]
pub struct RunConfig {
    #[serde(with = "rational::serde_str")]
    pub tol: Rational,
    pub budget: usize,
    pub depth: u64,
    pub trunc: (u64, u64),
    /// `None` selects the built-in dyadic enumeration.
    pub qseq: Option<PathBuf>,
    pub out: PathBuf,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            tol: default_tol(),
            budget: DEFAULT_BUDGET,
            depth: 64,
            trunc: (8, 64),
            qseq: None,
            out: PathBuf::from("hmodlab-out"),
        }
    }
}

/// Raw, still unvalidated settings from one source.
#[derive(Clone, Debug, Default)]
pub struct Overrides {
    pub tol: Option<String>,
    pub budget: Option<String>,
    pub depth: Option<String>,
    pub trunc: Option<String>,
    pub qseq: Option<PathBuf>,
    pub out: Option<PathBuf>,
}

impl Overrides {
    /// Parses `key=value` lines; blank lines and `#` comments are ignored.
    pub fn from_file(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Parameter(format!("cannot read config {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> Result<Self, CliError> {
        let mut o = Overrides::default();
        for (i, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| CliError::Parameter(format!("config line {}: expected key=value", i + 1)))?;
            let value = value.trim().to_string();
            match key.trim() {
                "tol" => o.tol = Some(value),
                "budget" => o.budget = Some(value),
                "depth" => o.depth = Some(value),
                "trunc" => o.trunc = Some(value),
                "qseq" => o.qseq = Some(PathBuf::from(value)),
                "out" => o.out = Some(PathBuf::from(value)),
                other => return Err(CliError::Parameter(format!("config line {}: unknown key {other:?}", i + 1))),
            }
        }
        Ok(o)
    }

    /// Fields set in `other` win.
    pub fn merge(self, other: Overrides) -> Overrides {
        Overrides {
            tol: other.tol.or(self.tol),
            budget: other.budget.or(self.budget),
            depth: other.depth.or(self.depth),
            trunc: other.trunc.or(self.trunc),
            qseq: other.qseq.or(self.qseq),
            out: other.out.or(self.out),
        }
    }
}

fn positive<T: std::str::FromStr + PartialOrd + From<u8>>(name: &str, s: &str) -> Result<T, CliError> {
    match s.trim().parse::<T>() {
        Ok(v) if v >= T::from(1) => Ok(v),
        _ => Err(CliError::Parameter(format!("{name} must be a positive integer, got {s:?}"))),
    }
}

impl RunConfig {
    pub fn resolve(o: Overrides, env_out: Option<PathBuf>) -> Result<Self, CliError> {
        let mut c = RunConfig::default();
        if let Some(t) = o.tol {
            let tol = rational::parse(&t).map_err(|e| CliError::Parameter(format!("tol: {e}")))?;
            if !tol.is_positive() {
                return Err(CliError::Parameter(format!("tol must be positive, got {t}")));
            }
            c.tol = tol;
        }
        if let Some(b) = o.budget {
            c.budget = positive::<u64>("budget", &b)? as usize;
        }
        if let Some(d) = o.depth {
            c.depth = positive("depth", &d)?;
        }
        if let Some(t) = o.trunc {
            let (n, m) = t
                .split_once(',')
                .ok_or_else(|| CliError::Parameter(format!("trunc must be N,M, got {t:?}")))?;
            c.trunc = (positive("trunc N", n)?, positive("trunc M", m)?);
        }
        c.qseq = o.qseq;
        if let Some(out) = env_out.or(o.out) {
            c.out = out;
        }
        Ok(c)
    }

    pub fn accuracy(&self) -> Result<Accuracy, CliError> {
        Accuracy::new(self.tol.clone(), self.budget).map_err(CliError::from)
    }

    pub fn sequence(&self) -> Result<DenseSeq, CliError> {
        match &self.qseq {
            None => Ok(DenseSeq::default()),
            Some(p) => DenseSeq::from_file(p).map_err(|e| CliError::Parameter(e.to_string())),
        }
    }
}

pub fn env_out() -> Option<PathBuf> {
    std::env::var_os(OUT_ENV).filter(|v| !v.is_empty()).map(PathBuf::from)
}

#[cfg(test)]
mod tests {
    use super::*;
    use hmodlab_core::rational::{pow2, ratio};

    #[test]
    fn defaults() {
        let c = RunConfig::resolve(Overrides::default(), None).unwrap();
        assert_eq!(c.tol, pow2(-30));
        assert_eq!((c.budget, c.depth, c.trunc), (1_000_000, 64, (8, 64)));
    }

    #[test]
    fn file_then_flags_then_env() {
        let file = Overrides::parse("# comment\ntol = 1/1024\ntrunc=2,3\nout=a\n").unwrap();
        let flags = Overrides { tol: Some("2^-12".into()), ..Default::default() };
        let c = RunConfig::resolve(file.clone().merge(flags), None).unwrap();
        assert_eq!(c.tol, pow2(-12));
        assert_eq!(c.trunc, (2, 3));
        assert_eq!(c.out, PathBuf::from("a"));
        let c = RunConfig::resolve(file, Some(PathBuf::from("b"))).unwrap();
        assert_eq!(c.tol, ratio(1, 1024));
        assert_eq!(c.out, PathBuf::from("b"));
    }

    #[test]
    fn rejects_bad_values() {
        for o in [
            Overrides { tol: Some("-1".into()), ..Default::default() },
            Overrides { tol: Some("0".into()), ..Default::default() },
            Overrides { budget: Some("0".into()), ..Default::default() },
            Overrides { trunc: Some("3".into()), ..Default::default() },
            Overrides { depth: Some("x".into()), ..Default::default() },
        ] {
            assert!(RunConfig::resolve(o, None).is_err());
        }
        assert!(Overrides::parse("colour=blue").is_err());
        assert!(Overrides::parse("tol").is_err());
    }
}
