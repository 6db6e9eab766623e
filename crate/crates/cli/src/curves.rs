//! CSV samples of `f_{q,M}`, row partial sums and Cauchy-gap functions.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use clap::ValueEnum;
use hmodlab_core::counterexample::{row_prefix, solve_constraints, DenseSeq};
use hmodlab_core::interval::DEFAULT_PRECISION;
use hmodlab_core::pwl::{hat, make_f};
use hmodlab_core::rational::{self, inv_pow4, Rational};
use hmodlab_core::{FuncLin, IndexA, PwlFunc};

use crate::CliError;

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum CurveObject {
    /// `f_{q,M}`; params `q`, `M`.
    F,
    /// `Σ_{m≤M} |b_{n,m}|²` for the family forced by `b0`; params `b0`, `n`,
    /// `M` (`M=inf` gives the pointwise limit).
    RowSum,
    /// `Σ_{M<m≤M2} |b_{n,m}|²`; params `b0`, `n`, `M`, `M2` (default `2M`).
    Gap,
}

/// `key=value` pairs, given either as separate arguments or comma-separated.
pub fn parse_params(raw: &[String]) -> Result<BTreeMap<String, String>, CliError> {
    let mut out = BTreeMap::new();
    for item in raw.iter().flat_map(|s| s.split(',')) {
        let item = item.trim();
        if item.is_empty() {
            continue;
        }
        let (k, v) = item
            .split_once('=')
            .ok_or_else(|| CliError::Parameter(format!("parameter {item:?} is not key=value")))?;
        out.insert(k.trim().to_string(), v.trim().to_string());
    }
    Ok(out)
}

/// `1`, `t`, `hat(c)` or a rational constant.
pub fn parse_b0(s: &str) -> Result<FuncLin, CliError> {
    let s = s.trim();
    if s == "t" {
        return Ok(FuncLin::pwl(PwlFunc::identity()));
    }
    if let Some(inner) = s.strip_prefix("hat(").and_then(|r| r.strip_suffix(')')) {
        return Ok(FuncLin::pwl(hat(&parse_rational("hat centre", inner)?)?));
    }
    Ok(FuncLin::constant(parse_rational("b0", s)?))
}

fn parse_rational(name: &str, s: &str) -> Result<Rational, CliError> {
    rational::parse(s).map_err(|e| CliError::Parameter(format!("{name}: {e}")))
}

struct Params(BTreeMap<String, String>);

impl Params {
    fn get(&self, key: &str) -> Result<&str, CliError> {
        self.0
            .get(key)
            .map(String::as_str)
            .ok_or_else(|| CliError::Parameter(format!("missing parameter {key}")))
    }

    fn count(&self, key: &str) -> Result<u64, CliError> {
        self.get(key)?
            .parse()
            .map_err(|_| CliError::Parameter(format!("{key} must be a nonnegative integer")))
    }

    fn index(&self, key: &str) -> Result<u64, CliError> {
        match self.count(key)? {
            0 => Err(CliError::Parameter(format!("{key} must be >= 1"))),
            v => Ok(v),
        }
    }

    fn b0(&self) -> Result<FuncLin, CliError> {
        parse_b0(self.0.get("b0").map_or("1", String::as_str))
    }

    fn check_known(&self, known: &[&str]) -> Result<(), CliError> {
        match self.0.keys().find(|k| !known.contains(&k.as_str())) {
            Some(k) => Err(CliError::Parameter(format!("unknown parameter {k}"))),
            None => Ok(()),
        }
    }
}

/// A curve as a function of `t`: either exact or a formal expression.
enum Curve {
    Exact(PwlFunc),
    Expr(FuncLin),
    /// `4^{-n} |b0(t)|²` for `t < q`, zero from `q` on.
    Limit { b0: FuncLin, scale: Rational, q: Rational },
}

impl Curve {
    fn value(&self, t: &Rational) -> Result<String, CliError> {
        let v = match self {
            Curve::Exact(g) => rational::to_f64(&g.eval(t)?),
            Curve::Expr(x) => rational::to_f64(&x.eval_point(t, DEFAULT_PRECISION)?.midpoint()),
            Curve::Limit { b0, scale, q } => {
                if t < q {
                    let b = b0.eval_point(t, DEFAULT_PRECISION)?.midpoint();
                    rational::to_f64(&(&b * &b * scale))
                } else {
                    0.0
                }
            }
        };
        Ok(format_value(v))
    }
}

fn format_value(v: f64) -> String {
    // Avoid "-0".
    if v == 0.0 {
        "0".into()
    } else {
        format!("{v}")
    }
}

fn row_tail(b0: &FuncLin, n: u64, from: u64, to: u64) -> Result<Curve, CliError> {
    let x = solve_constraints(b0, &DenseSeq::default());
    let indices: Vec<IndexA> = row_prefix(n, to).into_iter().skip(from as usize).collect();
    let squares: Vec<FuncLin> = indices
        .iter()
        .map(|a| {
            let v = x.get(a);
            v.mul(&v)
        })
        .collect();
    let sum = FuncLin::lin_combine(squares.iter().map(|s| (Rational::from_integer(1.into()), s)));
    Ok(match sum.as_pwl() {
        Some(g) => Curve::Exact(g),
        None => Curve::Expr(sum),
    })
}

fn build(object: CurveObject, params: &Params) -> Result<Curve, CliError> {
    match object {
        CurveObject::F => {
            params.check_known(&["q", "M"])?;
            let q = parse_rational("q", params.get("q")?)?;
            Ok(Curve::Exact(make_f(&q, params.count("M")?)?))
        }
        CurveObject::RowSum => {
            params.check_known(&["b0", "n", "M"])?;
            let (b0, n) = (params.b0()?, params.index("n")?);
            if params.get("M")? == "inf" {
                let q = DenseSeq::default().get(n)?;
                return Ok(Curve::Limit { b0, scale: inv_pow4(n), q });
            }
            row_tail(&b0, n, 0, params.count("M")?)
        }
        CurveObject::Gap => {
            params.check_known(&["b0", "n", "M", "M2"])?;
            let (b0, n, m) = (params.b0()?, params.index("n")?, params.count("M")?);
            let m2 = match params.0.get("M2") {
                Some(_) => params.count("M2")?,
                None => 2 * m,
            };
            if m2 < m {
                return Err(CliError::Parameter("M2 must be >= M".into()));
            }
            row_tail(&b0, n, m, m2)
        }
    }
}

/// Samples the curve at `samples` uniform points of `[0, 1]` and renders the
/// CSV text.
pub fn render(object: CurveObject, params: BTreeMap<String, String>, samples: usize) -> Result<String, CliError> {
    if samples < 2 {
        return Err(CliError::Parameter("samples must be >= 2".into()));
    }
    let curve = build(object, &Params(params))?;
    let mut out = String::from("t,value\n");
    let last = samples as i64 - 1;
    for k in 0..=last {
        let t = rational::ratio(k, last);
        writeln!(out, "{},{}", format_value(rational::to_f64(&t)), curve.value(&t)?).expect("writing to a String");
    }
    Ok(out)
}

pub fn write(path: &Path, text: &str) -> Result<(), CliError> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(|e| CliError::Io(format!("{}: {e}", dir.display())))?;
    }
    std::fs::write(path, text).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params(s: &str) -> BTreeMap<String, String> {
        parse_params(&[s.to_string()]).unwrap()
    }

    #[test]
    fn f_example() {
        let csv = render(CurveObject::F, params("q=1/2,M=8"), 5).unwrap();
        assert_eq!(csv, "t,value\n0,1\n0.25,1\n0.5,0\n0.75,0\n1,0\n");
    }

    #[test]
    fn row_sum_limit_is_a_step() {
        let csv = render(CurveObject::RowSum, params("b0=1,n=2,M=inf"), 5).unwrap();
        assert_eq!(csv, "t,value\n0,0.0625\n0.25,0.0625\n0.5,0\n0.75,0\n1,0\n");
    }

    #[test]
    fn row_sum_approaches_limit() {
        let csv = render(CurveObject::RowSum, params("b0=1,n=2,M=64"), 3).unwrap();
        assert_eq!(csv, "t,value\n0,0.0625\n0.5,0\n1,0\n");
    }

    #[test]
    fn gap_peaks_at_half_height() {
        // At t = q_2 − 1/16 the tail between 8 and 16 columns is 4^{-2}/2.
        let text = render(CurveObject::Gap, params("b0=1,n=2,M=8"), 17).unwrap();
        assert!(text.contains("\n0.4375,0.03125\n"), "{text}");
    }

    #[test]
    fn non_pwl_curves_use_midpoints() {
        let text = render(CurveObject::RowSum, params("b0=t,n=1,M=3"), 3).unwrap();
        assert_eq!(text, "t,value\n0,0\n0.5,0.0625\n1,0\n");
    }

    #[test]
    fn rejects_bad_input() {
        assert!(render(CurveObject::F, params("q=1/2,M=8"), 1).is_err());
        assert!(render(CurveObject::F, params("q=2,M=8"), 5).is_err());
        assert!(render(CurveObject::F, params("q=1/2"), 5).is_err());
        assert!(render(CurveObject::F, params("q=1/2,M=8,z=1"), 5).is_err());
        assert!(render(CurveObject::Gap, params("n=0,M=1"), 5).is_err());
        assert!(parse_params(&["q".into()]).is_err());
    }
}
