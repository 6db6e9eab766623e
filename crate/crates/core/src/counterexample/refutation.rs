//! Why `S^⊥ = 0`, made quantitative.
//!
//! Orthogonality to every `ζ_{n,m}` forces `b_{n,m} = 2^{-n} ψ_{q_n,m} b_0`
//! ([`solve_constraints`]). Row `n` of such a family then has partial sums
//! `Σ_{m≤M} |b_{n,m}|² = 4^{-n} |b_0|² f_{q_n,M}`, which converge pointwise
//! to `4^{-n}|b_0|² χ_{[0,q_n)}`. If `|b_0| ≥ d > 0` near `q_n` the limit is
//! discontinuous, so the convergence is not uniform and the family is not in
//! `B^A`. [`refute_membership`] turns this into a checkable statement: at
//! `t = q_n − 1/M'`
//!
//! ```text
//! Σ_{M < m ≤ M'} |b_{n,m}(t)|² = 4^{-n} |b_0(t)|² (1 − M/M') ≥ 4^{-n} d² (1 − M/M'),
//! ```
//!
//! so the Cauchy gap between column cutoffs `M` and `2M` stays above
//! `4^{-n} d² / 2` for every `M`.

use num_traits::{One, Signed, Zero};
use serde::Serialize;

use super::construction::psi;
use super::DenseSeq;
use crate::enclosure::{min_magnitude, Accuracy};
use crate::error::{Error, Result};
use crate::expr::FuncLin;
use crate::interval::Interval;
use crate::module::{cauchy_gap, GeneratorElement, IndexA, Support};
use crate::rational::{self, inv_pow4, pow2, Rational};

/// Subdivision depth used when certifying `|b_0| ≥ d` on a window.
const WINDOW_DEPTH: u32 = 10;
/// Smallest window half-width tried is `2^{-MAX_EPS_LEVEL}` (or `tol`).
const MAX_EPS_LEVEL: i64 = 40;
/// Number of `(M, 2M)` pairs cross-checked against computed gaps.
const GAP_CHECKS: u32 = 5;
/// Pairs with `2M` above this are skipped, except the first.
const MAX_GAP_COLUMNS: u64 = 4096;

/// The unique candidate orthogonal to all of `S` with zeroth entry `b0`:
/// `0 ↦ b0`, `(n, m) ↦ 2^{-n} ψ_{q_n,m} b0`.
pub fn solve_constraints(b0: &FuncLin, qs: &DenseSeq) -> GeneratorElement<IndexA> {
    if b0.is_zero_exact() {
        return GeneratorElement::new(Support::Finite(Default::default()), |_| FuncLin::zero());
    }
    let b0 = b0.clone();
    let qs = qs.clone();
    GeneratorElement::new(Support::Everywhere, move |a: &IndexA| match *a {
        IndexA::Zero => b0.clone(),
        IndexA::Pair(n, m) => qs
            .get(n)
            .and_then(|q| psi(&q, m))
            .map(|p| p.mul(&b0).scale(&pow2(-(n as i64))))
            .unwrap_or_default(),
    })
}

/// A neighbourhood `[q_n − ε, q_n + ε] ∩ [0, 1]` on which `|b_0| ≥ d`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct WitnessWindow {
    pub n: u64,
    #[serde(with = "rational::serde_str")]
    pub q: Rational,
    #[serde(with = "rational::serde_str")]
    pub epsilon: Rational,
    #[serde(with = "rational::serde_str")]
    pub d: Rational,
}

/// Tries row `n` alone: half-widths `ε = 1/4, 1/8, …` down to
/// `max(tol, 2^{-40})`, returning the first that certifies `d > 0`.
pub fn witness_window_at(b0: &FuncLin, qs: &DenseSeq, n: u64, tol: &Rational) -> Result<Option<WitnessWindow>> {
    if b0.is_zero_exact() {
        return Err(Error::NotApplicable("b0 is exactly zero".into()));
    }
    let q = qs.get(n)?;
    for j in 2..=MAX_EPS_LEVEL {
        let epsilon = pow2(-j);
        if epsilon < *tol {
            break;
        }
        let a = (&q - &epsilon).max(Rational::zero());
        let b = (&q + &epsilon).min(Rational::one());
        let d = min_magnitude(b0, &a, &b, WINDOW_DEPTH)?;
        if d.is_positive() {
            return Ok(Some(WitnessWindow { n, q, epsilon, d }));
        }
    }
    Ok(None)
}

/// First row `n ≤ depth` (in sequence order) with a certified window.
pub fn find_witness_window(b0: &FuncLin, qs: &DenseSeq, depth: u64, tol: &Rational) -> Result<WitnessWindow> {
    if b0.is_zero_exact() {
        return Err(Error::NotApplicable("b0 is exactly zero".into()));
    }
    for n in 1..=depth {
        if let Some(w) = witness_window_at(b0, qs, n, tol)? {
            return Ok(w);
        }
    }
    Err(Error::SearchExhausted(format!(
        "no window with certified |b0| > 0 around q_1..q_{depth}"
    )))
}

/// One comparison of the closed-form gap bound with a computed gap.
#[derive(Clone, Debug, Serialize)]
pub struct GapCheck {
    pub m: u64,
    pub m2: u64,
    #[serde(with = "rational::serde_str")]
    pub bound: Rational,
    #[serde(serialize_with = "serialize_interval")]
    pub gap: Interval,
    /// `bound ≤ gap.hi` and `bound ≤ gap.lo + tol`.
    pub consistent: bool,
}

/// Certificate that `solve_constraints(b0)` is not in `B^A`.
#[derive(Clone, Debug, Serialize)]
pub struct NonMembershipWitness {
    pub window: WitnessWindow,
    /// `4^{-n} d² / 2`: every gap between cutoffs `M` and `2M` (with
    /// `1/(2M) < min(ε, q_n)`) is at least this.
    #[serde(with = "rational::serde_str")]
    pub asymptote: Rational,
    pub checks: Vec<GapCheck>,
}

impl NonMembershipWitness {
    /// `4^{-n} d² (1 − M/M')`, valid when `M < M'` and `1/M' < min(ε, q_n)`.
    pub fn gap_bound(&self, m: u64, m2: u64) -> Option<Rational> {
        gap_bound(&self.window, m, m2)
    }

    pub fn consistent(&self) -> bool {
        self.checks.iter().all(|c| c.consistent)
    }
}

fn gap_bound(w: &WitnessWindow, m: u64, m2: u64) -> Option<Rational> {
    if m >= m2 {
        return None;
    }
    let step = Rational::new(1.into(), m2.into());
    if step >= w.epsilon || step >= w.q {
        return None;
    }
    let frac = Rational::one() - Rational::new(m.into(), m2.into());
    Some(inv_pow4(w.n) * &w.d * &w.d * frac)
}

/// Indices `(n, 1..=m)`.
pub fn row_prefix(n: u64, m: u64) -> Vec<IndexA> {
    (1..=m).map(|j| IndexA::Pair(n, j)).collect()
}

/// Cross-checks the closed-form bound of `window` against computed Cauchy
/// gaps of `solve_constraints(b0)` on row `window.n`, for `(M, 2M)` with
/// `M = M_0, 2M_0, …` and `M_0` the least power of two the bound allows.
/// At most five pairs are checked, and only the first may exceed
/// 4096 columns.
pub fn certify_window(
    b0: &FuncLin,
    qs: &DenseSeq,
    window: WitnessWindow,
    acc: &Accuracy,
) -> Result<NonMembershipWitness> {
    let x = solve_constraints(b0, qs);
    let mut m0 = 1u64;
    while gap_bound(&window, m0, 2 * m0).is_none() {
        m0 *= 2;
    }
    let mut checks = Vec::new();
    for i in 0..GAP_CHECKS {
        let m = m0 << i;
        let m2 = 2 * m;
        if i > 0 && m2 > MAX_GAP_COLUMNS {
            break;
        }
        let bound = gap_bound(&window, m, m2).expect("valid for larger cutoffs too");
        let gap = cauchy_gap(&x, &row_prefix(window.n, m), &row_prefix(window.n, m2), acc)?;
        let consistent = bound <= gap.hi() && bound <= gap.lo() + &acc.tol;
        checks.push(GapCheck { m, m2, bound, gap, consistent });
    }
    let asymptote = inv_pow4(window.n) * &window.d * &window.d / Rational::from_integer(2.into());
    Ok(NonMembershipWitness {
        window,
        asymptote,
        checks,
    })
}

/// Finds a witness window for `b0` and certifies it.
pub fn refute_membership(b0: &FuncLin, qs: &DenseSeq, depth: u64, acc: &Accuracy) -> Result<NonMembershipWitness> {
    if b0.is_zero_exact() {
        return Err(Error::NotApplicable(
            "b0 = 0 gives the zero family, which is in B^A".into(),
        ));
    }
    let window = find_witness_window(b0, qs, depth, &acc.tol)?;
    certify_window(b0, qs, window, acc)
}

pub(crate) fn serialize_interval<S: serde::Serializer>(i: &Interval, s: S) -> std::result::Result<S::Ok, S::Error> {
    let (lo, hi) = i.to_decimal_pair(DECIMAL_DIGITS);
    [lo, hi].serialize(s)
}

/// Fractional digits when intervals are written as decimals.
pub const DECIMAL_DIGITS: u32 = 20;
