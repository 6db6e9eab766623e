//! Finite-truncation evidence for `F^⊥ = 0`.
//!
//! Orthogonality to the generators `S` is the same as orthogonality to the
//! closed submodule `F` they generate, because `⟨ζ·b, x⟩ = b*⟨ζ, x⟩`; so
//! only the generators are probed.

use std::collections::BTreeMap;

use num_traits::Zero;
use serde::Serialize;

use super::construction::zeta;
use super::refutation::{refute_membership, serialize_interval, solve_constraints, NonMembershipWitness};
use super::DenseSeq;
use crate::enclosure::{sup_norm_enclosure, Accuracy};
use crate::error::{Error, Result};
use crate::expr::FuncLin;
use crate::interval::{Interval, DEFAULT_PRECISION};
use crate::module::{inner_product, sqrt_of_sup, IndexA, ModuleElement};
use crate::rational::{inv_pow4, Rational};

/// Caps on how far the excluded region is enumerated before falling back
/// to the analytic tail bound.
const MAX_EXTRA_ROWS: u64 = 48;
const MAX_COLUMNS: u64 = 1 << 14;
/// The box stops growing once this many generators have been evaluated; the
/// remaining tail bound then enters the upper end of the residual.
const MAX_GENERATORS: usize = 4096;

#[derive(Clone, Debug, Serialize)]
pub struct ProbeReport {
    pub rows: u64,
    pub columns: u64,
    /// Number of `ζ_{n,m}` with `n ≤ rows`, `m ≤ columns`.
    pub included: usize,
    /// Included generators whose inner product with the truncation is not
    /// exactly zero. Empty on success.
    pub nonorthogonal: Vec<String>,
    /// Enclosure of `sup ‖⟨ζ_{n,m}, x⟩‖` over the excluded generators.
    #[serde(serialize_with = "serialize_interval")]
    pub residual: Interval,
    /// Excluded generator attaining the lower end of `residual`.
    pub residual_at: Option<String>,
    /// Present whenever `b0 ≠ 0`.
    pub witness: Option<NonMembershipWitness>,
}

impl ProbeReport {
    pub fn all_orthogonal(&self) -> bool {
        self.nonorthogonal.is_empty()
    }
}

/// Truncation of `solve_constraints(b0)` to `{0} ∪ {(n,m): n ≤ rows, m ≤ columns}`.
pub fn truncated_candidate(b0: &FuncLin, rows: u64, columns: u64, qs: &DenseSeq) -> ModuleElement<IndexA> {
    let x = solve_constraints(b0, qs);
    let mut indices = vec![IndexA::Zero];
    for n in 1..=rows {
        indices.extend((1..=columns).map(|m| IndexA::Pair(n, m)));
    }
    x.restrict(&indices)
}

/// Builds the truncated candidate and reports (a) exact orthogonality to
/// every included `ζ`, (b) the residual against the excluded ones, and
/// (c) the certificate that no extension inside `E` removes that residual.
pub fn complement_probe(
    b0: &FuncLin,
    rows: u64,
    columns: u64,
    qs: &DenseSeq,
    depth: u64,
    acc: &Accuracy,
) -> Result<ProbeReport> {
    if rows == 0 || columns == 0 {
        return Err(Error::Parameter("truncation sizes must be >= 1".into()));
    }
    let x = truncated_candidate(b0, rows, columns, qs);

    let mut nonorthogonal = Vec::new();
    for n in 1..=rows {
        for m in 1..=columns {
            if !inner_product(&zeta(n, m, qs)?, &x).is_zero_exact() {
                nonorthogonal.push(IndexA::Pair(n, m).to_string());
            }
        }
    }

    let (residual, residual_at) = residual(b0, &x, rows, columns, qs, acc)?;

    let witness = if b0.is_zero_exact() {
        None
    } else {
        Some(refute_membership(b0, qs, depth, acc)?)
    };

    Ok(ProbeReport {
        rows,
        columns,
        included: (rows * columns) as usize,
        nonorthogonal,
        residual,
        residual_at,
        witness,
    })
}

/// Enclosure of `sup ‖⟨ζ_{n,m}, x⟩‖` over all `(n, m)` outside the
/// truncation. Generators inside a growing box are evaluated; everything
/// beyond it is covered by `‖2^{-n} ψ_{q_n,m} b0‖² ≤ 4^{-n} min(q_n, 1/m) ‖b0‖²`.
fn residual(
    b0: &FuncLin,
    x: &ModuleElement<IndexA>,
    rows: u64,
    columns: u64,
    qs: &DenseSeq,
    acc: &Accuracy,
) -> Result<(Interval, Option<String>)> {
    let prec = DEFAULT_PRECISION;
    if b0.is_zero_exact() {
        return Ok((Interval::zero(prec), None));
    }
    let b0_sq_sup = sup_norm_enclosure(&b0.mul(b0), &acc.tol, acc.budget)?.hi();

    // Squared sup enclosures of the excluded generators evaluated so far.
    let mut seen: BTreeMap<IndexA, (FuncLin, Interval)> = BTreeMap::new();
    let (mut box_rows, mut box_cols) = (rows + 1, columns + 1);
    let tail_sq = loop {
        for n in 1..=box_rows {
            let first = if n <= rows { columns + 1 } else { 1 };
            for m in first..=box_cols {
                let a = IndexA::Pair(n, m);
                if seen.contains_key(&a) {
                    continue;
                }
                let v = inner_product(&zeta(n, m, qs)?, x);
                let sq = sup_norm_enclosure(&v.mul(&v), &acc.tol, acc.budget)?;
                seen.insert(a, (v, sq));
            }
        }
        let lower_sq = seen.values().map(|(_, s)| s.lo()).max().unwrap_or_else(Rational::zero);
        let row_tail = inv_pow4(box_rows + 1) * &b0_sq_sup;
        let col_tail = &b0_sq_sup / Rational::from_integer((4 * (box_cols + 1)).into());
        let tail = row_tail.clone().max(col_tail.clone());
        let can_grow =
            (box_rows < rows + MAX_EXTRA_ROWS || box_cols < MAX_COLUMNS) && seen.len() < MAX_GENERATORS;
        if tail <= lower_sq || !can_grow {
            break tail;
        }
        if row_tail >= col_tail && box_rows < rows + MAX_EXTRA_ROWS {
            box_rows += 1;
        } else {
            box_cols = (box_cols * 2).min(MAX_COLUMNS);
        }
    };

    let lower_sq = seen.values().map(|(_, s)| s.lo()).max().unwrap_or_else(Rational::zero);
    let mut lo = Rational::zero();
    let mut hi = Interval::from_rationals(&tail_sq, &tail_sq, prec)
        .sqrt()
        .expect("nonnegative")
        .hi();
    let mut at = None;
    for (a, (v, sq)) in &seen {
        if sq.hi() < lower_sq {
            continue;
        }
        let root = sqrt_of_sup(&v.mul(v), acc)?;
        if at.is_none() || root.lo() > lo {
            lo = root.lo();
            at = Some(a.to_string());
        }
        hi = hi.max(root.hi());
    }
    Ok((Interval::from_rationals(&lo, &hi, prec), at))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pwl::PwlFunc;
    use crate::rational::{int, pow2, ratio};

    #[test]
    fn unit_b0_small_truncation() {
        let acc = Accuracy::new(pow2(-20), 1_000_000).unwrap();
        let r = complement_probe(&FuncLin::one(), 2, 3, &DenseSeq::Dyadic, 64, &acc).unwrap();
        assert!(r.all_orthogonal());
        assert_eq!(r.included, 6);
        assert_eq!((r.residual.lo(), r.residual.hi()), (ratio(1, 4), ratio(1, 4)));
        assert_eq!(r.residual_at.as_deref(), Some("1:4"));
        assert!(r.witness.as_ref().unwrap().consistent());
    }

    #[test]
    fn zero_b0() {
        let r = complement_probe(&FuncLin::zero(), 3, 5, &DenseSeq::Dyadic, 64, &Accuracy::default()).unwrap();
        assert!(r.all_orthogonal());
        assert_eq!(r.residual.hi(), int(0));
        assert!(r.witness.is_none());
    }

    #[test]
    fn identity_b0() {
        let acc = Accuracy::new(pow2(-16), 1_000_000).unwrap();
        let b0 = FuncLin::pwl(PwlFunc::identity());
        let r = complement_probe(&b0, 2, 3, &DenseSeq::Dyadic, 64, &acc).unwrap();
        assert!(r.all_orthogonal());
        assert!(r.residual.width() <= acc.tol);
        // Row 1, column 4: (1/2)·sup_t t·√(min(1, 4(1−t)) − min(1, 3(1−t)))
        assert!(r.residual.lo() > int(0));
        assert!(r.residual.hi() <= ratio(1, 4));
    }

    #[test]
    fn rejects_empty_truncation() {
        assert!(complement_probe(&FuncLin::one(), 0, 3, &DenseSeq::Dyadic, 8, &Accuracy::default()).is_err());
    }
}
