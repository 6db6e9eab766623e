//! Validated sup-norm enclosures by interval branch-and-bound.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};
use crate::expr::FuncLin;
use crate::interval::{Interval, DEFAULT_PRECISION};
use crate::rational::{pow2, Rational};

/// `2^{-30}`.
pub fn default_tol() -> Rational {
    pow2(-30)
}

pub const DEFAULT_BUDGET: usize = 1_000_000;

/// Target width and evaluation budget for enclosure computations.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Accuracy {
    pub tol: Rational,
    pub budget: usize,
}

impl Default for Accuracy {
    fn default() -> Self {
        Accuracy {
            tol: default_tol(),
            budget: DEFAULT_BUDGET,
        }
    }
}

impl Accuracy {
    pub fn new(tol: Rational, budget: usize) -> Result<Self> {
        if !tol.is_positive() {
            return Err(Error::Parameter("tol must be positive".into()));
        }
        if budget == 0 {
            return Err(Error::Parameter("budget must be positive".into()));
        }
        Ok(Accuracy { tol, budget })
    }
}

struct Cell {
    dom: Interval,
    upper: Rational,
}

impl PartialEq for Cell {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Cell {}

impl PartialOrd for Cell {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Cell {
    // Max-heap on the upper bound; ties go to the leftmost cell so the
    // search order, and hence the result, is reproducible.
    fn cmp(&self, other: &Self) -> Ordering {
        self.upper
            .cmp(&other.upper)
            .then_with(|| other.dom.lo().cmp(&self.dom.lo()))
    }
}

/// Encloses `sup_{t ∈ [0,1]} |x(t)|` in `[lo, hi]` with `hi − lo ≤ tol`.
///
/// PWL-only values are answered exactly from the breakpoints. Otherwise
/// `[0, 1]` is bisected, always refining the cell with the largest upper
/// bound; cells whose upper bound falls below the best certified point value
/// are discarded. Each cell or point evaluation counts against `budget`.
pub fn sup_norm_enclosure(x: &FuncLin, tol: &Rational, budget: usize) -> Result<Interval> {
    if !tol.is_positive() {
        return Err(Error::Parameter("tol must be positive".into()));
    }
    if budget == 0 {
        return Err(Error::Parameter("budget must be positive".into()));
    }
    let prec = DEFAULT_PRECISION;
    if let Some(g) = x.as_pwl() {
        return Ok(Interval::point(&g.sup_norm(), prec));
    }

    let x = &x.compact();
    let evaluations = std::cell::Cell::new(0usize);
    let eval = |a: &Rational, b: &Rational| {
        evaluations.set(evaluations.get() + 1);
        x.eval_centered_unchecked(a, b, prec)
    };

    let mut lower = Rational::zero();
    for t in [Rational::zero(), Rational::one()] {
        lower = lower.max(eval(&t, &t).mig());
    }
    let root = Interval::unit(0);
    let upper = eval(&root.lo(), &root.hi()).mag();
    let mut heap = BinaryHeap::new();
    heap.push(Cell { dom: root, upper });

    loop {
        let Some(top) = heap.peek() else {
            return Ok(Interval::from_rationals(&lower, &lower, prec));
        };
        if &top.upper - &lower <= *tol {
            return Ok(Interval::from_rationals(&lower, &top.upper, prec));
        }
        if evaluations.get() >= budget {
            let best = Interval::from_rationals(&lower, &top.upper, prec);
            return Err(Error::Budget { evaluations: evaluations.get(), best });
        }
        let cell = heap.pop().expect("peeked");
        let mid = cell.dom.midpoint();
        lower = lower.max(eval(&mid, &mid).mig());
        let (left, right) = cell.dom.bisect();
        for dom in [left, right] {
            let upper = eval(&dom.lo(), &dom.hi()).mag();
            if upper >= lower {
                heap.push(Cell { dom, upper });
            }
        }
    }
}

/// Certified lower bound on `|x|` over `[a, b]`. Returns zero when no
/// positive bound can be certified with cells down to width
/// `(b − a) / 2^max_depth`.
pub fn min_magnitude(x: &FuncLin, a: &Rational, b: &Rational, max_depth: u32) -> Result<Rational> {
    if a.is_negative() || *b > Rational::one() || a > b {
        return Err(Error::Domain("window must be a subinterval of [0,1]".into()));
    }
    if let Some(g) = x.as_pwl() {
        let (lo, hi) = g.range_on(a, b);
        return Ok(if lo.is_positive() {
            lo
        } else if hi.is_negative() {
            -hi
        } else {
            Rational::zero()
        });
    }
    let prec = DEFAULT_PRECISION;
    let x = &x.compact();
    let mut best: Option<Rational> = None;
    let mut stack = vec![(a.clone(), b.clone(), 0u32)];
    while let Some((lo, hi, depth)) = stack.pop() {
        let mig = x.eval_on_unchecked(&lo, &hi, prec).mig();
        if mig.is_positive() {
            best = Some(best.map_or(mig.clone(), |m| m.min(mig)));
        } else if depth < max_depth {
            let mid = (&lo + &hi) / Rational::from_integer(2.into());
            stack.push((mid.clone(), hi, depth + 1));
            stack.push((lo, mid, depth + 1));
        } else {
            return Ok(Rational::zero());
        }
    }
    Ok(best.unwrap_or_else(Rational::zero))
}
