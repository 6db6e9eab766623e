//! Outward-rounded intervals with dyadic endpoints.
//!
//! An [`Interval`] stores integers `lo`, `hi` and a precision `p`; it denotes
//! `[lo / 2^p, hi / 2^p]`. Every operation rounds the lower endpoint down and
//! the upper endpoint up onto the `2^{-p}` grid, so any real value computed
//! from enclosed operands is enclosed by the result.

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::{BigInt, Sign};
use num_integer::Integer;
use num_traits::{Signed, Zero};

use crate::rational::Rational;

/// Fractional bits used unless a caller asks otherwise.
pub const DEFAULT_PRECISION: u32 = 128;

#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Interval {
    lo: BigInt,
    hi: BigInt,
    prec: u32,
}

fn floor_div(n: &BigInt, d: &BigInt) -> BigInt {
    n.div_floor(d)
}

fn ceil_div(n: &BigInt, d: &BigInt) -> BigInt {
    -((-n).div_floor(d))
}

fn shr_floor(n: &BigInt, k: u32) -> BigInt {
    // `>>` on BigInt rounds toward negative infinity.
    n >> k
}

fn shr_ceil(n: &BigInt, k: u32) -> BigInt {
    -((-n) >> k)
}

impl Interval {
    pub fn from_scaled(lo: BigInt, hi: BigInt, prec: u32) -> Self {
        assert!(lo <= hi, "interval endpoints out of order");
        Interval { lo, hi, prec }
    }

    pub fn zero(prec: u32) -> Self {
        Interval::from_scaled(BigInt::zero(), BigInt::zero(), prec)
    }

    /// Tightest enclosure of `[a, b]` on the grid.
    pub fn from_rationals(a: &Rational, b: &Rational, prec: u32) -> Self {
        let scale = BigInt::from(1) << prec;
        let lo = floor_div(&(a.numer() * &scale), a.denom());
        let hi = ceil_div(&(b.numer() * &scale), b.denom());
        Interval::from_scaled(lo, hi, prec)
    }

    pub fn point(a: &Rational, prec: u32) -> Self {
        Self::from_rationals(a, a, prec)
    }

    pub fn unit(prec: u32) -> Self {
        Self::from_rationals(&Rational::zero(), &Rational::from_integer(1.into()), prec)
    }

    pub fn precision(&self) -> u32 {
        self.prec
    }

    pub fn lo(&self) -> Rational {
        Rational::new(self.lo.clone(), BigInt::from(1) << self.prec)
    }

    pub fn hi(&self) -> Rational {
        Rational::new(self.hi.clone(), BigInt::from(1) << self.prec)
    }

    pub fn width(&self) -> Rational {
        Rational::new(&self.hi - &self.lo, BigInt::from(1) << self.prec)
    }

    /// Dyadic midpoint, exact.
    pub fn midpoint(&self) -> Rational {
        Rational::new(&self.lo + &self.hi, BigInt::from(1) << (self.prec + 1))
    }

    pub fn is_point(&self) -> bool {
        self.lo == self.hi
    }

    pub fn contains(&self, x: &Rational) -> bool {
        self.lo() <= *x && *x <= self.hi()
    }

    pub fn contains_zero(&self) -> bool {
        !self.lo.is_positive() && !self.hi.is_negative()
    }

    /// `self ⊆ other`.
    pub fn subset_of(&self, other: &Interval) -> bool {
        let (a, b) = align(self, other);
        a.lo >= b.lo && a.hi <= b.hi
    }

    pub fn hull(&self, other: &Interval) -> Interval {
        let (a, b) = align(self, other);
        Interval::from_scaled(a.lo.min(b.lo), a.hi.max(b.hi), a.prec)
    }

    /// `self ∩ other`, or `None` if they are disjoint.
    pub fn intersect(&self, other: &Interval) -> Option<Interval> {
        let (a, b) = align(self, other);
        let (lo, hi) = (a.lo.max(b.lo), a.hi.min(b.hi));
        (lo <= hi).then(|| Interval::from_scaled(lo, hi, a.prec))
    }

    /// Splits at the midpoint, refining the grid by one bit if needed.
    pub fn bisect(&self) -> (Interval, Interval) {
        let (lo, hi, prec) = if (&self.lo + &self.hi).is_even() {
            (self.lo.clone(), self.hi.clone(), self.prec)
        } else {
            (&self.lo << 1u32, &self.hi << 1u32, self.prec + 1)
        };
        let mid: BigInt = (&lo + &hi) >> 1u32;
        (
            Interval::from_scaled(lo, mid.clone(), prec),
            Interval::from_scaled(mid, hi, prec),
        )
    }

    /// Upper bound of `|x|` over the interval.
    pub fn mag(&self) -> Rational {
        Rational::new(self.lo.abs().max(self.hi.abs()), BigInt::from(1) << self.prec)
    }

    /// Lower bound of `|x|` over the interval (zero if it straddles zero).
    pub fn mig(&self) -> Rational {
        Rational::new(self.mig_scaled(), BigInt::from(1) << self.prec)
    }

    fn mig_scaled(&self) -> BigInt {
        if self.lo.is_positive() {
            self.lo.clone()
        } else if self.hi.is_negative() {
            -self.hi.clone()
        } else {
            BigInt::zero()
        }
    }

    /// `{|x| : x ∈ self}`.
    pub fn abs(&self) -> Interval {
        let hi = self.lo.abs().max(self.hi.abs());
        Interval::from_scaled(self.mig_scaled(), hi, self.prec)
    }

    /// `{x² : x ∈ self}`; tighter than `self * self`.
    pub fn square(&self) -> Interval {
        let a = self.abs();
        let lo = shr_floor(&(&a.lo * &a.lo), self.prec);
        let hi = shr_ceil(&(&a.hi * &a.hi), self.prec);
        Interval::from_scaled(lo, hi, self.prec)
    }

    pub fn powi(&self, k: u32) -> Interval {
        match k {
            0 => Interval::point(&Rational::from_integer(1.into()), self.prec),
            1 => self.clone(),
            _ if k.is_multiple_of(2) => self.powi(k / 2).square(),
            _ => &self.powi(k - 1) * self,
        }
    }

    /// Square root of the nonnegative part; `None` if the interval lies
    /// strictly below zero.
    pub fn sqrt(&self) -> Option<Interval> {
        if self.hi.is_negative() {
            return None;
        }
        let lo = if self.lo.is_positive() {
            (&self.lo << self.prec).sqrt()
        } else {
            BigInt::zero()
        };
        let hi_sq = &self.hi << self.prec;
        let mut hi = hi_sq.sqrt();
        if &hi * &hi < hi_sq {
            hi += 1;
        }
        Some(Interval::from_scaled(lo, hi, self.prec))
    }

    pub fn scale(&self, c: &Rational) -> Interval {
        let (n, d) = (c.numer(), c.denom());
        let (a, b) = (&self.lo * n, &self.hi * n);
        let (a, b) = if n.sign() == Sign::Minus { (b, a) } else { (a, b) };
        Interval::from_scaled(floor_div(&a, d), ceil_div(&b, d), self.prec)
    }

    /// Endpoints as decimal strings with `digits` fractional digits, rounded
    /// outward.
    pub fn to_decimal_pair(&self, digits: u32) -> (String, String) {
        let ten = num_traits::pow(BigInt::from(10), digits as usize);
        let one = BigInt::from(1) << self.prec;
        let lo = floor_div(&(&self.lo * &ten), &one);
        let hi = ceil_div(&(&self.hi * &ten), &one);
        (fixed_decimal(&lo, digits), fixed_decimal(&hi, digits))
    }
}

fn fixed_decimal(scaled: &BigInt, digits: u32) -> String {
    let neg = scaled.is_negative();
    let s = scaled.abs().to_string();
    let s = if s.len() <= digits as usize {
        format!("{}{}", "0".repeat(digits as usize + 1 - s.len()), s)
    } else {
        s
    };
    let (int, frac) = s.split_at(s.len() - digits as usize);
    let sign = if neg { "-" } else { "" };
    if digits == 0 {
        format!("{sign}{int}")
    } else {
        format!("{sign}{int}.{frac}")
    }
}

/// Brings both operands to the finer of the two grids (exact).
fn align(a: &Interval, b: &Interval) -> (Interval, Interval) {
    match a.prec.cmp(&b.prec) {
        Ordering::Equal => (a.clone(), b.clone()),
        Ordering::Less => (a.refine(b.prec), b.clone()),
        Ordering::Greater => (a.clone(), b.refine(a.prec)),
    }
}

impl Interval {
    fn refine(&self, prec: u32) -> Interval {
        let k = prec - self.prec;
        Interval::from_scaled(&self.lo << k, &self.hi << k, prec)
    }
}

impl Add for &Interval {
    type Output = Interval;
    fn add(self, rhs: &Interval) -> Interval {
        let (a, b) = align(self, rhs);
        Interval::from_scaled(a.lo + b.lo, a.hi + b.hi, a.prec)
    }
}

impl Sub for &Interval {
    type Output = Interval;
    fn sub(self, rhs: &Interval) -> Interval {
        self + &(-rhs)
    }
}

impl Neg for &Interval {
    type Output = Interval;
    fn neg(self) -> Interval {
        Interval::from_scaled(-self.hi.clone(), -self.lo.clone(), self.prec)
    }
}

impl Mul for &Interval {
    type Output = Interval;
    fn mul(self, rhs: &Interval) -> Interval {
        let (a, b) = align(self, rhs);
        let products = [&a.lo * &b.lo, &a.lo * &b.hi, &a.hi * &b.lo, &a.hi * &b.hi];
        let min = products.iter().min().unwrap();
        let max = products.iter().max().unwrap();
        Interval::from_scaled(shr_floor(min, a.prec), shr_ceil(max, a.prec), a.prec)
    }
}

impl fmt::Display for Interval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let (lo, hi) = self.to_decimal_pair(12);
        write!(f, "[{lo}, {hi}]")
    }
}

impl fmt::Debug for Interval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Interval({} .. {} @2^-{})", self.lo(), self.hi(), self.prec)
    }
}
