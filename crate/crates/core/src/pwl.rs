//! Exact piecewise-linear functions on `[0, 1]` with rational breakpoints.
//!
//! A [`PwlFunc`] is stored in canonical form: abscissae strictly increase from
//! `0` to `1` and no interior breakpoint is collinear with its neighbours. Two
//! functions are equal as maps iff they are equal as values, which makes the
//! telescoping identities below decidable by `==`.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::rational::{self, Rational};

#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct PwlFunc {
    points: Vec<(Rational, Rational)>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Extremum {
    Min,
    Max,
}

impl PwlFunc {
    /// Builds from breakpoints `(t_i, v_i)`; requires `t_0 = 0`, `t_last = 1`
    /// and strictly increasing abscissae. The result is canonicalized.
    pub fn new(points: Vec<(Rational, Rational)>) -> Result<Self> {
        if points.len() < 2 {
            return Err(Error::Domain("a PWL function needs at least two breakpoints".into()));
        }
        if !points[0].0.is_zero() || !points[points.len() - 1].0.is_one() {
            return Err(Error::Domain("breakpoints must start at 0 and end at 1".into()));
        }
        if points.windows(2).any(|w| w[0].0 >= w[1].0) {
            return Err(Error::Domain("breakpoint abscissae must strictly increase".into()));
        }
        Ok(Self::from_sorted(points))
    }

    fn from_sorted(points: Vec<(Rational, Rational)>) -> Self {
        let mut out: Vec<(Rational, Rational)> = Vec::with_capacity(points.len());
        for p in points {
            while out.len() >= 2 && collinear(&out[out.len() - 2], &out[out.len() - 1], &p) {
                out.pop();
            }
            out.push(p);
        }
        PwlFunc { points: out }
    }

    pub fn constant(c: Rational) -> Self {
        PwlFunc {
            points: vec![(Rational::zero(), c.clone()), (Rational::one(), c)],
        }
    }

    pub fn zero() -> Self {
        Self::constant(Rational::zero())
    }

    pub fn one() -> Self {
        Self::constant(Rational::one())
    }

    /// `t ↦ a + b t`.
    pub fn affine(a: Rational, b: Rational) -> Self {
        let at_one = &a + &b;
        PwlFunc {
            points: vec![(Rational::zero(), a), (Rational::one(), at_one)],
        }
    }

    /// The identity `t ↦ t`.
    pub fn identity() -> Self {
        Self::affine(Rational::zero(), Rational::one())
    }

    /// Re-applies canonicalization; a no-op on every value this type hands out.
    pub fn canonicalize(&self) -> Self {
        Self::from_sorted(self.points.clone())
    }

    pub fn breakpoints(&self) -> &[(Rational, Rational)] {
        &self.points
    }

    pub fn is_zero(&self) -> bool {
        self.points.iter().all(|(_, v)| v.is_zero())
    }

    /// `Some(c)` if the function is the constant `c`.
    pub fn as_constant(&self) -> Option<&Rational> {
        (self.points.len() == 2 && self.points[0].1 == self.points[1].1).then(|| &self.points[0].1)
    }

    pub fn is_nonnegative(&self) -> bool {
        self.points.iter().all(|(_, v)| !v.is_negative())
    }

    pub fn eval(&self, t: &Rational) -> Result<Rational> {
        if t.is_negative() || *t > Rational::one() {
            return Err(Error::Domain(format!("t = {} is outside [0,1]", rational::format(t))));
        }
        Ok(self.eval_unchecked(t))
    }

    fn eval_unchecked(&self, t: &Rational) -> Rational {
        let i = self.points.partition_point(|(x, _)| x <= t);
        if i == 0 {
            return self.points[0].1.clone();
        }
        let (t0, v0) = &self.points[i - 1];
        if t0 == t || i == self.points.len() {
            return v0.clone();
        }
        let (t1, v1) = &self.points[i];
        interpolate(t0, v0, t1, v1, t)
    }

    /// Exact rational linear combination `Σ c_i f_i`.
    pub fn lincomb<'a, I>(terms: I) -> Self
    where
        I: IntoIterator<Item = (Rational, &'a PwlFunc)>,
    {
        let terms: Vec<(Rational, &PwlFunc)> =
            terms.into_iter().filter(|(c, _)| !c.is_zero()).collect();
        if terms.is_empty() {
            return Self::zero();
        }
        // Sweep over slope changes: each term contributes its value at 0,
        // its initial slope and a kink at every interior breakpoint.
        let mut value = Rational::zero();
        let mut kinks: BTreeMap<Rational, Rational> = BTreeMap::new();
        kinks.insert(Rational::one(), Rational::zero());
        for (c, f) in &terms {
            value += c * &f.points[0].1;
            let mut prev = Rational::zero();
            for w in f.points.windows(2) {
                let slope = c * (&w[1].1 - &w[0].1) / (&w[1].0 - &w[0].0);
                *kinks.entry(w[0].0.clone()).or_insert_with(Rational::zero) += &slope - &prev;
                prev = slope;
            }
        }
        let mut slope = Rational::zero();
        let mut t = Rational::zero();
        let mut points = Vec::with_capacity(kinks.len() + 1);
        for (u, delta) in kinks {
            value += &slope * (&u - &t);
            t = u;
            points.push((t.clone(), value.clone()));
            slope += delta;
        }
        Self::from_sorted(points)
    }

    /// Exact pointwise minimum or maximum. Crossing abscissae of the two
    /// graphs are inserted as new breakpoints.
    pub fn meet_join(&self, other: &PwlFunc, mode: Extremum) -> Self {
        let abscissae = merged_abscissae([self, other]);
        let (mut cf, mut cg) = (Cursor::new(self), Cursor::new(other));
        let pick = |a: Rational, b: Rational| match mode {
            Extremum::Min => a.min(b),
            Extremum::Max => a.max(b),
        };
        let mut points = Vec::with_capacity(abscissae.len() * 2);
        let mut prev: Option<(Rational, Rational, Rational)> = None;
        for t in abscissae {
            let (f, g) = (cf.value_at(&t), cg.value_at(&t));
            let d = &f - &g;
            if let Some((t0, _, d0)) = &prev {
                if (d0.is_positive() && d.is_negative()) || (d0.is_negative() && d.is_positive()) {
                    // d is affine on [t0, t]; its root is the crossing.
                    let tc = t0 + (&t - t0) * d0 / (d0 - &d);
                    let fc = self.eval_unchecked(&tc);
                    points.push((tc, fc));
                }
            }
            points.push((t.clone(), pick(f.clone(), g)));
            prev = Some((t, f, d));
        }
        Self::from_sorted(points)
    }

    pub fn pointwise_min(&self, other: &PwlFunc) -> Self {
        self.meet_join(other, Extremum::Min)
    }

    pub fn pointwise_max(&self, other: &PwlFunc) -> Self {
        self.meet_join(other, Extremum::Max)
    }

    /// Clamps values into `[lo, hi]`.
    pub fn clamp_values(&self, lo: Rational, hi: Rational) -> Self {
        self.pointwise_min(&Self::constant(hi)).pointwise_max(&Self::constant(lo))
    }

    /// `sup |f|`, attained at a breakpoint.
    pub fn sup_norm(&self) -> Rational {
        self.points
            .iter()
            .map(|(_, v)| v.abs())
            .max()
            .unwrap_or_else(Rational::zero)
    }

    /// `(min, max)` of the slopes of the segments meeting `[a, b]`; a
    /// Lipschitz bound in the form the mean value theorem needs.
    pub fn slope_range_on(&self, a: &Rational, b: &Rational) -> (Rational, Rational) {
        let mut range: Option<(Rational, Rational)> = None;
        for w in self.points.windows(2) {
            let ((t0, v0), (t1, v1)) = (&w[0], &w[1]);
            if t1 < a || t0 > b {
                continue;
            }
            let s = (v1 - v0) / (t1 - t0);
            range = Some(match range {
                None => (s.clone(), s),
                Some((lo, hi)) => (lo.min(s.clone()), hi.max(s)),
            });
        }
        range.expect("every point of [0,1] lies on a segment")
    }

    /// Exact `(min, max)` of `f` over `[a, b] ⊆ [0, 1]`.
    pub fn range_on(&self, a: &Rational, b: &Rational) -> (Rational, Rational) {
        debug_assert!(a <= b);
        let va = self.eval_unchecked(a);
        let vb = self.eval_unchecked(b);
        let (mut lo, mut hi) = if va <= vb { (va, vb) } else { (vb, va) };
        let start = self.points.partition_point(|(x, _)| x <= a);
        for (x, v) in &self.points[start..] {
            if x >= b {
                break;
            }
            if *v < lo {
                lo = v.clone();
            } else if *v > hi {
                hi = v.clone();
            }
        }
        (lo, hi)
    }

    /// `f ≤ g` everywhere; checking the merged breakpoints suffices.
    pub fn le_pointwise(&self, other: &PwlFunc) -> bool {
        let (mut cf, mut cg) = (Cursor::new(self), Cursor::new(other));
        merged_abscissae([self, other])
            .into_iter()
            .all(|t| cf.value_at(&t) <= cg.value_at(&t))
    }

    pub fn scale(&self, c: &Rational) -> Self {
        if c.is_zero() {
            return Self::zero();
        }
        PwlFunc {
            points: self.points.iter().map(|(t, v)| (t.clone(), v * c)).collect(),
        }
    }
}

fn collinear(a: &(Rational, Rational), b: &(Rational, Rational), c: &(Rational, Rational)) -> bool {
    (&b.1 - &a.1) * (&c.0 - &b.0) == (&c.1 - &b.1) * (&b.0 - &a.0)
}

fn interpolate(t0: &Rational, v0: &Rational, t1: &Rational, v1: &Rational, t: &Rational) -> Rational {
    v0 + (v1 - v0) * (t - t0) / (t1 - t0)
}

fn merged_abscissae<'a>(fs: impl IntoIterator<Item = &'a PwlFunc>) -> Vec<Rational> {
    let set: BTreeSet<&Rational> = fs
        .into_iter()
        .flat_map(|f| f.points.iter().map(|(t, _)| t))
        .collect();
    set.into_iter().cloned().collect()
}

/// Evaluates a function at non-decreasing abscissae in amortized O(1).
struct Cursor<'a> {
    f: &'a PwlFunc,
    seg: usize,
}

impl<'a> Cursor<'a> {
    fn new(f: &'a PwlFunc) -> Self {
        Cursor { f, seg: 0 }
    }

    fn value_at(&mut self, t: &Rational) -> Rational {
        let pts = &self.f.points;
        while self.seg + 1 < pts.len() - 1 && pts[self.seg + 1].0 <= *t {
            self.seg += 1;
        }
        let (t0, v0) = &pts[self.seg];
        let (t1, v1) = &pts[self.seg + 1];
        if t == t0 {
            v0.clone()
        } else if t == t1 {
            v1.clone()
        } else {
            interpolate(t0, v0, t1, v1, t)
        }
    }
}

/// `f_{q,m}(t) = max(0, min(1, m(q − t)))`, with `f_{q,0} = 0`.
pub fn make_f(q: &Rational, m: u64) -> Result<PwlFunc> {
    check_q(q)?;
    if m == 0 {
        return Ok(PwlFunc::zero());
    }
    let m = Rational::from_integer(m.into());
    // The affine piece t ↦ mq − mt, clamped into [0, 1].
    let ramp = PwlFunc::affine(&m * q, -m);
    Ok(ramp.clamp_values(Rational::zero(), Rational::one()))
}

/// `|ψ_{q,m}|² = f_{q,m} − f_{q,m−1}`, the radicand of the telescoping family.
pub fn psi_sq(q: &Rational, m: u64) -> Result<PwlFunc> {
    if m == 0 {
        return Err(Error::Parameter("psi_sq needs m ≥ 1".into()));
    }
    let hi = make_f(q, m)?;
    let lo = make_f(q, m - 1)?;
    Ok(&hi - &lo)
}

/// V-shaped `t ↦ |t − c|`, vanishing only at `c`.
pub fn hat(c: &Rational) -> Result<PwlFunc> {
    if c.is_negative() || *c > Rational::one() {
        return Err(Error::Parameter("hat centre must lie in [0,1]".into()));
    }
    let down = PwlFunc::affine(c.clone(), -Rational::one());
    let up = PwlFunc::affine(-c.clone(), Rational::one());
    Ok(down.pointwise_max(&up))
}

fn check_q(q: &Rational) -> Result<()> {
    if !q.is_positive() || *q > Rational::one() {
        return Err(Error::Parameter(format!("q = {} is not in (0,1]", rational::format(q))));
    }
    Ok(())
}

impl Add for &PwlFunc {
    type Output = PwlFunc;
    fn add(self, rhs: &PwlFunc) -> PwlFunc {
        PwlFunc::lincomb([(Rational::one(), self), (Rational::one(), rhs)])
    }
}

impl Sub for &PwlFunc {
    type Output = PwlFunc;
    fn sub(self, rhs: &PwlFunc) -> PwlFunc {
        PwlFunc::lincomb([(Rational::one(), self), (-Rational::one(), rhs)])
    }
}

impl Neg for &PwlFunc {
    type Output = PwlFunc;
    fn neg(self) -> PwlFunc {
        self.scale(&-Rational::one())
    }
}

impl Mul<&Rational> for &PwlFunc {
    type Output = PwlFunc;
    fn mul(self, c: &Rational) -> PwlFunc {
        self.scale(c)
    }
}

impl fmt::Debug for PwlFunc {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("Pwl[")?;
        for (i, (t, v)) in self.points.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "({t}, {v})")?;
        }
        f.write_str("]")
    }
}

impl Serialize for PwlFunc {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        use serde::ser::SerializeSeq;
        let mut seq = s.serialize_seq(Some(self.points.len()))?;
        for (t, v) in &self.points {
            seq.serialize_element(&[rational::format(t), rational::format(v)])?;
        }
        seq.end()
    }
}

impl<'de> Deserialize<'de> for PwlFunc {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let raw: Vec<[String; 2]> = Vec::deserialize(d)?;
        let points = raw
            .iter()
            .map(|[t, v]| Ok((rational::parse(t)?, rational::parse(v)?)))
            .collect::<Result<Vec<_>>>()
            .map_err(serde::de::Error::custom)?;
        PwlFunc::new(points).map_err(serde::de::Error::custom)
    }
}
