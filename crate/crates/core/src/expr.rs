//! Formal rational-linear combinations of function atoms on `[0, 1]`.
//!
//! [`FuncLin`] is the scalar type of the module layer: an element of `C[0,1]`
//! written as `Σ c_i · atom_i` with atoms drawn from
//!
//! * `Pwl(g)`: an exact piecewise-linear function,
//! * `SqrtPwl(g)`: `√g` for a nonnegative piecewise-linear `g`,
//! * `Product(a_1, …, a_k)`: a finite product of the two kinds above.
//!
//! Values are kept in a canonical form so that exact cancellation is
//! structural:
//!
//! * all `Pwl` terms are summed into a single atom (constants are the
//!   coefficient of `Pwl(1)`);
//! * inside a product `SqrtPwl(g) · SqrtPwl(g)` is rewritten to `Pwl(g)`,
//!   factors are sorted, constant factors are pulled into the coefficient
//!   and `Pwl` factors are scaled to unit sup norm with a positive first
//!   nonzero value.
//!
//! Cross terms such as `√g · √h` with `g ≠ h` stay symbolic and are handled
//! by interval evaluation only.

use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::interval::{Interval, DEFAULT_PRECISION};
use crate::pwl::PwlFunc;
use crate::rational::{self, Rational};

#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Atom {
    Pwl(PwlFunc),
    SqrtPwl(PwlFunc),
    Product(Vec<Atom>),
}

impl Atom {
    fn one() -> Atom {
        Atom::Pwl(PwlFunc::one())
    }

    fn is_one(&self) -> bool {
        matches!(self, Atom::Pwl(g) if g.as_constant().is_some_and(|c| c.is_one()))
    }

    /// Enclosure of the atom's range over `[a, b]`.
    fn eval_on(&self, a: &Rational, b: &Rational, prec: u32) -> Interval {
        match self {
            Atom::Pwl(g) => {
                let (lo, hi) = g.range_on(a, b);
                Interval::from_rationals(&lo, &hi, prec)
            }
            Atom::SqrtPwl(g) => {
                let (lo, hi) = g.range_on(a, b);
                Interval::from_rationals(&lo, &hi, prec)
                    .sqrt()
                    .expect("radicand of a canonical SqrtPwl atom is nonnegative")
            }
            Atom::Product(factors) => {
                let mut acc = Interval::point(&Rational::one(), prec);
                let mut i = 0;
                while i < factors.len() {
                    let mut j = i + 1;
                    while j < factors.len() && factors[j] == factors[i] {
                        j += 1;
                    }
                    let base = factors[i].eval_on(a, b, prec);
                    acc = &acc * &base.powi((j - i) as u32);
                    i = j;
                }
                acc
            }
        }
    }

    /// Enclosure of the derivative over `[a, b]`, or `None` where it is
    /// unbounded (a square root touching zero).
    fn slope_on(&self, a: &Rational, b: &Rational, prec: u32) -> Option<Interval> {
        match self {
            Atom::Pwl(g) => {
                let (lo, hi) = g.slope_range_on(a, b);
                Some(Interval::from_rationals(&lo, &hi, prec))
            }
            Atom::SqrtPwl(g) => {
                let (lo, _) = g.range_on(a, b);
                if !lo.is_positive() {
                    return None;
                }
                let (slo, shi) = g.slope_range_on(a, b);
                let root = self.eval_on(a, b, prec);
                // g' / (2√g) with √g ≥ root.lo > 0.
                let inv = Interval::from_rationals(&root.hi().recip(), &root.lo().recip(), prec);
                let half = Rational::new(1.into(), 2.into());
                Some((&Interval::from_rationals(&slo, &shi, prec) * &inv).scale(&half))
            }
            Atom::Product(factors) => {
                let mut value = Interval::point(&Rational::one(), prec);
                let mut slope = Interval::zero(prec);
                for f in factors {
                    let (v, d) = (f.eval_on(a, b, prec), f.slope_on(a, b, prec)?);
                    slope = &(&slope * &v) + &(&value * &d);
                    value = &value * &v;
                }
                Some(slope)
            }
        }
    }

    fn fmt_short(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Atom::Pwl(g) => match g.as_constant() {
                Some(c) => write!(f, "{c}"),
                None => write!(f, "pwl{}", short_points(g)),
            },
            Atom::SqrtPwl(g) => write!(f, "sqrt(pwl{})", short_points(g)),
            Atom::Product(fs) => {
                for (i, a) in fs.iter().enumerate() {
                    if i > 0 {
                        f.write_str("*")?;
                    }
                    a.fmt_short(f)?;
                }
                Ok(())
            }
        }
    }
}

fn short_points(g: &PwlFunc) -> String {
    let pts: Vec<String> = g
        .breakpoints()
        .iter()
        .map(|(t, v)| format!("({t},{v})"))
        .collect();
    format!("[{}]", pts.join(" "))
}

/// Splits `g` into `(s, ĝ)` with `g = s·ĝ`, `sup|ĝ| = 1` and the first
/// nonzero value of `ĝ` positive. Constants come back as `(c, None)`.
fn normalize_pwl_factor(g: &PwlFunc) -> (Rational, Option<PwlFunc>) {
    if let Some(c) = g.as_constant() {
        return (c.clone(), None);
    }
    let sup = g.sup_norm();
    let first = g
        .breakpoints()
        .iter()
        .map(|(_, v)| v)
        .find(|v| !v.is_zero())
        .expect("nonconstant function has a nonzero value");
    let s = if first.is_negative() { -sup } else { sup };
    let unit = g.scale(&s.recip());
    (s, Some(unit))
}

/// Exact square root of a nonnegative rational, if it has one.
fn rational_sqrt(c: &Rational) -> Option<Rational> {
    let (n, d) = (c.numer(), c.denom());
    let (rn, rd) = (n.sqrt(), d.sqrt());
    (&rn * &rn == *n && &rd * &rd == *d).then(|| Rational::new(rn, rd))
}

/// Multiplies a list of canonical non-product factors into `(coefficient,
/// atom)`, applying the rewrite rule. `None` means the product is zero.
fn multiply_factors(mut factors: Vec<Atom>) -> Option<(Rational, Atom)> {
    let mut coeff = Rational::one();
    factors.sort();
    // Pair off equal square roots.
    let mut out: Vec<Atom> = Vec::with_capacity(factors.len());
    let mut i = 0;
    while i < factors.len() {
        if let Atom::SqrtPwl(g) = &factors[i] {
            if i + 1 < factors.len() && factors[i + 1] == factors[i] {
                match normalize_pwl_factor(g) {
                    (s, Some(unit)) => {
                        coeff *= s;
                        out.push(Atom::Pwl(unit));
                    }
                    (s, None) => coeff *= s,
                }
                i += 2;
                continue;
            }
        }
        out.push(factors[i].clone());
        i += 1;
    }
    if coeff.is_zero() {
        return None;
    }
    out.sort();
    match out.len() {
        0 => Some((coeff, Atom::one())),
        1 => Some((coeff, out.pop().unwrap())),
        _ => Some((coeff, Atom::Product(out))),
    }
}

fn factors_of(atom: &Atom) -> Vec<Atom> {
    match atom {
        Atom::Product(fs) => fs.clone(),
        a if a.is_one() => Vec::new(),
        Atom::Pwl(g) => match normalize_pwl_factor(g) {
            // Constant factors only reach here as `Pwl(1)`.
            (_, None) => Vec::new(),
            (_, Some(unit)) => vec![Atom::Pwl(unit)],
        },
        a => vec![a.clone()],
    }
}

/// Scalar that `factors_of` dropped from a top-level `Pwl` atom.
fn factor_scale(atom: &Atom) -> Rational {
    match atom {
        Atom::Pwl(g) => normalize_pwl_factor(g).0,
        _ => Rational::one(),
    }
}

fn mul_atoms(a: &Atom, b: &Atom) -> Option<(Rational, Atom)> {
    let scale = factor_scale(a) * factor_scale(b);
    if scale.is_zero() {
        return None;
    }
    let mut fs = factors_of(a);
    fs.extend(factors_of(b));
    multiply_factors(fs).map(|(c, atom)| (c * scale, atom))
}

/// Accumulates terms and produces the canonical form.
#[derive(Default)]
struct Builder {
    pwl: Vec<(Rational, PwlFunc)>,
    atoms: BTreeMap<Atom, Rational>,
}

impl Builder {
    fn push(&mut self, c: Rational, atom: Atom) {
        if c.is_zero() {
            return;
        }
        match atom {
            Atom::Pwl(g) => self.pwl.push((c, g)),
            other => {
                let slot = self.atoms.entry(other).or_insert_with(Rational::zero);
                *slot += c;
            }
        }
    }

    fn finish(self) -> FuncLin {
        let mut terms: BTreeMap<Atom, Rational> =
            self.atoms.into_iter().filter(|(_, c)| !c.is_zero()).collect();
        if !self.pwl.is_empty() {
            let g = PwlFunc::lincomb(self.pwl.iter().map(|(c, g)| (c.clone(), g)));
            if let Some(c) = g.as_constant() {
                if !c.is_zero() {
                    terms.insert(Atom::one(), c.clone());
                }
            } else {
                terms.insert(Atom::Pwl(g), Rational::one());
            }
        }
        FuncLin { terms }
    }
}

/// Canonical rational-linear combination of atoms; see the module docs.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct FuncLin {
    terms: BTreeMap<Atom, Rational>,
}

impl FuncLin {
    pub fn zero() -> Self {
        FuncLin::default()
    }

    pub fn one() -> Self {
        Self::constant(Rational::one())
    }

    pub fn constant(c: Rational) -> Self {
        Self::pwl(PwlFunc::constant(c))
    }

    pub fn pwl(g: PwlFunc) -> Self {
        let mut b = Builder::default();
        b.push(Rational::one(), Atom::Pwl(g));
        b.finish()
    }

    /// `√g`; `g` must be nonnegative at every breakpoint.
    pub fn sqrt_pwl(g: PwlFunc) -> Result<Self> {
        if !g.is_nonnegative() {
            return Err(Error::Domain("square-root radicand has a negative breakpoint value".into()));
        }
        if let Some(c) = g.as_constant() {
            if let Some(r) = rational_sqrt(c) {
                return Ok(Self::constant(r));
            }
        }
        let mut b = Builder::default();
        b.push(Rational::one(), Atom::SqrtPwl(g));
        Ok(b.finish())
    }

    /// Rebuilds a value from raw `(coefficient, atom)` terms, validating and
    /// canonicalizing each atom.
    pub fn from_terms(terms: impl IntoIterator<Item = (Rational, Atom)>) -> Result<Self> {
        let mut b = Builder::default();
        for (c, atom) in terms {
            let x = Self::from_atom(atom)?;
            for (a, k) in x.terms {
                b.push(&c * k, a);
            }
        }
        Ok(b.finish())
    }

    fn from_atom(atom: Atom) -> Result<Self> {
        match atom {
            Atom::Pwl(g) => Ok(Self::pwl(g)),
            Atom::SqrtPwl(g) => Self::sqrt_pwl(g),
            Atom::Product(fs) => fs.into_iter().try_fold(Self::one(), |acc, f| {
                if matches!(f, Atom::Product(_)) {
                    return Err(Error::Domain("products may not nest".into()));
                }
                Ok(acc.mul(&Self::from_atom(f)?))
            }),
        }
    }

    /// Coefficientwise `Σ c_i x_i`.
    pub fn lin_combine<'a, I>(terms: I) -> Self
    where
        I: IntoIterator<Item = (Rational, &'a FuncLin)>,
    {
        let mut b = Builder::default();
        for (c, x) in terms {
            if c.is_zero() {
                continue;
            }
            for (atom, k) in &x.terms {
                b.push(&c * k, atom.clone());
            }
        }
        b.finish()
    }

    /// Bilinear product with the `√g·√g → g` rewrite.
    pub fn mul(&self, other: &FuncLin) -> FuncLin {
        let mut b = Builder::default();
        for (a, ca) in &self.terms {
            for (o, co) in &other.terms {
                if let Some((c, atom)) = mul_atoms(a, o) {
                    b.push(c * ca * co, atom);
                }
            }
        }
        b.finish()
    }

    pub fn scale(&self, c: &Rational) -> FuncLin {
        Self::lin_combine([(c.clone(), self)])
    }

    /// The same function with fewer terms, for evaluation: product terms
    /// that differ only in one `Pwl` factor are merged into a single product
    /// whose `Pwl` factor is the combined piecewise-linear function. The
    /// factor to merge on is the one whose cofactor is shared most often.
    pub fn compact(&self) -> FuncLin {
        let cofactors = |atom: &Atom| -> Vec<Vec<Atom>> {
            let Atom::Product(fs) = atom else { return Vec::new() };
            (0..fs.len())
                .filter(|&i| matches!(fs[i], Atom::Pwl(_)) && (i == 0 || fs[i] != fs[i - 1]))
                .map(|i| [&fs[..i], &fs[i + 1..]].concat())
                .collect()
        };
        let mut counts: BTreeMap<Vec<Atom>, usize> = BTreeMap::new();
        for atom in self.terms.keys() {
            for key in cofactors(atom) {
                *counts.entry(key).or_default() += 1;
            }
        }
        let mut groups: BTreeMap<Vec<Atom>, Vec<(Rational, PwlFunc)>> = BTreeMap::new();
        let mut rest = Vec::new();
        for (atom, c) in &self.terms {
            let best = cofactors(atom).into_iter().max_by(|x, y| counts[x].cmp(&counts[y]).then_with(|| y.cmp(x)));
            match best {
                Some(key) if counts[&key] > 1 => {
                    let Atom::Product(fs) = atom else { unreachable!("cofactors come from products") };
                    let g = (0..fs.len())
                        .find_map(|i| match &fs[i] {
                            Atom::Pwl(g) if [&fs[..i], &fs[i + 1..]].concat() == key => Some(g.clone()),
                            _ => None,
                        })
                        .expect("key was built from a Pwl factor");
                    groups.entry(key).or_default().push((c.clone(), g));
                }
                _ => rest.push((atom.clone(), c.clone())),
            }
        }
        let mut terms: BTreeMap<Atom, Rational> = rest.into_iter().collect();
        for (key, parts) in groups {
            let g = PwlFunc::lincomb(parts.iter().map(|(c, g)| (c.clone(), g)));
            if g.is_zero() {
                continue;
            }
            let mut fs = key;
            fs.push(Atom::Pwl(g));
            fs.sort();
            *terms.entry(Atom::Product(fs)).or_insert_with(Rational::zero) += Rational::one();
        }
        terms.retain(|_, c| !c.is_zero());
        FuncLin { terms }
    }

    /// Exact zero test. Sound but incomplete: `true` means the function is
    /// identically zero; `false` only means no exact cancellation was found.
    pub fn is_zero_exact(&self) -> bool {
        self.terms.is_empty()
    }

    /// `Some(g)` when the value is a single piecewise-linear function.
    pub fn as_pwl(&self) -> Option<PwlFunc> {
        match self.terms.len() {
            0 => Some(PwlFunc::zero()),
            1 => match self.terms.iter().next() {
                Some((Atom::Pwl(g), c)) => Some(g.scale(c)),
                _ => None,
            },
            _ => None,
        }
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Atom, &Rational)> {
        self.terms.iter()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// Enclosure of `{x(t) : t ∈ dom}` at the default precision.
    pub fn eval_interval(&self, dom: &Interval) -> Result<Interval> {
        self.eval_on(&dom.lo(), &dom.hi(), DEFAULT_PRECISION)
    }

    /// Enclosure of `{x(t) : a ≤ t ≤ b}` on the `2^{-prec}` grid.
    pub fn eval_on(&self, a: &Rational, b: &Rational, prec: u32) -> Result<Interval> {
        if a.is_negative() || *b > Rational::one() || a > b {
            return Err(Error::Domain(format!("[{a}, {b}] is not a subinterval of [0,1]")));
        }
        Ok(self.eval_on_unchecked(a, b, prec))
    }

    pub(crate) fn eval_on_unchecked(&self, a: &Rational, b: &Rational, prec: u32) -> Interval {
        self.terms
            .iter()
            .fold(Interval::zero(prec), |acc, (atom, c)| {
                &acc + &atom.eval_on(a, b, prec).scale(c)
            })
    }

    /// Natural enclosure intersected with the mean value form
    /// `x(m) + x'([a, b])·[−h, h]`, which is second order on cells where
    /// the derivative is bounded.
    pub(crate) fn eval_centered_unchecked(&self, a: &Rational, b: &Rational, prec: u32) -> Interval {
        let natural = self.eval_on_unchecked(a, b, prec);
        if a == b {
            return natural;
        }
        let mut slope = Interval::zero(prec);
        for (atom, c) in &self.terms {
            match atom.slope_on(a, b, prec) {
                Some(d) => slope = &slope + &d.scale(c),
                None => return natural,
            }
        }
        let mid = (a + b) / Rational::from_integer(2.into());
        let h = (b - a) / Rational::from_integer(2.into());
        let r = slope.mag() * h;
        let centered = &self.eval_on_unchecked(&mid, &mid, prec) + &Interval::from_rationals(&-r.clone(), &r, prec);
        natural.intersect(&centered).unwrap_or(natural)
    }

    /// Enclosure of `x(t)`; exact (a point) for PWL-only values at dyadic `t`.
    pub fn eval_point(&self, t: &Rational, prec: u32) -> Result<Interval> {
        self.eval_on(t, t, prec)
    }

    /// Looks for a dyadic `t` where `x(t) ≠ 0` is certified, scanning
    /// `k / 2^j` for `j = 1..=max_level`.
    pub fn separating_point(&self, max_level: u32) -> Option<(Rational, Interval)> {
        if self.is_zero_exact() {
            return None;
        }
        for j in 0..=max_level {
            let den = 1i64 << j;
            for k in 0..=den {
                // Points from coarser levels were already tried.
                if j > 0 && k % 2 == 0 {
                    continue;
                }
                let t = rational::ratio(k, den);
                let v = self.eval_on_unchecked(&t, &t, DEFAULT_PRECISION);
                if !v.contains_zero() {
                    return Some((t, v));
                }
            }
        }
        None
    }

    /// One-line rendering for error messages and logs.
    pub fn summary(&self) -> String {
        format!("{self:?}")
    }
}

/// Outcome of [`decide_zero`].
#[derive(Clone, Debug)]
pub enum ZeroVerdict {
    ExactZero,
    /// `x(point) ≠ 0`, certified by `value` excluding zero.
    Separated { point: Rational, value: Interval },
    /// No exact cancellation and no separating point found; `sup_norm`
    /// encloses `sup |x|`.
    Unresolved { sup_norm: Interval },
}

/// Exact zero test, backed by a separating point or an enclosure when the
/// answer is not "exactly zero".
pub fn decide_zero(x: &FuncLin, tol: &Rational, budget: usize) -> ZeroVerdict {
    if x.is_zero_exact() {
        return ZeroVerdict::ExactZero;
    }
    if let Some((point, value)) = x.separating_point(10) {
        return ZeroVerdict::Separated { point, value };
    }
    let sup_norm = match crate::enclosure::sup_norm_enclosure(x, tol, budget) {
        Ok(i) => i,
        Err(Error::Budget { best, .. }) => best,
        Err(e) => unreachable!("sup_norm_enclosure only fails on budget: {e}"),
    };
    ZeroVerdict::Unresolved { sup_norm }
}

impl Add for &FuncLin {
    type Output = FuncLin;
    fn add(self, rhs: &FuncLin) -> FuncLin {
        FuncLin::lin_combine([(Rational::one(), self), (Rational::one(), rhs)])
    }
}

impl Sub for &FuncLin {
    type Output = FuncLin;
    fn sub(self, rhs: &FuncLin) -> FuncLin {
        FuncLin::lin_combine([(Rational::one(), self), (-Rational::one(), rhs)])
    }
}

impl Neg for &FuncLin {
    type Output = FuncLin;
    fn neg(self) -> FuncLin {
        self.scale(&-Rational::one())
    }
}

impl Mul for &FuncLin {
    type Output = FuncLin;
    fn mul(self, rhs: &FuncLin) -> FuncLin {
        FuncLin::mul(self, rhs)
    }
}

impl fmt::Debug for FuncLin {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return f.write_str("0");
        }
        for (i, (atom, c)) in self.terms.iter().enumerate() {
            if i > 0 {
                f.write_str(" + ")?;
            }
            write!(f, "{c}·")?;
            atom.fmt_short(f)?;
        }
        Ok(())
    }
}

#[derive(Serialize, Deserialize)]
struct TermRepr {
    #[serde(with = "rational::serde_str")]
    coefficient: Rational,
    atom: Atom,
}

impl Serialize for FuncLin {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let terms: Vec<TermRepr> = self
            .terms
            .iter()
            .map(|(a, c)| TermRepr {
                coefficient: c.clone(),
                atom: a.clone(),
            })
            .collect();
        terms.serialize(s)
    }
}

impl<'de> Deserialize<'de> for FuncLin {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let raw: Vec<TermRepr> = Vec::deserialize(d)?;
        FuncLin::from_terms(raw.into_iter().map(|t| (t.coefficient, t.atom)))
            .map_err(serde::de::Error::custom)
    }
}
