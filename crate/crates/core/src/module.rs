//! The standard Hilbert module `B^S` over `B = C[0,1]`.
//!
//! Elements are families `(b_s)` indexed by a countable set `S`. Only
//! finitely supported families ([`ModuleElement`]) are materialized; families
//! with infinite support ([`GeneratorElement`]) are given by a rule and
//! queried lazily, which is what membership analysis needs: a family belongs
//! to `B^S` iff its partial sums `Σ b_s* b_s` are norm-Cauchy, and the
//! [`cauchy_gap`] of two finite index sets measures exactly that.
//!
//! A bounded right-linear map `Φ: B^S → B` is represented by its coefficient
//! family `β_s = Φ(e_s)*` ([`CoeffFamily`]) together with a bound `M` on
//! `‖Σ_{s∈S'} β_s* β_s‖` over finite `S'`. Since every scalar constructed
//! here is real, the involution is the identity throughout.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::{self, Debug, Display};
use std::hash::Hash;
use std::str::FromStr;
use std::sync::Arc;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::enclosure::{sup_norm_enclosure, Accuracy};
use crate::error::{Error, Result};
use crate::expr::FuncLin;
use crate::interval::Interval;
use crate::rational::{self, Rational};

/// A countable, totally ordered index set with a stable text form.
pub trait Index:
    Clone + Ord + Eq + Hash + Debug + Display + FromStr<Err = Error> + Send + Sync + 'static
{
    /// Row number for two-level index sets, used by [`Support::Row`].
    fn row(&self) -> Option<u64> {
        None
    }
}

/// Index `m ≥ 1` of `B^ℕ`. Text form `"m"`.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub struct Nat(pub u64);

impl Display for Nat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl FromStr for Nat {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.parse::<u64>() {
            Ok(m) if m >= 1 => Ok(Nat(m)),
            _ => Err(Error::Parse(format!("bad index {s:?}: expected m ≥ 1"))),
        }
    }
}

impl Index for Nat {}

/// Index set `A = {0} ∪ (ℕ × ℕ)`: the separate copy of `B` and entry `m`
/// of copy `n` of `B^ℕ`. Text forms `"0"` and `"n:m"`; `n, m ≥ 1`.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub enum IndexA {
    Zero,
    Pair(u64, u64),
}

impl Display for IndexA {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            IndexA::Zero => f.write_str("0"),
            IndexA::Pair(n, m) => write!(f, "{n}:{m}"),
        }
    }
}

impl FromStr for IndexA {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        if s == "0" {
            return Ok(IndexA::Zero);
        }
        let bad = || Error::Parse(format!("bad index {s:?}: expected \"0\" or \"n:m\" with n, m ≥ 1"));
        let (n, m) = s.split_once(':').ok_or_else(bad)?;
        let n: u64 = n.parse().map_err(|_| bad())?;
        let m: u64 = m.parse().map_err(|_| bad())?;
        if n == 0 || m == 0 {
            return Err(bad());
        }
        Ok(IndexA::Pair(n, m))
    }
}

impl Index for IndexA {
    fn row(&self) -> Option<u64> {
        match self {
            IndexA::Zero => None,
            IndexA::Pair(n, _) => Some(*n),
        }
    }
}

/// Finitely supported element of `B^S`; zero entries are never stored.
#[derive(Clone, PartialEq, Eq)]
pub struct ModuleElement<I: Index> {
    entries: BTreeMap<I, FuncLin>,
}

impl<I: Index> Default for ModuleElement<I> {
    fn default() -> Self {
        ModuleElement {
            entries: BTreeMap::new(),
        }
    }
}

impl<I: Index> ModuleElement<I> {
    pub fn zero() -> Self {
        Self::default()
    }

    /// Later duplicates of an index are added to earlier ones.
    pub fn from_entries(entries: impl IntoIterator<Item = (I, FuncLin)>) -> Self {
        let mut map: BTreeMap<I, FuncLin> = BTreeMap::new();
        for (i, v) in entries {
            let slot = map.entry(i).or_default();
            *slot = &*slot + &v;
        }
        map.retain(|_, v| !v.is_zero_exact());
        ModuleElement { entries: map }
    }

    /// Entry at `s`, zero off the support.
    pub fn get(&self, s: &I) -> FuncLin {
        self.entries.get(s).cloned().unwrap_or_default()
    }

    pub fn entries(&self) -> impl Iterator<Item = (&I, &FuncLin)> {
        self.entries.iter()
    }

    pub fn support(&self) -> BTreeSet<I> {
        self.entries.keys().cloned().collect()
    }

    pub fn is_zero(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn add(&self, other: &Self) -> Self {
        Self::from_entries(self.entries.iter().chain(other.entries.iter()).map(|(i, v)| (i.clone(), v.clone())))
    }

    pub fn scale(&self, c: &Rational) -> Self {
        Self::from_entries(self.entries.iter().map(|(i, v)| (i.clone(), v.scale(c))))
    }
}

/// `e_s`: the single entry `s ↦ 1`.
pub fn basis_vector<I: Index>(s: I) -> ModuleElement<I> {
    ModuleElement::from_entries([(s, FuncLin::one())])
}

/// `⟨x, y⟩ = Σ_s x_s* y_s`, exact.
pub fn inner_product<I: Index>(x: &ModuleElement<I>, y: &ModuleElement<I>) -> FuncLin {
    let products: Vec<FuncLin> = x
        .entries
        .iter()
        .filter_map(|(s, xs)| y.entries.get(s).map(|ys| xs.mul(ys)))
        .collect();
    sum(&products)
}

/// `⟨x, g⟩` for a finitely supported `x`; only `supp x` is queried.
pub fn inner_product_generator<I: Index>(x: &ModuleElement<I>, g: &GeneratorElement<I>) -> FuncLin {
    let products: Vec<FuncLin> = x.entries.iter().map(|(s, xs)| xs.mul(&g.get(s))).collect();
    sum(&products)
}

fn sum(xs: &[FuncLin]) -> FuncLin {
    FuncLin::lin_combine(xs.iter().map(|x| (Rational::from_integer(1.into()), x)))
}

/// Entrywise `x · b`.
pub fn right_action<I: Index>(x: &ModuleElement<I>, b: &FuncLin) -> ModuleElement<I> {
    ModuleElement::from_entries(x.entries.iter().map(|(s, v)| (s.clone(), v.mul(b))))
}

/// Encloses `‖x‖ = √‖⟨x, x⟩‖_∞` with width at most `acc.tol`.
pub fn module_norm<I: Index>(x: &ModuleElement<I>, acc: &Accuracy) -> Result<Interval> {
    sqrt_of_sup(&inner_product(x, x), acc)
}

/// `√ sup|v|` for a nonnegative `v`, refined until the root is within tol.
pub(crate) fn sqrt_of_sup(v: &FuncLin, acc: &Accuracy) -> Result<Interval> {
    let mut inner_tol = acc.tol.clone();
    // √ is 1/2-Hölder, so tol² on the square always suffices.
    let floor = &acc.tol * &acc.tol;
    loop {
        let sq = sup_norm_enclosure(v, &inner_tol, acc.budget)?;
        let root = sq.sqrt().expect("sup norm is nonnegative");
        if root.width() <= acc.tol || inner_tol <= floor {
            return Ok(root);
        }
        inner_tol = (&inner_tol / Rational::from_integer(16.into())).max(floor.clone());
    }
}

/// Where a [`GeneratorElement`] may be nonzero.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Support<I: Index> {
    Finite(BTreeSet<I>),
    /// Every index whose [`Index::row`] is `n`.
    Row(u64),
    Everywhere,
}

impl<I: Index> Support<I> {
    pub fn contains(&self, i: &I) -> bool {
        match self {
            Support::Finite(s) => s.contains(i),
            Support::Row(n) => i.row() == Some(*n),
            Support::Everywhere => true,
        }
    }
}

type Rule<I> = Arc<dyn Fn(&I) -> FuncLin + Send + Sync>;

/// Family given by a pure rule, evaluated on demand. Queries outside the
/// declared support return zero.
#[derive(Clone)]
pub struct GeneratorElement<I: Index> {
    rule: Rule<I>,
    support: Support<I>,
}

impl<I: Index> GeneratorElement<I> {
    pub fn new(support: Support<I>, rule: impl Fn(&I) -> FuncLin + Send + Sync + 'static) -> Self {
        GeneratorElement {
            rule: Arc::new(rule),
            support,
        }
    }

    pub fn from_element(x: &ModuleElement<I>) -> Self {
        let entries = x.entries.clone();
        GeneratorElement::new(Support::Finite(x.support()), move |i| {
            entries.get(i).cloned().unwrap_or_default()
        })
    }

    pub fn support(&self) -> &Support<I> {
        &self.support
    }

    pub fn get(&self, i: &I) -> FuncLin {
        if self.support.contains(i) {
            (self.rule)(i)
        } else {
            FuncLin::zero()
        }
    }

    /// Materializes the entries at `indices`.
    pub fn restrict<'a>(&self, indices: impl IntoIterator<Item = &'a I>) -> ModuleElement<I> {
        ModuleElement::from_entries(indices.into_iter().map(|i| (i.clone(), self.get(i))))
    }

    /// Lazy entrywise `x · b`.
    pub fn right_action(&self, b: &FuncLin) -> Self {
        let rule = Arc::clone(&self.rule);
        let b = b.clone();
        GeneratorElement::new(self.support.clone(), move |i| rule(i).mul(&b))
    }
}

/// Coefficients `β_s` of a bounded right-linear map `Φ: B^S → B`, with a
/// claimed bound `M ≥ ‖Σ_{s∈S'} β_s* β_s‖` for finite `S'` and a note on
/// where `M` comes from.
#[derive(Clone)]
pub struct CoeffFamily<I: Index> {
    rule: Rule<I>,
    bound: Rational,
    note: String,
}

impl<I: Index> CoeffFamily<I> {
    pub fn new(
        bound: Rational,
        note: impl Into<String>,
        rule: impl Fn(&I) -> FuncLin + Send + Sync + 'static,
    ) -> Self {
        CoeffFamily {
            rule: Arc::new(rule),
            bound,
            note: note.into(),
        }
    }

    pub fn beta(&self, s: &I) -> FuncLin {
        (self.rule)(s)
    }

    pub fn bound(&self) -> &Rational {
        &self.bound
    }

    pub fn note(&self) -> &str {
        &self.note
    }
}

/// `Φ(x) = Σ_s β_s* x_s` for finitely supported `x`.
pub fn apply_map<I: Index>(phi: &CoeffFamily<I>, x: &ModuleElement<I>) -> FuncLin {
    let terms: Vec<FuncLin> = x.entries.iter().map(|(s, xs)| phi.beta(s).mul(xs)).collect();
    sum(&terms)
}

/// Encloses `‖Σ_{s∈S'} β_s* β_s‖_∞` and checks it against the certificate.
pub fn verify_map_bound<I: Index>(phi: &CoeffFamily<I>, subset: &[I], acc: &Accuracy) -> Result<Interval> {
    let distinct: BTreeSet<&I> = subset.iter().collect();
    let squares: Vec<FuncLin> = distinct
        .iter()
        .map(|s| {
            let b = phi.beta(s);
            b.mul(&b)
        })
        .collect();
    let enclosure = sup_norm_enclosure(&sum(&squares), &acc.tol, acc.budget)?;
    if enclosure.hi() > phi.bound {
        return Err(Error::CertificateViolation {
            bound: rational::format(&phi.bound),
            subset: describe_subset(distinct.iter().copied()),
            enclosure,
        });
    }
    Ok(enclosure)
}

fn describe_subset<'a, I: Index>(s: impl Iterator<Item = &'a I>) -> String {
    let items: Vec<String> = s.map(ToString::to_string).collect();
    format!("{{{}}}", items.join(", "))
}

/// Encloses `‖Σ_{a ∈ S2∖S1} x_a* x_a‖_∞`, the tail of the partial sums
/// between two finite index sets.
pub fn cauchy_gap<I: Index>(x: &GeneratorElement<I>, s1: &[I], s2: &[I], acc: &Accuracy) -> Result<Interval> {
    let s1: BTreeSet<&I> = s1.iter().collect();
    let s2: BTreeSet<&I> = s2.iter().collect();
    if !s1.is_subset(&s2) {
        return Err(Error::Parameter("cauchy_gap needs S1 ⊆ S2".into()));
    }
    let squares: Vec<FuncLin> = s2
        .difference(&s1)
        .map(|a| {
            let v = x.get(a);
            v.mul(&v)
        })
        .collect();
    sup_norm_enclosure(&sum(&squares), &acc.tol, acc.budget)
}

impl<I: Index> Debug for ModuleElement<I> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_map().entries(self.entries.iter().map(|(k, v)| (k.to_string(), v))).finish()
    }
}

impl<I: Index> Serialize for ModuleElement<I> {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_map(self.entries.iter().map(|(k, v)| (k.to_string(), v)))
    }
}

impl<'de, I: Index> Deserialize<'de> for ModuleElement<I> {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let raw: BTreeMap<String, FuncLin> = BTreeMap::deserialize(d)?;
        let entries = raw
            .into_iter()
            .map(|(k, v)| Ok((k.parse::<I>()?, v)))
            .collect::<Result<Vec<_>>>()
            .map_err(serde::de::Error::custom)?;
        Ok(ModuleElement::from_entries(entries))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pwl::{make_f, psi_sq, PwlFunc};
    use crate::rational::{int, ratio};

    fn acc() -> Accuracy {
        Accuracy::default()
    }

    fn psi(q: &Rational, m: u64) -> FuncLin {
        FuncLin::sqrt_pwl(psi_sq(q, m).unwrap()).unwrap()
    }

    #[test]
    fn index_text_forms() {
        assert_eq!(IndexA::Zero.to_string(), "0");
        assert_eq!(IndexA::Pair(3, 7).to_string(), "3:7");
        assert_eq!("12:5".parse::<IndexA>().unwrap(), IndexA::Pair(12, 5));
        assert!("0:5".parse::<IndexA>().is_err());
        assert!("3".parse::<IndexA>().is_err());
        assert_eq!("4".parse::<Nat>().unwrap(), Nat(4));
        assert!("0".parse::<Nat>().is_err());
        assert!(IndexA::Zero < IndexA::Pair(1, 1));
    }

    #[test]
    fn orthonormal_basis() {
        let e1 = basis_vector(Nat(1));
        let e2 = basis_vector(Nat(2));
        assert_eq!(inner_product(&e1, &e1), FuncLin::one());
        assert!(inner_product(&e1, &e2).is_zero_exact());
        let x = ModuleElement::from_entries([
            (Nat(1), psi(&ratio(1, 2), 3)),
            (Nat(4), FuncLin::pwl(PwlFunc::identity())),
        ]);
        assert_eq!(inner_product(&basis_vector(Nat(4)), &x), x.get(&Nat(4)));
        assert_eq!(inner_product(&e1, &x), x.get(&Nat(1)));
    }

    #[test]
    fn inner_product_properties() {
        let g = FuncLin::pwl(PwlFunc::affine(ratio(1, 3), ratio(1, 2)));
        let x = ModuleElement::from_entries([(Nat(1), psi(&ratio(3, 4), 2)), (Nat(2), g.clone())]);
        let y = ModuleElement::from_entries([(Nat(1), g.clone()), (Nat(3), FuncLin::one())]);
        assert_eq!(inner_product(&x, &y), inner_product(&y, &x));
        let b = psi(&ratio(1, 8), 1);
        assert_eq!(inner_product(&x, &right_action(&y, &b)), inner_product(&x, &y).mul(&b));
        let e0g = right_action(&basis_vector(Nat(1)), &g);
        assert_eq!(inner_product(&e0g, &e0g), g.mul(&g));
    }

    #[test]
    fn right_action_laws() {
        let b = FuncLin::pwl(PwlFunc::identity());
        let c = psi(&ratio(1, 2), 1);
        let e = basis_vector(IndexA::Pair(2, 3));
        assert_eq!(right_action(&e, &b).get(&IndexA::Pair(2, 3)), b);
        let x = ModuleElement::from_entries([(IndexA::Zero, c.clone()), (IndexA::Pair(1, 1), b.clone())]);
        assert_eq!(right_action(&right_action(&x, &b), &c), right_action(&x, &b.mul(&c)));
        assert_eq!(right_action(&x, &FuncLin::one()), x);
    }

    #[test]
    fn norms() {
        let n = module_norm(&basis_vector(Nat(7)), &acc()).unwrap();
        assert_eq!((n.lo(), n.hi()), (int(1), int(1)));
        let x = ModuleElement::from_entries([(Nat(1), psi(&ratio(1, 2), 1)), (Nat(2), FuncLin::constant(ratio(1, 2)))]);
        // ⟨x,x⟩ = (1/2 − t)_+ + 1/4, so ‖x‖² = 3/4.
        let n = module_norm(&x, &acc()).unwrap();
        assert!(n.lo() * n.lo() <= ratio(3, 4) && n.hi() * n.hi() >= ratio(3, 4));
        assert!(n.width() <= acc().tol);
    }

    #[test]
    fn psi_map_bound_is_telescoped() {
        let q = ratio(3, 8);
        let psi_q = CoeffFamily::new(int(1), "Σψ² = f_{q,M} ≤ 1", {
            let q = q.clone();
            move |m: &Nat| psi(&q, m.0)
        });
        for big_m in [1u64, 2, 3, 10] {
            let subset: Vec<Nat> = (1..=big_m).map(Nat).collect();
            let i = verify_map_bound(&psi_q, &subset, &acc()).unwrap();
            let expected = int(1).min(&q * int(big_m as i64));
            assert_eq!((i.lo(), i.hi()), (expected.clone(), expected));
        }
        let empty = verify_map_bound(&psi_q, &[], &acc()).unwrap();
        assert_eq!(empty.hi(), int(0));
        let tight = CoeffFamily::new(ratio(1, 2), "too small", move |m: &Nat| psi(&q, m.0));
        let subset: Vec<Nat> = (1..=4).map(Nat).collect();
        assert!(matches!(
            verify_map_bound(&tight, &subset, &acc()),
            Err(Error::CertificateViolation { .. })
        ));
    }

    #[test]
    fn apply_map_on_basis() {
        let q = ratio(1, 2);
        let fam = CoeffFamily::new(int(1), "", move |m: &Nat| psi(&q, m.0));
        for m in 1..=5 {
            assert_eq!(apply_map(&fam, &basis_vector(Nat(m))), fam.beta(&Nat(m)));
        }
        assert!(apply_map(&fam, &ModuleElement::zero()).is_zero_exact());
    }

    #[test]
    fn gaps() {
        let g = GeneratorElement::new(Support::Everywhere, |m: &Nat| psi(&ratio(1, 2), m.0));
        let s: Vec<Nat> = (1..=4).map(Nat).collect();
        let same = cauchy_gap(&g, &s, &s, &acc()).unwrap();
        assert_eq!(same.hi(), int(0));
        let s2: Vec<Nat> = (1..=8).map(Nat).collect();
        let gap = cauchy_gap(&g, &s, &s2, &acc()).unwrap();
        let exact = (&make_f(&ratio(1, 2), 8).unwrap() - &make_f(&ratio(1, 2), 4).unwrap()).sup_norm();
        assert_eq!((gap.lo(), gap.hi()), (exact.clone(), exact));
        assert!(matches!(cauchy_gap(&g, &s2, &s, &acc()), Err(Error::Parameter(_))));
        let finite = GeneratorElement::from_element(&basis_vector(Nat(2)));
        assert_eq!(cauchy_gap(&finite, &s, &s2, &acc()).unwrap().hi(), int(0));
    }

    #[test]
    fn generator_support() {
        let g = GeneratorElement::new(Support::Row(2), |_: &IndexA| FuncLin::one());
        assert_eq!(g.get(&IndexA::Pair(2, 9)), FuncLin::one());
        assert!(g.get(&IndexA::Pair(3, 9)).is_zero_exact());
        assert!(g.get(&IndexA::Zero).is_zero_exact());
        let r = g.restrict(&[IndexA::Pair(2, 1), IndexA::Pair(1, 1)]);
        assert_eq!(r.support().len(), 1);
    }

    #[test]
    fn json_encoding() {
        let x = ModuleElement::from_entries([
            (IndexA::Zero, psi(&ratio(1, 2), 2)),
            (IndexA::Pair(3, 4), FuncLin::constant(int(-1))),
        ]);
        let s = serde_json::to_string(&x).unwrap();
        assert!(s.starts_with(r#"{"0":"#) && s.contains(r#""3:4":"#));
        let back: ModuleElement<IndexA> = serde_json::from_str(&s).unwrap();
        assert_eq!(back, x);
        assert!(serde_json::from_str::<ModuleElement<IndexA>>(r#"{"x":[]}"#).is_err());
    }
}
