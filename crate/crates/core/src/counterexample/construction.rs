//! The objects of the counterexample: `ψ_{q,m}`, `Ψ_q`, `Φ` and `ζ_{k,ℓ}`.

use num_traits::One;

use super::DenseSeq;
use crate::error::{Error, Result};
use crate::expr::FuncLin;
use crate::module::{apply_map, CoeffFamily, IndexA, ModuleElement, Nat};
use crate::pwl::psi_sq;
use crate::rational::{int, pow2, ratio, Rational};

/// `ψ_{q,m} = √(f_{q,m} − f_{q,m−1})`; the squares sum to `χ_{[0,q)}`.
pub fn psi(q: &Rational, m: u64) -> Result<FuncLin> {
    FuncLin::sqrt_pwl(psi_sq(q, m)?)
}

/// `Ψ_q: B^ℕ → B` with coefficients `m ↦ ψ_{q,m}`. Bounded but not
/// adjointable: `(ψ_{q,m})_m` is not itself an element of `B^ℕ`.
pub fn make_psi(q: &Rational) -> Result<CoeffFamily<Nat>> {
    psi(q, 1)?;
    let q = q.clone();
    Ok(CoeffFamily::new(
        Rational::one(),
        "sum of psi_{q,m}^2 over m <= M is f_{q,M} <= 1",
        move |m: &Nat| psi(&q, m.0).unwrap_or_default(),
    ))
}

/// `Φ(b) = b_0 + Σ_n 2^{-n} Ψ_{q_n}((b_{n,m})_m)`, i.e. `β_0 = 1` and
/// `β_{n,m} = 2^{-n} ψ_{q_n,m}`.
pub fn make_phi(qs: &DenseSeq) -> CoeffFamily<IndexA> {
    let qs = qs.clone();
    CoeffFamily::new(
        ratio(4, 3),
        "1 + sum over n of 4^{-n} * sup f_{q_n,M} <= 1 + 1/3",
        move |s: &IndexA| match *s {
            IndexA::Zero => FuncLin::one(),
            IndexA::Pair(n, m) => phi_coefficient(&qs, n, m).unwrap_or_default(),
        },
    )
}

fn phi_coefficient(qs: &DenseSeq, n: u64, m: u64) -> Result<FuncLin> {
    Ok(psi(&qs.get(n)?, m)?.scale(&pow2(-(n as i64))))
}

/// `ζ_{k,ℓ} = e_0 · 2^{-k} ψ_{q_k,ℓ} − e_{(k,ℓ)}`.
pub fn zeta(k: u64, l: u64, qs: &DenseSeq) -> Result<ModuleElement<IndexA>> {
    if k == 0 || l == 0 {
        return Err(Error::Parameter("zeta needs k, l >= 1".into()));
    }
    Ok(ModuleElement::from_entries([
        (IndexA::Zero, phi_coefficient(qs, k, l)?),
        (IndexA::Pair(k, l), FuncLin::constant(int(-1))),
    ]))
}

/// Requires `Φ(x)` to cancel to exact zero.
pub fn verify_kernel_element(phi: &CoeffFamily<IndexA>, x: &ModuleElement<IndexA>) -> Result<()> {
    let value = apply_map(phi, x);
    if value.is_zero_exact() {
        Ok(())
    } else {
        Err(Error::ConstructionBug {
            residual: Box::new(value),
        })
    }
}

/// `Φ(ζ_{k,ℓ}) = 0`, checked exactly.
pub fn verify_kernel(k: u64, l: u64, qs: &DenseSeq) -> Result<()> {
    verify_kernel_element(&make_phi(qs), &zeta(k, l, qs)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::enclosure::Accuracy;
    use crate::module::{basis_vector, inner_product, right_action, verify_map_bound};
    use crate::pwl::{make_f, PwlFunc};
    use crate::rational::inv_pow4;

    #[test]
    fn psi_family() {
        let q = ratio(3, 8);
        let fam = make_psi(&q).unwrap();
        assert_eq!(fam.bound(), &int(1));
        for m in 1..=6 {
            assert_eq!(apply_map(&fam, &basis_vector(Nat(m))), psi(&q, m).unwrap());
            let subset: Vec<Nat> = (1..=m).map(Nat).collect();
            let i = verify_map_bound(&fam, &subset, &Accuracy::default()).unwrap();
            assert_eq!(i.hi(), int(1).min(&q * int(m as i64)));
        }
        assert!(apply_map(&fam, &ModuleElement::zero()).is_zero_exact());
        assert!(make_psi(&int(0)).is_err());
    }

    #[test]
    fn phi_coefficients() {
        let qs = DenseSeq::Dyadic;
        let phi = make_phi(&qs);
        assert_eq!(apply_map(&phi, &basis_vector(IndexA::Zero)), FuncLin::one());
        let b = FuncLin::pwl(PwlFunc::identity());
        assert_eq!(apply_map(&phi, &right_action(&basis_vector(IndexA::Zero), &b)), b);
        let q3 = qs.get(3).unwrap();
        assert_eq!(
            apply_map(&phi, &basis_vector(IndexA::Pair(3, 5))),
            psi(&q3, 5).unwrap().scale(&ratio(1, 8))
        );
    }

    #[test]
    fn zeta_entries() {
        let qs = DenseSeq::Dyadic;
        let z = zeta(1, 1, &qs).unwrap();
        assert_eq!(z.support().into_iter().collect::<Vec<_>>(), vec![IndexA::Zero, IndexA::Pair(1, 1)]);
        let z23 = zeta(2, 3, &qs).unwrap();
        assert_eq!(z23.get(&IndexA::Zero), psi(&ratio(1, 2), 3).unwrap().scale(&ratio(1, 4)));
        assert!(z.get(&IndexA::Pair(5, 7)).is_zero_exact());
        assert!(zeta(0, 1, &qs).is_err());
    }

    #[test]
    fn zeta_self_inner_product() {
        let qs = DenseSeq::Dyadic;
        for (k, l) in [(1, 1), (2, 3), (4, 9)] {
            let z = zeta(k, l, &qs).unwrap();
            let qk = qs.get(k).unwrap();
            let expected = PwlFunc::lincomb([
                (inv_pow4(k), &psi_sq(&qk, l).unwrap()),
                (int(1), &PwlFunc::one()),
            ]);
            assert_eq!(inner_product(&z, &z), FuncLin::pwl(expected));
        }
    }

    #[test]
    fn kernel_identity_and_perturbation() {
        let qs = DenseSeq::Dyadic;
        verify_kernel(1, 1, &qs).unwrap();
        verify_kernel(3, 7, &qs).unwrap();
        let (k, l) = (2u64, 5u64);
        let perturbed = ModuleElement::from_entries([
            (IndexA::Zero, phi_coefficient(&qs, k, l).unwrap()),
            (IndexA::Pair(k, l), FuncLin::constant(ratio(-1, 2))),
        ]);
        match verify_kernel_element(&make_phi(&qs), &perturbed) {
            Err(Error::ConstructionBug { residual }) => {
                let expected = psi(&qs.get(k).unwrap(), l).unwrap().scale(&pow2(-(k as i64) - 1));
                assert_eq!(*residual, expected);
            }
            other => panic!("expected a residual, got {other:?}"),
        }
    }

    #[test]
    fn phi_is_surjective_on_e0() {
        let phi = make_phi(&DenseSeq::Dyadic);
        let b = FuncLin::pwl(make_f(&ratio(1, 3), 4).unwrap());
        let x = right_action(&basis_vector(IndexA::Zero), &b);
        assert_eq!(apply_map(&phi, &x), b);
    }
}
