use hmodlab_core::counterexample::{
    complement_probe, row_prefix, solve_constraints, verify_kernel, zeta, DenseSeq,
};
use hmodlab_core::enclosure::sup_norm_enclosure;
use hmodlab_core::module::{
    basis_vector, cauchy_gap, inner_product, inner_product_generator, module_norm, right_action,
};
use hmodlab_core::pwl::{make_f, psi_sq};
use hmodlab_core::rational::{int, pow2, ratio};
use hmodlab_core::{Accuracy, FuncLin, IndexA, Interval, ModuleElement, PwlFunc, Rational};
use proptest::prelude::*;

fn arb_pwl(nonneg: bool) -> impl Strategy<Value = PwlFunc> {
    let value = if nonneg { 0i64..=8 } else { -8i64..=8 };
    (
        proptest::collection::btree_set(1i64..32, 0..4),
        proptest::collection::vec(value, 6),
    )
        .prop_map(|(interior, vals)| {
            let mut ts = vec![0];
            ts.extend(interior);
            ts.push(32);
            let pts = ts.iter().zip(vals.iter().cycle()).map(|(&t, &v)| (ratio(t, 32), ratio(v, 4))).collect();
            PwlFunc::new(pts).unwrap()
        })
}

fn arb_q() -> impl Strategy<Value = Rational> {
    (1i64..=16).prop_map(|k| ratio(k, 16))
}

fn arb_point() -> impl Strategy<Value = Rational> {
    (0i64..=97).prop_map(|k| ratio(k, 97))
}

fn arb_funclin() -> impl Strategy<Value = FuncLin> {
    (arb_pwl(false), arb_pwl(true), arb_pwl(true), -4i64..=4).prop_map(|(p, g, h, c)| {
        let (sg, sh) = (FuncLin::sqrt_pwl(g).unwrap(), FuncLin::sqrt_pwl(h).unwrap());
        &FuncLin::pwl(p) + &sg.mul(&sh).scale(&int(c))
    })
}

fn eval_exact(g: &PwlFunc, t: &Rational) -> Rational {
    g.eval(t).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn canonicalize_is_idempotent(g in arb_pwl(false)) {
        let c = g.canonicalize();
        prop_assert_eq!(c.canonicalize(), c.clone());
        prop_assert_eq!(c, g);
    }

    #[test]
    fn lincomb_commutes_with_evaluation(f in arb_pwl(false), g in arb_pwl(false), a in -5i64..=5, b in -5i64..=5, t in arb_point()) {
        let h = PwlFunc::lincomb([(int(a), &f), (int(b), &g)]);
        prop_assert_eq!(eval_exact(&h, &t), int(a) * eval_exact(&f, &t) + int(b) * eval_exact(&g, &t));
    }

    #[test]
    fn pointwise_min_max_are_exact(f in arb_pwl(false), g in arb_pwl(false), t in arb_point()) {
        let (x, y) = (eval_exact(&f, &t), eval_exact(&g, &t));
        prop_assert_eq!(eval_exact(&f.pointwise_min(&g), &t), x.clone().min(y.clone()));
        prop_assert_eq!(eval_exact(&f.pointwise_max(&g), &t), x.max(y));
    }

    #[test]
    fn telescoping_and_monotone_exhaustion(q in arb_q(), big_m in 1u64..=64) {
        let sum = PwlFunc::lincomb((1..=big_m).map(|m| psi_sq(&q, m).unwrap()).collect::<Vec<_>>().iter().map(|g| (int(1), g)));
        let f = make_f(&q, big_m).unwrap();
        prop_assert_eq!(&sum, &f);
        let next = make_f(&q, big_m + 1).unwrap();
        prop_assert!(f.le_pointwise(&next));
        prop_assert!(next.le_pointwise(&PwlFunc::one()));
        prop_assert_eq!(f.sup_norm(), (&q * int(big_m as i64)).min(int(1)));
    }

    #[test]
    fn psi_squares_are_nonnegative(q in arb_q(), m in 1u64..=64) {
        prop_assert!(psi_sq(&q, m).unwrap().is_nonnegative());
    }

    #[test]
    fn point_evaluation_is_sound(x in arb_funclin(), t in arb_point()) {
        let fine = x.eval_point(&t, 128).unwrap();
        let coarse = x.eval_point(&t, 40).unwrap();
        let (a, b) = (fine.lo(), fine.hi());
        // The finer enclosure must meet the coarser one.
        prop_assert!(coarse.lo() <= b && a <= coarse.hi());
        prop_assert!(fine.width() <= coarse.width());
    }

    #[test]
    fn interval_evaluation_is_isotone(x in arb_funclin(), a in 0i64..=16, w in 0i64..=16) {
        let (lo, hi) = (ratio(a, 32), ratio(a + w, 32));
        let mid = (&lo + &hi) / int(2);
        let whole = x.eval_on(&lo, &hi, 128).unwrap();
        prop_assert!(x.eval_on(&lo, &mid, 128).unwrap().subset_of(&whole));
        prop_assert!(x.eval_on(&mid, &hi, 128).unwrap().subset_of(&whole));
        for t in [&lo, &mid, &hi] {
            prop_assert!(x.eval_point(t, 128).unwrap().subset_of(&whole));
        }
    }

    #[test]
    fn sqrt_square_rewrite(g in arb_pwl(true), c in -4i64..=4) {
        let r = FuncLin::sqrt_pwl(g.clone()).unwrap();
        prop_assert_eq!(r.mul(&r).scale(&int(c)).as_pwl(), Some(g.scale(&int(c))));
    }

    #[test]
    fn sup_norm_brackets_sampled_values(x in arb_funclin()) {
        let tol = pow2(-20);
        let enc = sup_norm_enclosure(&x, &tol, 200_000).unwrap();
        prop_assert!(enc.width() <= tol);
        for k in 0..=16 {
            let v = x.eval_point(&ratio(k, 16), 128).unwrap();
            prop_assert!(v.mig() <= enc.hi());
        }
    }

    #[test]
    fn inner_product_is_symmetric(a in arb_pwl(false), b in arb_pwl(false), c in arb_pwl(false), d in arb_pwl(false)) {
        let x = ModuleElement::from_entries([(IndexA::Zero, FuncLin::pwl(a)), (IndexA::Pair(1, 1), FuncLin::pwl(b))]);
        let y = ModuleElement::from_entries([(IndexA::Zero, FuncLin::pwl(c)), (IndexA::Pair(1, 2), FuncLin::pwl(d))]);
        prop_assert_eq!(inner_product(&x, &y), inner_product(&y, &x));
    }

    #[test]
    fn cauchy_schwarz(a in arb_pwl(false), b in arb_pwl(false), c in arb_pwl(false), d in arb_pwl(false)) {
        let acc = Accuracy::new(pow2(-24), 200_000).unwrap();
        let x = ModuleElement::from_entries([(IndexA::Zero, FuncLin::pwl(a)), (IndexA::Pair(1, 1), FuncLin::pwl(b))]);
        let y = ModuleElement::from_entries([(IndexA::Zero, FuncLin::pwl(c)), (IndexA::Pair(1, 1), FuncLin::pwl(d))]);
        let ip = sup_norm_enclosure(&inner_product(&x, &y), &acc.tol, acc.budget).unwrap();
        let nx = module_norm(&x, &acc).unwrap();
        let ny = module_norm(&y, &acc).unwrap();
        prop_assert!(ip.lo() <= (&nx * &ny).hi());
    }

    #[test]
    fn solve_constraints_is_scale_covariant(c in -6i64..=6, n in 1u64..=6, m in 1u64..=6) {
        let qs = DenseSeq::default();
        let b0 = FuncLin::pwl(PwlFunc::identity());
        let scaled = solve_constraints(&b0.scale(&int(c)), &qs);
        let base = solve_constraints(&b0, &qs).right_action(&FuncLin::constant(int(c)));
        for a in [IndexA::Zero, IndexA::Pair(n, m)] {
            prop_assert_eq!(scaled.get(&a), base.get(&a));
        }
    }

    #[test]
    fn constraint_solution_is_orthogonal(p in arb_pwl(false), n in 1u64..=10, m in 1u64..=10) {
        let qs = DenseSeq::default();
        let x = solve_constraints(&FuncLin::pwl(p), &qs);
        prop_assert!(inner_product_generator(&zeta(n, m, &qs).unwrap(), &x).is_zero_exact());
    }
}

#[test]
fn kernel_identity_holds() {
    let qs = DenseSeq::default();
    for k in 1..=20 {
        for l in 1..=20 {
            verify_kernel(k, l, &qs).unwrap();
        }
    }
}

#[test]
fn row_sum_law() {
    let qs = DenseSeq::default();
    let x = solve_constraints(&FuncLin::one(), &qs);
    for n in 1..=4u64 {
        let q = qs.get(n).unwrap();
        for big_m in [1u64, 5, 16] {
            let squares: Vec<FuncLin> = row_prefix(n, big_m)
                .iter()
                .map(|a| {
                    let v = x.get(a);
                    v.mul(&v)
                })
                .collect();
            let sum = FuncLin::lin_combine(squares.iter().map(|s| (int(1), s)));
            let expected = make_f(&q, big_m).unwrap().scale(&hmodlab_core::rational::inv_pow4(n));
            assert_eq!(sum.as_pwl(), Some(expected));
        }
    }
}

#[test]
fn gap_is_additive() {
    let qs = DenseSeq::default();
    let x = solve_constraints(&FuncLin::one(), &qs);
    let acc = Accuracy::default();
    let gap = |a: u64, b: u64| cauchy_gap(&x, &row_prefix(3, a), &row_prefix(3, b), &acc).unwrap();
    // Tails are nonnegative, so the combined tail sits between the larger
    // piece and the sum of both.
    let (g12, g23, g13) = (gap(2, 5), gap(5, 9), gap(2, 9));
    assert!(g13.hi() <= g12.hi() + g23.hi());
    assert!(g13.lo() >= g12.lo().max(g23.lo()));
}

#[test]
fn probe_residual_is_monotone_in_columns() {
    let qs = DenseSeq::default();
    let acc = Accuracy::new(pow2(-16), 1_000_000).unwrap();
    let b0 = FuncLin::pwl(PwlFunc::identity());
    let mut prev: Option<Interval> = None;
    for m in [1u64, 2, 4, 8] {
        let r = complement_probe(&b0, 2, m, &qs, 16, &acc).unwrap();
        assert!(r.all_orthogonal());
        if let Some(p) = &prev {
            assert!(r.residual.lo() <= p.hi());
        }
        prev = Some(r.residual);
    }
}

#[test]
fn norm_of_scaled_basis_vector() {
    // ‖e_0 · b‖ = ‖b‖_∞.
    let acc = Accuracy::default();
    for k in 0..100i64 {
        let b = PwlFunc::affine(ratio(k - 50, 25), ratio(50 - 2 * k, 37));
        let x = right_action(&basis_vector(IndexA::Zero), &FuncLin::pwl(b.clone()));
        let n = module_norm(&x, &acc).unwrap();
        let exact = b.sup_norm();
        assert!(n.contains(&exact), "{n} vs {exact}");
        assert!(n.width() <= acc.tol);
    }
}
