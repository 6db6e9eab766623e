use clap::ValueEnum;
use hmodlab_core::counterexample::{
    complement_probe, make_phi, make_psi, prehilbert_demo, refute_membership, solve_constraints, verify_kernel,
    zeta, DenseSeq,
};
use hmodlab_core::enclosure::sup_norm_enclosure;
use hmodlab_core::interval::DEFAULT_PRECISION;
use hmodlab_core::module::{inner_product_generator, verify_map_bound};
use hmodlab_core::pwl::{hat, make_f, psi_sq};
use hmodlab_core::rational::{int, ratio};
use hmodlab_core::{Accuracy, Error, FuncLin, IndexA, Interval, Nat, PwlFunc, Rational};
use num_traits::{Signed, Zero};

use crate::config::RunConfig;
use crate::report::{Check, Verdict};
use crate::CliError;

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Suite {
    Identity,
    Kernel,
    Bound,
    Complement,
    Prehilbert,
    All,
}

impl Suite {
    pub fn name(self) -> &'static str {
        match self {
            Suite::Identity => "identity",
            Suite::Kernel => "kernel",
            Suite::Bound => "bound",
            Suite::Complement => "complement",
            Suite::Prehilbert => "prehilbert",
            Suite::All => "all",
        }
    }

    /// The concrete suites `self` stands for.
    pub fn expand(self) -> Vec<Suite> {
        match self {
            Suite::All => vec![Suite::Identity, Suite::Kernel, Suite::Bound, Suite::Complement, Suite::Prehilbert],
            s => vec![s],
        }
    }

    pub fn run(self, config: &RunConfig) -> Result<Vec<Check>, CliError> {
        let acc = config.accuracy()?;
        let qs = config.sequence()?;
        match self {
            Suite::Identity => identity(),
            Suite::Kernel => kernel(&qs, &acc),
            Suite::Bound => bound(&qs, config.trunc, &acc),
            Suite::Complement => complement(&qs, config, &acc),
            Suite::Prehilbert => prehilbert(),
            Suite::All => unreachable!("expanded by the caller"),
        }
    }
}

pub fn q_grid() -> Vec<Rational> {
    [(1, 1), (1, 2), (1, 4), (3, 4), (1, 8), (3, 8), (5, 8), (7, 8)]
        .iter()
        .map(|&(a, b)| ratio(a, b))
        .collect()
}

const MAX_COLUMN: u64 = 64;

fn identity() -> Result<Vec<Check>, CliError> {
    let mut checks = Vec::new();
    for q in q_grid() {
        let mut sum = PwlFunc::zero();
        for m in 1..=MAX_COLUMN {
            sum = &sum + &psi_sq(&q, m)?;
            let diff = &sum - &make_f(&q, m)?;
            let check = if diff.is_zero() {
                Check::new("telescoping", Verdict::ExactZero, true)
            } else {
                let sup = diff.sup_norm();
                Check::new("telescoping", Verdict::Enclosure, false).interval(&Interval::point(&sup, DEFAULT_PRECISION))
            };
            checks.push(check.rational("q", &q).param("M", m));
        }
    }
    Ok(checks)
}

fn kernel(qs: &DenseSeq, acc: &Accuracy) -> Result<Vec<Check>, CliError> {
    let mut checks = Vec::new();
    for k in 1..=20u64 {
        for l in 1..=20u64 {
            let check = match verify_kernel(k, l, qs) {
                Ok(()) => Check::new("kernel", Verdict::ExactZero, true),
                Err(Error::ConstructionBug { residual }) => {
                    let sup = sup_norm_enclosure(&residual, &acc.tol, acc.budget)?;
                    Check::new("kernel", Verdict::Enclosure, false)
                        .interval(&sup)
                        .witness(&*residual)?
                }
                Err(e) => return Err(e.into()),
            };
            checks.push(check.param("k", k).param("l", l));
        }
    }
    Ok(checks)
}

/// Certificate check; a violation becomes a failed record.
fn bound_check(name: &str, result: hmodlab_core::Result<Interval>) -> Result<(Check, Interval), CliError> {
    match result {
        Ok(enc) => Ok((Check::new(name, Verdict::Enclosure, true).interval(&enc), enc)),
        Err(Error::CertificateViolation { enclosure, .. }) => {
            Ok((Check::new(name, Verdict::Enclosure, false).interval(&enclosure), enclosure))
        }
        Err(e) => Err(e.into()),
    }
}

fn bound(qs: &DenseSeq, (rows, cols): (u64, u64), acc: &Accuracy) -> Result<Vec<Check>, CliError> {
    let mut checks = Vec::new();
    for q in q_grid() {
        let family = make_psi(&q)?;
        for m in 1..=MAX_COLUMN {
            let subset: Vec<Nat> = (1..=m).map(Nat).collect();
            let expected = (&q * int(m as i64)).min(int(1));
            let (mut check, enc) = bound_check("psi-partial-norm", verify_map_bound(&family, &subset, acc))?;
            check.passed &= enc.lo() == expected && enc.hi() == expected;
            checks.push(
                check
                    .rational("q", &q)
                    .param("M", m)
                    .rational("expected", &expected)
                    .rational("bound", family.bound()),
            );
        }
    }

    let phi = make_phi(qs);
    let mut widths: Vec<u64> = std::iter::successors(Some(1u64), |w| (*w < cols).then(|| (2 * w).min(cols))).collect();
    widths.dedup();
    for n in 1..=rows {
        for &m in &widths {
            let mut subset = vec![IndexA::Zero];
            for i in 1..=n {
                subset.extend((1..=m).map(|j| IndexA::Pair(i, j)));
            }
            let (check, _) = bound_check("phi-partial-norm", verify_map_bound(&phi, &subset, acc))?;
            checks.push(
                check
                    .param("rows", n)
                    .param("columns", m)
                    .rational("bound", phi.bound()),
            );
        }
    }
    Ok(checks)
}

fn sample_b0s() -> Result<Vec<(&'static str, FuncLin)>, CliError> {
    Ok(vec![
        ("1", FuncLin::one()),
        ("t", FuncLin::pwl(PwlFunc::identity())),
        ("hat(1/3)", FuncLin::pwl(hat(&ratio(1, 3))?)),
    ])
}

const ORTHOGONALITY_RANGE: u64 = 10;

fn complement(qs: &DenseSeq, config: &RunConfig, acc: &Accuracy) -> Result<Vec<Check>, CliError> {
    let mut checks = Vec::new();
    let b0s = sample_b0s()?;
    for (name, b0) in &b0s {
        let x = solve_constraints(b0, qs);
        for n in 1..=ORTHOGONALITY_RANGE {
            for m in 1..=ORTHOGONALITY_RANGE {
                let ip = inner_product_generator(&zeta(n, m, qs)?, &x);
                let check = if ip.is_zero_exact() {
                    Check::new("orthogonality", Verdict::ExactZero, true)
                } else {
                    let sup = sup_norm_enclosure(&ip, &acc.tol, acc.budget)?;
                    Check::new("orthogonality", Verdict::Enclosure, false).interval(&sup)
                };
                checks.push(check.param("b0", *name).param("n", n).param("m", m));
            }
        }
    }
    for (name, b0) in &b0s {
        let w = refute_membership(b0, qs, config.depth, acc)?;
        let first = w.checks.first().map(|c| c.gap.clone());
        let mut check = Check::new("non-membership", Verdict::Enclosure, w.consistent())
            .param("b0", *name)
            .rational("asymptote", &w.asymptote);
        if let Some(gap) = &first {
            check = check.interval(gap);
        }
        checks.push(check.witness(&w)?);
    }
    let (rows, cols) = config.trunc;
    for (name, b0) in &b0s {
        let report = complement_probe(b0, rows, cols, qs, config.depth, acc)?;
        let passed = report.all_orthogonal() && report.witness.as_ref().is_some_and(|w| w.consistent());
        checks.push(
            Check::new("probe", Verdict::Enclosure, passed)
                .param("b0", *name)
                .param("N", rows)
                .param("M", cols)
                .interval(&report.residual)
                .witness(&report)?,
        );
    }
    checks.push(density(qs)?);
    Ok(checks)
}

/// Largest distance from `k/100` to `{q_1, …, q_256}`.
fn density(qs: &DenseSeq) -> Result<Check, CliError> {
    let values: Vec<Rational> = (1..=256).map(|n| qs.get(n)).collect::<Result<_, _>>()?;
    let mut worst = Rational::zero();
    for k in 0..=100 {
        let r = ratio(k, 100);
        let d = values.iter().map(|q| (q - &r).abs()).min().expect("nonempty");
        worst = worst.max(d);
    }
    let eps = ratio(1, 128);
    Ok(Check::new("density", Verdict::Enclosure, worst <= eps)
        .param("n_max", 256)
        .rational("epsilon", &eps)
        .interval(&Interval::point(&worst, DEFAULT_PRECISION)))
}

fn prehilbert() -> Result<Vec<Check>, CliError> {
    let mut checks = Vec::new();
    let small = prehilbert_demo(3)?;
    checks.push(
        Check::new("kernel-basis", Verdict::ExactZero, small.kernel_is_geometric)
            .param("N", 3)
            .witness(&small)?,
    );
    let wide = prehilbert_demo(50)?;
    checks.push(Check::new("phi-orthogonal", Verdict::ExactZero, wide.phi_orthogonal).param("N", 50));
    let limit = ratio(1, 3);
    let tol = ratio(1, 1_000_000);
    for n in [10usize, 20, 40] {
        let r = prehilbert_demo(n)?;
        let passed = (&r.distance_sq - &limit).abs() <= tol;
        checks.push(
            Check::new("distance", Verdict::Enclosure, passed)
                .param("N", n)
                .rational("limit", &limit)
                .interval(&Interval::point(&r.distance_sq, DEFAULT_PRECISION)),
        );
    }
    Ok(checks)
}
