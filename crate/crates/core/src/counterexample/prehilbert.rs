//! The pre-Hilbert warm-up: `S = {e_n − 2e_{n+1}}` has trivial complement in
//! the span of the `e_n`, yet `φ = (2^{-n})_n` in the completion is
//! orthogonal to all of `S`.

use num_traits::{One, Zero};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::rational::{self, int, pow2, ratio, Rational};

#[derive(Clone, Debug, Serialize)]
pub struct PrehilbertReport {
    pub n: usize,
    /// Basis of `{v ∈ Q^N : ⟨e_n − 2e_{n+1}, v⟩ = 0, n < N}`.
    #[serde(serialize_with = "serialize_vectors")]
    pub kernel_basis: Vec<Vec<Rational>>,
    /// The kernel is `span{(2^{N−1}, …, 2, 1)}`.
    pub kernel_is_geometric: bool,
    /// `⟨e_n − 2e_{n+1}, φ⟩ = 0` exactly for every `n ≤ N`.
    pub phi_orthogonal: bool,
    /// Squared distance from `(2^{-1}, …, 2^{-N})` to `span{s_1, …, s_{N−1}}`.
    #[serde(with = "rational::serde_str")]
    pub distance_sq: Rational,
    /// `‖φ‖² = Σ 4^{-n} = 1/3`.
    #[serde(with = "rational::serde_str")]
    pub limit_norm_sq: Rational,
}

fn serialize_vectors<S: serde::Serializer>(vs: &[Vec<Rational>], s: S) -> std::result::Result<S::Ok, S::Error> {
    let strings: Vec<Vec<String>> = vs.iter().map(|v| v.iter().map(rational::format).collect()).collect();
    strings.serialize(s)
}

/// `s_n = e_n − 2e_{n+1}` in `Q^N`.
fn constraint_row(n: usize, dim: usize) -> Vec<Rational> {
    let mut row = vec![Rational::zero(); dim];
    row[n - 1] = Rational::one();
    if n < dim {
        row[n] = int(-2);
    }
    row
}

fn dot(a: &[Rational], b: &[Rational]) -> Rational {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Reduced row echelon form in place; returns the pivot columns.
fn rref(m: &mut [Vec<Rational>]) -> Vec<usize> {
    let cols = m.first().map_or(0, Vec::len);
    let mut pivots = Vec::new();
    let mut row = 0;
    for col in 0..cols {
        let Some(p) = (row..m.len()).find(|&r| !m[r][col].is_zero()) else {
            continue;
        };
        m.swap(row, p);
        let inv = m[row][col].recip();
        for x in m[row].iter_mut() {
            *x *= &inv;
        }
        for r in 0..m.len() {
            if r != row && !m[r][col].is_zero() {
                let f = m[r][col].clone();
                let pivot_row = m[row].clone();
                for (x, p) in m[r].iter_mut().zip(&pivot_row) {
                    *x -= &f * p;
                }
            }
        }
        pivots.push(col);
        row += 1;
        if row == m.len() {
            break;
        }
    }
    pivots
}

/// Exact nullspace basis, one vector per free column.
pub fn nullspace(matrix: &[Vec<Rational>]) -> Vec<Vec<Rational>> {
    let cols = matrix.first().map_or(0, Vec::len);
    let mut m = matrix.to_vec();
    let pivots = rref(&mut m);
    (0..cols)
        .filter(|c| !pivots.contains(c))
        .map(|free| {
            let mut v = vec![Rational::zero(); cols];
            v[free] = Rational::one();
            for (r, &pc) in pivots.iter().enumerate() {
                v[pc] = -m[r][free].clone();
            }
            v
        })
        .collect()
}

/// Solves the square system `a x = b` exactly; `None` if singular.
fn solve(a: &[Vec<Rational>], b: &[Rational]) -> Option<Vec<Rational>> {
    let n = a.len();
    let mut aug: Vec<Vec<Rational>> = a
        .iter()
        .zip(b)
        .map(|(row, bi)| {
            let mut r = row.clone();
            r.push(bi.clone());
            r
        })
        .collect();
    let pivots = rref(&mut aug);
    (pivots.len() == n && pivots.iter().enumerate().all(|(i, &p)| i == p))
        .then(|| aug.into_iter().map(|r| r[n].clone()).collect())
}

/// Least-squares squared distance from `target` to the span of `vectors`
/// (assumed independent), via the normal equations.
pub fn distance_sq_to_span(target: &[Rational], vectors: &[Vec<Rational>]) -> Option<Rational> {
    let gram: Vec<Vec<Rational>> = vectors
        .iter()
        .map(|u| vectors.iter().map(|v| dot(u, v)).collect())
        .collect();
    let rhs: Vec<Rational> = vectors.iter().map(|u| dot(u, target)).collect();
    let coeffs = solve(&gram, &rhs)?;
    let residual: Vec<Rational> = target
        .iter()
        .enumerate()
        .map(|(i, t)| t - vectors.iter().zip(&coeffs).map(|(v, c)| c * &v[i]).sum::<Rational>())
        .collect();
    Some(dot(&residual, &residual))
}

/// `φ_n = 2^{-n}`.
fn phi(n: usize) -> Rational {
    pow2(-(n as i64))
}

pub fn prehilbert_demo(n: usize) -> Result<PrehilbertReport> {
    if n < 2 {
        return Err(Error::Parameter("prehilbert_demo needs N >= 2".into()));
    }
    let constraints: Vec<Vec<Rational>> = (1..n).map(|k| constraint_row(k, n)).collect();
    let kernel_basis = nullspace(&constraints);
    let geometric: Vec<Rational> = (1..=n).map(|k| pow2((n - k) as i64)).collect();
    let kernel_is_geometric = kernel_basis.len() == 1 && {
        let v = &kernel_basis[0];
        let scale = &v[n - 1];
        !scale.is_zero() && v.iter().zip(&geometric).all(|(a, g)| *a == g * scale)
    };

    let phi_orthogonal = (1..=n).all(|k| (phi(k) - int(2) * phi(k + 1)).is_zero());

    let target: Vec<Rational> = (1..=n).map(phi).collect();
    let distance_sq = distance_sq_to_span(&target, &constraints)
        .ok_or_else(|| Error::Parameter("constraint vectors are dependent".into()))?;

    Ok(PrehilbertReport {
        n,
        kernel_basis,
        kernel_is_geometric,
        phi_orthogonal,
        distance_sq,
        limit_norm_sq: ratio(1, 3),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn three_dimensional_kernel() {
        let r = prehilbert_demo(3).unwrap();
        assert_eq!(r.kernel_basis, vec![vec![int(4), int(2), int(1)]]);
        assert!(r.kernel_is_geometric);
        assert!(r.phi_orthogonal);
    }

    #[test]
    fn nullspace_of_generic_matrix() {
        let m = vec![vec![int(1), int(2), int(3)], vec![int(2), int(4), int(6)]];
        let ns = nullspace(&m);
        assert_eq!(ns.len(), 2);
        for v in &ns {
            assert!(dot(&m[0], v).is_zero());
        }
    }

    #[test]
    fn distance_to_line() {
        // (1, 1) to span{(1, 0)} is 1.
        let d = distance_sq_to_span(&[int(1), int(1)], &[vec![int(1), int(0)]]).unwrap();
        assert_eq!(d, int(1));
    }

    #[test]
    fn small_n_rejected() {
        assert!(prehilbert_demo(1).is_err());
    }
}
