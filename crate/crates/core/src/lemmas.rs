//! Four trace inequalities for Hermitian matrices, evaluated numerically.

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::{hermitian_eigen, non_hermiticity, CMat};

/// Non-Hermiticity accepted on input.
const HERMITIAN_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct InequalityCheck {
    pub lhs: f64,
    pub rhs: f64,
    /// `rhs − lhs`.
    pub slack: f64,
    /// `|rhs − lhs|` is below tolerance.
    pub equality: bool,
    /// The stated equality condition, evaluated independently of the traces.
    pub condition: bool,
}

impl InequalityCheck {
    fn new(lhs: f64, rhs: f64, condition: bool, tol: f64) -> Self {
        let scale = 1.0_f64.max(lhs.abs()).max(rhs.abs());
        Self { lhs, rhs, slack: rhs - lhs, equality: (rhs - lhs).abs() <= tol * scale, condition }
    }

    pub fn holds(&self, tol: f64) -> bool {
        self.slack >= -tol
    }
}

/// `None` marks a lemma whose positivity preconditions fail for the inputs.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LemmaReport {
    /// `Tr[(AB)²] ≤ Tr(A²B²)`, equality iff `[A, B] = 0`.
    pub commutator: InequalityCheck,
    /// `Tr(AᵀBᵀAB) ≤ Tr(A²B²)`, equality iff `AB = (AB)ᵀ`.
    pub transpose: InequalityCheck,
    /// `Tr(AB) ≤ ‖A‖ Tr B`, equality iff `supp B` lies in the top eigenspace of `A`.
    pub spectral: Option<InequalityCheck>,
    /// `Tr(A²) ≤ (Tr A)²`, equality iff `A` has at most one nonzero, simple eigenvalue.
    pub rank_one: Option<InequalityCheck>,
}

impl LemmaReport {
    pub fn all_hold(&self, tol: f64) -> bool {
        self.commutator.holds(tol)
            && self.transpose.holds(tol)
            && self.spectral.is_none_or(|c| c.holds(tol))
            && self.rank_one.is_none_or(|c| c.holds(tol))
    }
}

fn max_abs(m: &CMat) -> f64 {
    m.iter().fold(0.0_f64, |acc, z| acc.max(z.norm()))
}

fn is_psd(vals: &[f64], tol: f64) -> bool {
    let scale = vals.iter().fold(1.0_f64, |a, v| a.max(v.abs()));
    vals.iter().all(|v| *v >= -tol * scale)
}

/// Evaluates all four inequalities on `(A, B)`; `tol` governs equality flags.
pub fn verify_matrix_lemmas(a: &CMat, b: &CMat, tol: f64) -> Result<LemmaReport> {
    if !a.is_square() || a.shape() != b.shape() {
        return Err(Error::PrecondViolated(format!("shapes {:?} and {:?}", a.shape(), b.shape())));
    }
    for (name, m) in [("A", a), ("B", b)] {
        let res = non_hermiticity(m);
        if res > HERMITIAN_TOL * max_abs(m).max(1.0) {
            return Err(Error::PrecondViolated(format!("{name} is not Hermitian (residual {res:e})")));
        }
    }
    let ab = a * b;
    let a2b2 = (a * a * b * b).trace().re;
    let comm = &ab - b * a;
    let scale = max_abs(&ab).max(1.0);
    let commutator = InequalityCheck::new((&ab * &ab).trace().re, a2b2, max_abs(&comm) <= tol * scale, tol);

    let abt = ab.transpose();
    let transpose = InequalityCheck::new(
        (a.transpose() * b.transpose() * &ab).trace().re,
        a2b2,
        max_abs(&(&ab - &abt)) <= tol * scale,
        tol,
    );

    let (a_vals, a_vecs) = hermitian_eigen(a);
    let (b_vals, _) = hermitian_eigen(b);
    let a_psd = is_psd(&a_vals, tol);
    let spectral = (a_psd && is_psd(&b_vals, tol)).then(|| {
        let top = *a_vals.last().expect("non-empty spectrum");
        let a_scale = top.abs().max(1.0);
        // B restricted to the eigenvectors of A below the top eigenvalue.
        let low: Vec<usize> = (0..a_vals.len()).filter(|&k| a_vals[k] < top - tol * a_scale).collect();
        let leak = low
            .iter()
            .map(|&k| {
                let v = a_vecs.column(k);
                (v.adjoint() * b * v)[(0, 0)].re
            })
            .fold(0.0_f64, f64::max);
        let b_scale = max_abs(b).max(1.0);
        InequalityCheck::new((a * b).trace().re, top * b.trace().re, leak <= tol * b_scale, tol)
    });

    let rank_one = a_psd.then(|| {
        let a_scale = a_vals.iter().fold(1.0_f64, |m, v| m.max(v.abs()));
        let nonzero = a_vals.iter().filter(|v| v.abs() > tol * a_scale).count();
        let tr = a.trace().re;
        InequalityCheck::new((a * a).trace().re, tr * tr, nonzero <= 1, tol)
    });

    Ok(LemmaReport { commutator, transpose, spectral, rank_one })
}

/// Random positive semi-definite matrix `X X†` of the given rank.
pub fn random_psd<R: rand::Rng + ?Sized>(n: usize, rank: usize, rng: &mut R) -> CMat {
    use rand_distr::StandardNormal;
    let x = CMat::from_fn(n, rank, |_, _| Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal)));
    let p = &x * x.adjoint();
    (&p + p.adjoint()) * Complex64::new(0.5, 0.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::random_hermitian;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn real_diag(v: &[f64]) -> CMat {
        CMat::from_diagonal(&nalgebra::DVector::from_iterator(v.len(), v.iter().map(|&x| Complex64::new(x, 0.0))))
    }

    #[test]
    fn commuting_diagonals_reach_equality() {
        let r = verify_matrix_lemmas(&real_diag(&[1.0, -2.0, 3.0]), &real_diag(&[0.5, 4.0, -1.0]), 1e-10).unwrap();
        assert!(r.commutator.equality && r.commutator.condition);
        assert!(r.transpose.equality && r.transpose.condition);
        assert!(r.spectral.is_none() && r.rank_one.is_none());
    }

    #[test]
    fn rank_one_matrix_reaches_equality() {
        let a = real_diag(&[1.0, 0.0]);
        let r = verify_matrix_lemmas(&a, &real_diag(&[1.0, 0.0]), 1e-10).unwrap();
        let four = r.rank_one.unwrap();
        assert!(four.equality && four.condition);
        let three = r.spectral.unwrap();
        assert!(three.equality && three.condition);
    }

    #[test]
    fn strict_cases_are_flagged() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let a = random_psd(4, 4, &mut rng);
        let b = random_psd(4, 4, &mut rng);
        let r = verify_matrix_lemmas(&a, &b, 1e-10).unwrap();
        assert!(!r.commutator.equality && !r.commutator.condition);
        assert!(!r.spectral.unwrap().condition && !r.rank_one.unwrap().condition);
        assert!(r.all_hold(1e-10));
    }

    #[test]
    fn preconditions() {
        let nh = CMat::from_row_slice(2, 2, &[0.0, 1.0, 0.0, 0.0].map(|x| Complex64::new(x, 0.0)));
        assert!(matches!(verify_matrix_lemmas(&nh, &nh, 1e-10), Err(Error::PrecondViolated(_))));
        let a = CMat::identity(2, 2);
        let b = CMat::identity(3, 3);
        assert!(matches!(verify_matrix_lemmas(&a, &b, 1e-10), Err(Error::PrecondViolated(_))));
    }

    #[test]
    fn random_pairs_satisfy_all_inequalities() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        for _ in 0..200 {
            let n = rng.random_range(1..=6);
            let (a, b) = if rng.random_bool(0.5) {
                (random_hermitian(n, &mut rng), random_hermitian(n, &mut rng))
            } else {
                let ka = rng.random_range(1..=n);
                let kb = rng.random_range(1..=n);
                (random_psd(n, ka, &mut rng), random_psd(n, kb, &mut rng))
            };
            let r = verify_matrix_lemmas(&a, &b, 1e-10).unwrap();
            assert!(r.all_hold(1e-10), "{r:?}");
        }
    }
}
