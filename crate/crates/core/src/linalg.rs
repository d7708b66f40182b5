//! Small dense helpers shared by every engine.
//!
//! Phase-space vectors use the block ordering `(x_1 .. x_M, y_1 .. y_M)`.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

pub type RMat = DMatrix<f64>;
pub type CMat = DMatrix<Complex64>;
pub type RVec = DVector<f64>;

pub(crate) const I: Complex64 = Complex64::new(0.0, 1.0);

/// `J = [[0, I], [-I, 0]]` for `m` modes.
pub fn symplectic_form(m: usize) -> RMat {
    let mut j = RMat::zeros(2 * m, 2 * m);
    for k in 0..m {
        j[(k, m + k)] = 1.0;
        j[(m + k, k)] = -1.0;
    }
    j
}

/// The unitary `W` with `(a, a†) = W (x, y)`.
pub fn basis_change(m: usize) -> CMat {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let mut w = CMat::zeros(2 * m, 2 * m);
    for k in 0..m {
        w[(k, k)] = Complex64::new(s, 0.0);
        w[(k, m + k)] = Complex64::new(0.0, s);
        w[(m + k, k)] = Complex64::new(s, 0.0);
        w[(m + k, m + k)] = Complex64::new(0.0, -s);
    }
    w
}

/// `W† diag(top, bottom) W` evaluated as a complex matrix.
pub fn conjugate_by_w(top: &CMat, bottom: &CMat) -> CMat {
    let m = top.nrows();
    let w = basis_change(m);
    let mut blocks = CMat::zeros(2 * m, 2 * m);
    blocks.view_mut((0, 0), (m, m)).copy_from(top);
    blocks.view_mut((m, m), (m, m)).copy_from(bottom);
    w.adjoint() * blocks * w
}

/// Largest absolute imaginary entry.
pub(crate) fn max_imag(c: &CMat) -> f64 {
    c.iter().fold(0.0_f64, |acc, z| acc.max(z.im.abs()))
}

pub(crate) fn real_part(c: &CMat) -> RMat {
    c.map(|z| z.re)
}

pub(crate) fn to_complex(r: &RMat) -> CMat {
    r.map(|x| Complex64::new(x, 0.0))
}

/// Recovers `U` from a lifted rotation `[[Re U, -Im U], [Im U, Re U]]`.
pub fn unlift(r: &RMat) -> CMat {
    let m = r.nrows() / 2;
    CMat::from_fn(m, m, |i, j| Complex64::new(r[(i, j)], r[(m + i, j)]))
}

/// The real block form `[[Re H, -Im H], [Im H, Re H]]` of a complex matrix.
pub fn realify(h: &CMat) -> RMat {
    let m = h.nrows();
    let mut out = RMat::zeros(2 * m, 2 * m);
    for i in 0..m {
        for j in 0..m {
            let z = h[(i, j)];
            out[(i, j)] = z.re;
            out[(m + i, m + j)] = z.re;
            out[(i, m + j)] = -z.im;
            out[(m + i, j)] = z.im;
        }
    }
    out
}

pub(crate) fn asymmetry(a: &RMat) -> f64 {
    (a - a.transpose()).amax()
}

pub(crate) fn non_hermiticity(a: &CMat) -> f64 {
    (a - a.adjoint()).iter().fold(0.0_f64, |acc, z| acc.max(z.norm()))
}

pub(crate) fn unitarity_residual(u: &CMat) -> f64 {
    let n = u.nrows();
    (u.adjoint() * u - CMat::identity(n, n)).iter().fold(0.0_f64, |acc, z| acc.max(z.norm()))
}

pub(crate) fn symmetrize(a: &RMat) -> RMat {
    (a + a.transpose()) * 0.5
}

/// Eigen-decomposition of a Hermitian matrix, eigenvalues ascending.
pub fn hermitian_eigen(h: &CMat) -> (Vec<f64>, CMat) {
    let herm = (h + h.adjoint()) * Complex64::new(0.5, 0.0);
    let eig = herm.symmetric_eigen();
    let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let values = order.iter().map(|&k| eig.eigenvalues[k]).collect();
    let vectors =
        CMat::from_columns(&order.iter().map(|&k| eig.eigenvectors.column(k).into_owned()).collect::<Vec<_>>());
    (values, vectors)
}

/// Eigen-decomposition of a real symmetric matrix, eigenvalues ascending.
pub fn symmetric_eigen(a: &RMat) -> (Vec<f64>, RMat) {
    let eig = symmetrize(a).symmetric_eigen();
    let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    order.sort_by(|&x, &y| eig.eigenvalues[x].total_cmp(&eig.eigenvalues[y]));
    let values = order.iter().map(|&k| eig.eigenvalues[k]).collect();
    let vectors =
        RMat::from_columns(&order.iter().map(|&k| eig.eigenvectors.column(k).into_owned()).collect::<Vec<_>>());
    (values, vectors)
}

/// `f(A)` for a real symmetric `A` through its spectrum.
pub(crate) fn symmetric_fn(a: &RMat, f: impl Fn(f64) -> f64) -> RMat {
    let (vals, vecs) = symmetric_eigen(a);
    let d = RMat::from_diagonal(&RVec::from_iterator(vals.len(), vals.into_iter().map(f)));
    &vecs * d * vecs.transpose()
}

pub fn spectral_norm_hermitian(h: &CMat) -> f64 {
    let (vals, _) = hermitian_eigen(h);
    vals.iter().fold(0.0_f64, |acc, v| acc.max(v.abs()))
}

/// Block-diagonal `a ⊕ I` of total size `k`.
pub fn embed(a: &CMat, k: usize) -> CMat {
    let mut out = CMat::identity(k, k);
    out.view_mut((0, 0), (a.nrows(), a.ncols())).copy_from(a);
    out
}

/// Block-diagonal `a ⊕ 0` of total size `k`.
pub fn embed_zero(a: &CMat, k: usize) -> CMat {
    let mut out = CMat::zeros(k, k);
    out.view_mut((0, 0), (a.nrows(), a.ncols())).copy_from(a);
    out
}

/// Haar-random unitary via QR of a complex Ginibre matrix.
pub fn random_unitary<R: Rng + ?Sized>(m: usize, rng: &mut R) -> CMat {
    let z = CMat::from_fn(m, m, |_, _| {
        let re: f64 = rng.sample(StandardNormal);
        let im: f64 = rng.sample(StandardNormal);
        Complex64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
    });
    let qr = z.qr();
    let mut q = qr.q();
    let r = qr.r();
    for j in 0..m {
        let d = r[(j, j)];
        let phase = if d.norm() > 0.0 { d / d.norm() } else { Complex64::new(1.0, 0.0) };
        for i in 0..m {
            q[(i, j)] *= phase;
        }
    }
    q
}

/// Random Hermitian matrix with standard-normal entries.
pub fn random_hermitian<R: Rng + ?Sized>(n: usize, rng: &mut R) -> CMat {
    let z = CMat::from_fn(n, n, |_, _| {
        let re: f64 = rng.sample(StandardNormal);
        let im: f64 = rng.sample(StandardNormal);
        Complex64::new(re, im)
    });
    (&z + z.adjoint()) * Complex64::new(0.5, 0.0)
}
