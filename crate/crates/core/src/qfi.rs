//! Quantum Fisher information of a Gaussian probe sent through a passive circuit.
//!
//! The output state is `Γ_φ = R_φ Γ R_φᵀ`, `d_φ = R_φ d`. For mixed probes the
//! coefficient matrix `Λ_φ` solves
//!
//! ```text
//! Λ + ¼ Γ⁻¹ J Λ J Γ⁻¹ = ½ Γ⁻¹ ∂Γ Γ⁻¹
//! ```
//!
//! which is a Stein equation `Λ − C Λ Cᵀ = Q` with `C = ½ Γ⁻¹ J`. It is solved
//! by vectorization in the Williamson frame of `Γ`. On pure states the
//! operator is singular and the minimum-norm least-squares solution is used.

use nalgebra::Cholesky;
use num_complex::Complex64;
use serde::Serialize;

use crate::circuit::{generator_rotation, PassiveCircuit};
use crate::error::{Error, Result};
use crate::gaussian::{canonical_decomposition, williamson, GaussianState, Tolerances};
use crate::linalg::{non_hermiticity, realify, symmetric_eigen, symmetrize, symplectic_form, CMat, RMat, RVec};

/// Backsubstitution tolerance on the Λ equation, relative to `max(1, ‖Q‖_F)`.
pub const LAMBDA_TOL: f64 = 1e-9;

/// Symplectic eigenvalues closer than this to 1/2 switch to least squares.
pub const NEAR_PURE: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Route {
    #[serde(rename = "mixed-stein")]
    MixedStein,
    #[serde(rename = "pure-closed-form")]
    PureClosedForm,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct QfiReport {
    pub qfi: f64,
    /// Covariance contribution `Tr(Λ ∂Γ_φ)`.
    pub f1: f64,
    /// Displacement contribution `∂d_φᵀ Γ_φ⁻¹ ∂d_φ`.
    pub f2: f64,
    pub bound: f64,
    pub saturation_residual: f64,
    pub lambda_residual: f64,
    pub route: Route,
    pub specnorm: f64,
    pub nbar: f64,
}

/// Output moments and their φ-derivatives.
#[derive(Debug, Clone)]
pub struct OutputMoments {
    pub gamma: RMat,
    pub disp: RVec,
    pub dgamma: RMat,
    pub ddisp: RVec,
}

/// `(R_φ, dR_φ/dφ)` with `dR/dφ = R K`, `K = −i G`.
pub fn circuit_frechet<C: PassiveCircuit + ?Sized>(circuit: &C, phi: f64) -> (RMat, RMat) {
    let r = realify(&circuit.unitary(phi));
    let k = generator_rotation(&circuit.generator_matrix(phi));
    let dr = &r * k;
    (r, dr)
}

pub fn output_moments<C: PassiveCircuit + ?Sized>(
    state: &GaussianState,
    circuit: &C,
    phi: f64,
) -> Result<OutputMoments> {
    check_modes(state, circuit)?;
    let r = realify(&circuit.unitary(phi));
    let k = generator_rotation(&circuit.generator_matrix(phi));
    let g = state.gamma();
    let d = state.disp();
    // R [K, Γ] Rᵀ is exactly symmetric for antisymmetric K and vanishes for Γ ∝ I.
    let kg = &k * g;
    let comm = &kg + kg.transpose();
    Ok(OutputMoments {
        gamma: symmetrize(&(&r * g * r.transpose())),
        disp: &r * d,
        dgamma: symmetrize(&(&r * comm * r.transpose())),
        ddisp: &r * (&k * d),
    })
}

fn check_modes<C: PassiveCircuit + ?Sized>(state: &GaussianState, circuit: &C) -> Result<()> {
    if state.modes() != circuit.modes() {
        return Err(Error::DimensionMismatch(format!(
            "state has {} modes, circuit has {}",
            state.modes(),
            circuit.modes()
        )));
    }
    Ok(())
}

fn inverse_spd(a: &RMat) -> Result<RMat> {
    Cholesky::new(symmetrize(a))
        .map(|c| c.inverse())
        .ok_or_else(|| Error::NotPositiveDefinite("output covariance".into()))
}

/// Right-hand side `Q = −½ ∂Γ⁻¹ = ½ Γ⁻¹ ∂Γ Γ⁻¹`.
fn stein_rhs(gamma_inv: &RMat, dgamma: &RMat) -> RMat {
    symmetrize(&(gamma_inv * dgamma * gamma_inv * 0.5))
}

/// `‖Λ + ¼Γ⁻¹JΛJΓ⁻¹ − Q‖_F / max(1, ‖Q‖_F)`.
pub fn lambda_residual(gamma: &RMat, dgamma: &RMat, lambda: &RMat) -> Result<f64> {
    let inv = inverse_spd(gamma)?;
    let j = symplectic_form(gamma.nrows() / 2);
    let q = stein_rhs(&inv, dgamma);
    let lhs = lambda + &inv * &j * lambda * &j * &inv * 0.25;
    Ok((lhs - &q).norm() / q.norm().max(1.0))
}

/// Solves the Λ equation for the output covariance and its derivative.
///
/// Returns `(Λ, residual)`.
pub fn solve_lambda(gamma: &RMat, dgamma: &RMat) -> Result<(RMat, f64)> {
    let n = gamma.nrows();
    if !n.is_multiple_of(2) || gamma.shape() != dgamma.shape() || gamma.ncols() != n {
        return Err(Error::DimensionMismatch("Λ equation operands disagree in shape".into()));
    }
    if dgamma.amax() == 0.0 {
        return Ok((RMat::zeros(n, n), 0.0));
    }
    // Work in the Williamson frame Λ = S⁻ᵀ M S⁻¹, where the equation reads
    // M − C M Cᵀ = Sᵀ Q S with C = ½ Σ⁻¹ J. The minimum-norm solution there
    // carries no component along the kernel that opens up on pure pairs.
    let w = williamson(gamma)?;
    let near_pure = w.sigma.iter().any(|s| *s < 0.5 + NEAR_PURE);
    let inv = inverse_spd(gamma)?;
    let q = stein_rhs(&inv, dgamma);
    let qs = w.s.transpose() * &q * &w.s;
    let sigma_inv = RMat::from_fn(n, n, |i, k| if i == k { 1.0 / w.sigma[i % (n / 2)] } else { 0.0 });
    let c = sigma_inv * symplectic_form(n / 2) * 0.5;
    let op = RMat::identity(n * n, n * n) - c.kronecker(&c);
    let rhs = RVec::from_column_slice(qs.as_slice());
    let sol = if near_pure {
        min_norm_solve(&op, &rhs)
    } else {
        op.lu().solve(&rhs).ok_or_else(|| Error::DecompositionFailed("Stein operator is singular".into()))?
    };
    let s_inv =
        w.s.clone().try_inverse().ok_or_else(|| Error::DecompositionFailed("Williamson factor is singular".into()))?;
    let m = RMat::from_column_slice(n, n, sol.as_slice());
    let lambda = symmetrize(&(s_inv.transpose() * m * &s_inv));
    let res = lambda_residual(gamma, dgamma, &lambda)?;
    if res.is_nan() || res >= LAMBDA_TOL {
        return Err(Error::SingularBeyondPureTol(res));
    }
    Ok((lambda, res))
}

/// Minimum-norm least squares through the eigen-decomposition of `AᵀA`.
///
/// Eigenvalues of `AᵀA` carry an absolute error near `ε·λ_max`, so the
/// cutoff `1e−9·λ_max` (singular values below about `3e−5·σ_max`) keeps
/// roundoff out of the kernel.
fn min_norm_solve(a: &RMat, b: &RVec) -> RVec {
    let (vals, vecs) = symmetric_eigen(&(a.transpose() * a));
    let top = vals.iter().copied().fold(0.0, f64::max);
    let cutoff = 1e-9 * top;
    let proj = vecs.transpose() * (a.transpose() * b);
    let scaled = RVec::from_fn(vals.len(), |i, _| if vals[i] > cutoff { proj[i] / vals[i] } else { 0.0 });
    vecs * scaled
}

/// `Λ = −¼ ∂Γ⁻¹ = ¼ Γ⁻¹ ∂Γ Γ⁻¹`, valid for pure output states.
pub fn pure_lambda(gamma: &RMat, dgamma: &RMat) -> Result<RMat> {
    let inv = inverse_spd(gamma)?;
    Ok(symmetrize(&(&inv * dgamma * &inv * 0.25)))
}

/// `¼ Tr[(Γ⁻¹∂Γ)²] + ∂dᵀ Γ⁻¹ ∂d`, returned as its two terms.
pub fn qfi_pure_closed_form(m: &OutputMoments) -> Result<(f64, f64)> {
    let inv = inverse_spd(&m.gamma)?;
    let a = &inv * &m.dgamma;
    let f1 = 0.25 * (&a * &a).trace();
    let f2 = m.ddisp.dot(&(&inv * &m.ddisp));
    Ok((f1, f2))
}

/// `8 ‖g‖² N̄ (N̄ + 1)`.
pub fn qfi_bound(g_specnorm: f64, nbar: f64) -> f64 {
    8.0 * g_specnorm * g_specnorm * nbar * (nbar + 1.0)
}

/// QFI with the route chosen by purity.
pub fn qfi<C: PassiveCircuit + ?Sized>(state: &GaussianState, circuit: &C, phi: f64) -> Result<QfiReport> {
    let route = if state.is_pure(&Tolerances::default()) { Route::PureClosedForm } else { Route::MixedStein };
    qfi_via(state, circuit, phi, route)
}

/// QFI through an explicitly chosen route.
pub fn qfi_via<C: PassiveCircuit + ?Sized>(
    state: &GaussianState,
    circuit: &C,
    phi: f64,
    route: Route,
) -> Result<QfiReport> {
    let m = output_moments(state, circuit, phi)?;
    let (f1, f2, lambda_residual) = match route {
        Route::PureClosedForm => {
            let (f1, f2) = qfi_pure_closed_form(&m)?;
            let lambda = pure_lambda(&m.gamma, &m.dgamma)?;
            (f1, f2, lambda_residual(&m.gamma, &m.dgamma, &lambda)?)
        }
        Route::MixedStein => {
            let (lambda, res) = solve_lambda(&m.gamma, &m.dgamma)?;
            let inv = inverse_spd(&m.gamma)?;
            ((&lambda * &m.dgamma).trace(), m.ddisp.dot(&(&inv * &m.ddisp)), res)
        }
    };
    let specnorm = circuit.spectrum(phi).specnorm;
    let nbar = state.mean_photon_number();
    let bound = qfi_bound(specnorm, nbar);
    let qfi = f1 + f2;
    Ok(QfiReport { qfi, f1, f2, bound, saturation_residual: bound - qfi, lambda_residual, route, specnorm, nbar })
}

/// The split of the pure-state QFI in terms of the input decomposition
/// `Γ = ½ R Q² Rᵀ` and the generator `g`.
///
/// `f1 = Tr[(U†gU cosh 2r)²] − Tr g² + Tr(U†gU sinh 2r Uᵀg*U* sinh 2r)` and
/// `f2 = (K d)ᵀ Γ⁻¹ (K d)` with `U` the unitary of `R`.
pub fn qfi_pure_linear(state: &GaussianState, g: &CMat, tol: &Tolerances) -> Result<(f64, f64)> {
    if g.nrows() != state.modes() {
        return Err(Error::DimensionMismatch("generator and state disagree".into()));
    }
    if !state.is_pure(tol) {
        return Err(Error::NotPure(state.max_purity_defect()));
    }
    let dec = canonical_decomposition(state.gamma())?;
    let u = dec.unitary();
    let m = state.modes();
    let diag = |f: fn(f64) -> f64| {
        CMat::from_diagonal(&nalgebra::DVector::from_iterator(
            m,
            dec.squeeze.iter().map(|r| Complex64::new(f(2.0 * r), 0.0)),
        ))
    };
    let (ch, sh) = (diag(f64::cosh), diag(f64::sinh));
    let gu = u.adjoint() * g * &u;
    let gt = u.transpose() * g.conjugate() * u.conjugate();
    let a = &gu * &ch;
    let f1 = (&a * &a).trace() - (g * g).trace() + (&gu * &sh * &gt * &sh).trace();
    let kd = generator_rotation(g) * state.disp();
    let inv = inverse_spd(state.gamma())?;
    Ok((f1.re, kd.dot(&(&inv * &kd))))
}

/// Coefficients of `L = (ẑ−d)ᵀ quad (ẑ−d) + linᵀ(ẑ−d) + scalar`.
#[derive(Debug, Clone, PartialEq)]
pub struct SldCoefficients {
    pub quad: RMat,
    pub lin: RVec,
    pub scalar: f64,
}

impl SldCoefficients {
    /// `Tr(ρ L)` from Gaussian moments.
    pub fn mean(&self, gamma: &RMat) -> f64 {
        (&self.quad * gamma).trace() + self.scalar
    }

    /// `Tr(ρ L²)` from Gaussian moments.
    pub fn second_moment(&self, gamma: &RMat) -> f64 {
        let j = symplectic_form(gamma.nrows() / 2);
        let lg = &self.quad * gamma;
        let lj = &self.quad * &j;
        let q2 = 2.0 * (&lg * &lg).trace() + 0.5 * (&lj * &lj).trace();
        let tr = lg.trace() + self.scalar;
        q2 + tr * tr + self.lin.dot(&(gamma * &self.lin))
    }
}

/// SLD coefficients for the output of `circuit` at `phi`.
pub fn sld<C: PassiveCircuit + ?Sized>(state: &GaussianState, circuit: &C, phi: f64) -> Result<SldCoefficients> {
    let m = output_moments(state, circuit, phi)?;
    let quad = if state.is_pure(&Tolerances::default()) {
        pure_lambda(&m.gamma, &m.dgamma)?
    } else {
        solve_lambda(&m.gamma, &m.dgamma)?.0
    };
    let lin = inverse_spd(&m.gamma)? * &m.ddisp;
    let scalar = -(&quad * &m.gamma).trace();
    Ok(SldCoefficients { quad, lin, scalar })
}

/// Mean and variance of `Ĝ = Σ g_mn a_m† a_n` in a Gaussian state.
pub fn generator_variance(state: &GaussianState, g: &CMat) -> Result<(f64, f64)> {
    if g.nrows() != state.modes() || g.ncols() != state.modes() {
        return Err(Error::DimensionMismatch("generator and state disagree".into()));
    }
    let res = non_hermiticity(g);
    if res > 1e-12 {
        return Err(Error::NotHermitian(res));
    }
    // Ĝ = ½ ẑᵀ H ẑ − ½ Tr g with H the real block form of g.
    let h = realify(g);
    let gam = state.gamma();
    let d = state.disp();
    let j = symplectic_form(state.modes());
    let mean = 0.5 * (&h * gam).trace() + 0.5 * d.dot(&(&h * d)) - 0.5 * g.trace().re;
    let hg = &h * gam;
    let hj = &h * &j;
    let var = 0.5 * (&hg * &hg).trace() + 0.125 * (&hj * &hj).trace() + d.dot(&(&hg * &h * d));
    Ok((mean, var.max(0.0)))
}
