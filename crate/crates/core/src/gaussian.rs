//! Gaussian states of `M` bosonic modes.
//!
//! A state is a covariance matrix `Γ` (vacuum `Γ = I/2`) plus a displacement
//! vector `d`, both in the `(x_1 .. x_M, y_1 .. y_M)` ordering. This module
//! also carries the symplectic decompositions used everywhere else:
//! Williamson's normal form `Γ = S Σ Sᵀ`, the Bloch-Messiah split
//! `S = R Q R'` and the pure core `Γ₀ = ½ R Q² Rᵀ` of a mixed state.

use nalgebra::Cholesky;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Exp1, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{
    self, asymmetry, hermitian_eigen, random_unitary, realify, symmetric_eigen, symmetric_fn, symplectic_form,
    to_complex, CMat, RMat, RVec,
};

/// Numerical tolerances for state validation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Tolerances {
    /// Absolute tolerance on `Γ − Γᵀ` and on symplecticity residuals.
    pub symmetry: f64,
    /// Allowed undershoot of a symplectic eigenvalue below 1/2.
    pub uncertainty: f64,
    /// A state counts as pure when every `|σ_m − 1/2|` is below this.
    pub pure: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self { symmetry: 1e-9, uncertainty: 1e-9, pure: 1e-9 }
    }
}

/// The symplectic form `J` for a fixed number of modes.
#[derive(Debug, Clone, PartialEq)]
pub struct SymplecticForm {
    pub dim: usize,
    pub matrix: RMat,
}

impl SymplecticForm {
    pub fn new(dim: usize) -> Self {
        Self { dim, matrix: symplectic_form(dim) }
    }

    /// `‖SᵀJS − J‖_max`.
    pub fn residual(&self, s: &RMat) -> f64 {
        (s.transpose() * &self.matrix * s - &self.matrix).amax()
    }
}

/// The quadrature-to-mode basis change `W`.
#[derive(Debug, Clone, PartialEq)]
pub struct BasisChange {
    pub w: CMat,
}

impl BasisChange {
    pub fn new(dim: usize) -> Self {
        Self { w: linalg::basis_change(dim) }
    }

    /// `W† diag(U, U*) W`, real and orthogonal for unitary `U`.
    pub fn lift(&self, u: &CMat) -> CMat {
        debug_assert_eq!(2 * u.nrows(), self.w.nrows());
        self.w.adjoint() * block_diag(u, &u.conjugate()) * &self.w
    }
}

fn block_diag(a: &CMat, b: &CMat) -> CMat {
    let (m, n) = (a.nrows(), b.nrows());
    let mut out = CMat::zeros(m + n, m + n);
    out.view_mut((0, 0), (m, m)).copy_from(a);
    out.view_mut((m, m), (n, n)).copy_from(b);
    out
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "StateJson", into = "StateJson")]
pub struct GaussianState {
    modes: usize,
    gamma: RMat,
    disp: RVec,
    sigma: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
struct StateJson {
    modes: usize,
    gamma: Vec<f64>,
    disp: Vec<f64>,
}

impl TryFrom<StateJson> for GaussianState {
    type Error = Error;

    fn try_from(j: StateJson) -> Result<Self> {
        let n = 2 * j.modes;
        if j.gamma.len() != n * n || j.disp.len() != n {
            return Err(Error::DimensionMismatch(format!(
                "modes {} requires {} covariance entries and {} displacement entries",
                j.modes,
                n * n,
                n
            )));
        }
        GaussianState::new(RMat::from_row_slice(n, n, &j.gamma), RVec::from_vec(j.disp))
    }
}

impl From<GaussianState> for StateJson {
    fn from(s: GaussianState) -> Self {
        let n = 2 * s.modes;
        let gamma = (0..n).flat_map(|i| (0..n).map(move |j| (i, j))).map(|ij| s.gamma[ij]).collect();
        StateJson { modes: s.modes, gamma, disp: s.disp.iter().copied().collect() }
    }
}

impl GaussianState {
    /// Validates `Γ` and `d` with the default tolerances.
    pub fn new(gamma: RMat, disp: RVec) -> Result<Self> {
        Self::with_tolerances(gamma, disp, &Tolerances::default())
    }

    pub fn with_tolerances(gamma: RMat, disp: RVec, tol: &Tolerances) -> Result<Self> {
        let n = gamma.nrows();
        if n == 0 || !n.is_multiple_of(2) || gamma.ncols() != n {
            return Err(Error::DimensionMismatch(format!(
                "covariance must be 2M×2M, got {}×{}",
                gamma.nrows(),
                gamma.ncols()
            )));
        }
        if disp.len() != n {
            return Err(Error::DimensionMismatch(format!("displacement has length {}, expected {}", disp.len(), n)));
        }
        if gamma.iter().chain(disp.iter()).any(|x| !x.is_finite()) {
            return Err(Error::NotPositiveDefinite("non-finite entry".into()));
        }
        let asym = asymmetry(&gamma);
        if asym > tol.symmetry {
            return Err(Error::NotPositiveDefinite(format!("asymmetry {asym:e}")));
        }
        let gamma = linalg::symmetrize(&gamma);
        let sigma = symplectic_spectrum(&gamma)?;
        if let Some(&low) = sigma.last() {
            if low < 0.5 - tol.uncertainty {
                return Err(Error::UncertaintyViolated { sigma: low });
            }
        }
        Ok(Self { modes: n / 2, gamma, disp, sigma })
    }

    pub fn vacuum(modes: usize) -> Self {
        let n = 2 * modes;
        Self { modes, gamma: RMat::identity(n, n) * 0.5, disp: RVec::zeros(n), sigma: vec![0.5; modes] }
    }

    /// Thermal state with every symplectic eigenvalue equal to `sigma`.
    pub fn thermal(modes: usize, sigma: f64) -> Result<Self> {
        let n = 2 * modes;
        Self::new(RMat::identity(n, n) * sigma, RVec::zeros(n))
    }

    /// Coherent state with real amplitude `alpha` in mode 1, vacuum elsewhere.
    pub fn coherent(modes: usize, alpha: f64) -> Self {
        let mut s = Self::vacuum(modes);
        s.disp[0] = std::f64::consts::SQRT_2 * alpha;
        s
    }

    /// Squeezed vacuum `diag(e^{2r}, e^{-2r})/2` on mode 1, vacuum elsewhere.
    pub fn squeezed_vacuum(modes: usize, r: f64) -> Self {
        let mut s = Self::vacuum(modes);
        s.gamma[(0, 0)] = 0.5 * (2.0 * r).exp();
        s.gamma[(modes, modes)] = 0.5 * (-2.0 * r).exp();
        s
    }

    pub fn modes(&self) -> usize {
        self.modes
    }

    pub fn gamma(&self) -> &RMat {
        &self.gamma
    }

    pub fn disp(&self) -> &RVec {
        &self.disp
    }

    /// Symplectic eigenvalues, descending.
    pub fn symplectic_eigenvalues(&self) -> &[f64] {
        &self.sigma
    }

    /// `½ Tr(Γ − I/2) + ½ d²`.
    pub fn mean_photon_number(&self) -> f64 {
        0.5 * (self.gamma.trace() - 0.5 * (2 * self.modes) as f64) + 0.5 * self.disp.norm_squared()
    }

    /// `Π 1/(2σ_m)`.
    pub fn purity(&self) -> f64 {
        self.sigma.iter().map(|s| 1.0 / (2.0 * s)).product()
    }

    /// `1/√det(2Γ)`, the determinant form of [`Self::purity`].
    pub fn purity_from_determinant(&self) -> f64 {
        1.0 / (&self.gamma * 2.0).determinant().sqrt()
    }

    pub fn max_purity_defect(&self) -> f64 {
        self.sigma.iter().fold(0.0_f64, |acc, s| acc.max((s - 0.5).abs()))
    }

    pub fn is_pure(&self, tol: &Tolerances) -> bool {
        self.max_purity_defect() < tol.pure
    }

    /// `χ(η) = exp(−½ ηᵀΓη + i η·d)`.
    pub fn characteristic_function(&self, eta: &RVec) -> Complex64 {
        characteristic(&self.gamma, &self.disp, eta)
    }

    /// Applies a passive rotation: `Γ' = R Γ Rᵀ`, `d' = R d`.
    pub fn apply_rotation(&self, r: &RMat) -> Result<Self> {
        let n = 2 * self.modes;
        if r.nrows() != n || r.ncols() != n {
            return Err(Error::DimensionMismatch(format!(
                "rotation is {}×{}, state needs {n}×{n}",
                r.nrows(),
                r.ncols()
            )));
        }
        let orth = (r.transpose() * r - RMat::identity(n, n)).amax();
        let sympl = SymplecticForm::new(self.modes).residual(r);
        let res = orth.max(sympl);
        if res > 1e-9 {
            return Err(Error::NotSymplecticOrthogonal(res));
        }
        Self::new(r * &self.gamma * r.transpose(), r * &self.disp)
    }

    /// `self ⊕ vacuum(extra)`.
    pub fn with_vacuum_modes(&self, extra: usize) -> Self {
        let (m, k) = (self.modes, self.modes + extra);
        let mut gamma = RMat::identity(2 * k, 2 * k) * 0.5;
        let mut disp = RVec::zeros(2 * k);
        for (bi, bj) in [(0, 0), (0, 1), (1, 0), (1, 1)] {
            gamma.view_mut((bi * k, bj * k), (m, m)).copy_from(&self.gamma.view((bi * m, bj * m), (m, m)));
        }
        disp.rows_mut(0, m).copy_from(&self.disp.rows(0, m));
        disp.rows_mut(k, m).copy_from(&self.disp.rows(m, m));
        let mut sigma = self.sigma.clone();
        sigma.extend(std::iter::repeat_n(0.5, extra));
        sigma.sort_by(|a, b| b.total_cmp(a));
        Self { modes: k, gamma, disp, sigma }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("state serializes")
    }

    pub fn from_json(text: &str) -> std::result::Result<Self, serde_json::Error> {
        serde_json::from_str(text)
    }
}

pub(crate) fn characteristic(gamma: &RMat, disp: &RVec, eta: &RVec) -> Complex64 {
    let quad = -0.5 * eta.dot(&(gamma * eta));
    Complex64::new(quad, eta.dot(disp)).exp()
}

/// Positive eigen-pairs of the Hermitian matrix `i Γ^{1/2} J Γ^{1/2}`.
fn positive_spectrum(gamma: &RMat) -> Result<(RMat, Vec<f64>, CMat)> {
    let n = gamma.nrows();
    let m = n / 2;
    let (vals, _) = symmetric_eigen(gamma);
    if vals[0] <= 0.0 {
        return Err(Error::NotPositiveDefinite(format!("min eigenvalue {:e}", vals[0])));
    }
    let root = symmetric_fn(gamma, f64::sqrt);
    let a = &root * symplectic_form(m) * &root;
    let h = to_complex(&a) * linalg::I;
    let (evals, evecs) = hermitian_eigen(&h);
    let pos: Vec<f64> = evals[m..].to_vec();
    if pos[0] <= 0.0 {
        return Err(Error::DecompositionFailed("symplectic spectrum is not paired".into()));
    }
    Ok((root, pos, evecs.columns(m, m).into_owned()))
}

fn symplectic_spectrum(gamma: &RMat) -> Result<Vec<f64>> {
    let (_, mut sigma, _) = positive_spectrum(gamma)?;
    sigma.reverse();
    Ok(sigma)
}

/// Williamson normal form `Γ = S Σ Sᵀ` with `S` symplectic.
#[derive(Debug, Clone)]
pub struct Williamson {
    pub s: RMat,
    /// Symplectic eigenvalues, descending.
    pub sigma: Vec<f64>,
}

impl Williamson {
    pub fn sigma_matrix(&self) -> RMat {
        let m = self.sigma.len();
        RMat::from_fn(2 * m, 2 * m, |i, j| if i == j { self.sigma[i % m] } else { 0.0 })
    }

    pub fn reconstruct(&self) -> RMat {
        &self.s * self.sigma_matrix() * self.s.transpose()
    }
}

pub fn williamson(gamma: &RMat) -> Result<Williamson> {
    let n = gamma.nrows();
    if n == 0 || !n.is_multiple_of(2) || gamma.ncols() != n {
        return Err(Error::DimensionMismatch(format!("covariance is {}×{}", n, gamma.ncols())));
    }
    let m = n / 2;
    let gamma = linalg::symmetrize(gamma);
    let (root, pos, vecs) = positive_spectrum(&gamma)?;
    // An eigenvector v of iA with eigenvalue +σ gives A(√2 Im v) = −σ √2 Re v.
    let mut o = RMat::zeros(n, n);
    let mut sigma = vec![0.0; m];
    for (slot, k) in (0..m).rev().enumerate() {
        let v = vecs.column(k);
        for i in 0..n {
            o[(i, slot)] = std::f64::consts::SQRT_2 * v[i].im;
            o[(i, m + slot)] = std::f64::consts::SQRT_2 * v[i].re;
        }
        sigma[slot] = pos[k];
    }
    let scale = RMat::from_fn(n, n, |i, j| if i == j { 1.0 / sigma[i % m].sqrt() } else { 0.0 });
    let s = root * o * scale;
    let res = SymplecticForm::new(m).residual(&s);
    if !res.is_finite() || res > 1e-8 * s.amax().max(1.0).powi(2) {
        return Err(Error::DecompositionFailed(format!("symplectic residual {res:e}")));
    }
    Ok(Williamson { s, sigma })
}

/// Bloch-Messiah split `S = R Q R'` of a symplectic matrix.
#[derive(Debug, Clone)]
pub struct BlochMessiah {
    pub r: RMat,
    /// Squeezing parameters, descending and non-negative.
    pub squeeze: Vec<f64>,
    pub r_prime: RMat,
}

impl BlochMessiah {
    /// `Q = diag(e^{r}, e^{−r})`.
    pub fn q(&self) -> RMat {
        squeeze_matrix(&self.squeeze, 1.0)
    }

    pub fn reconstruct(&self) -> RMat {
        &self.r * self.q() * &self.r_prime
    }
}

/// `diag(e^{k r}, e^{−k r})`.
pub fn squeeze_matrix(r: &[f64], k: f64) -> RMat {
    let m = r.len();
    RMat::from_fn(2 * m, 2 * m, |i, j| {
        if i != j {
            0.0
        } else if i < m {
            (k * r[i]).exp()
        } else {
            (-k * r[i - m]).exp()
        }
    })
}

pub fn bloch_messiah(s: &RMat) -> Result<BlochMessiah> {
    let n = s.nrows();
    if n == 0 || !n.is_multiple_of(2) || s.ncols() != n {
        return Err(Error::DimensionMismatch(format!("matrix is {}×{}", n, s.ncols())));
    }
    let m = n / 2;
    let j = symplectic_form(m);
    let res = (s.transpose() * &j * s - &j).amax();
    if !res.is_finite() || res > 1e-9 * s.amax().max(1.0).powi(2) {
        return Err(Error::NotSymplectic(res));
    }
    // Polar factor P = (S Sᵀ)^{1/2} is symmetric symplectic; J maps its λ-eigenspace to 1/λ.
    let (mu, vecs) = symmetric_eigen(&(s * s.transpose()));
    let lambda: Vec<f64> = mu.iter().map(|x| x.max(0.0).sqrt()).collect();
    let p = &vecs * RMat::from_diagonal(&RVec::from_vec(lambda.clone())) * vecs.transpose();
    let p_inv = &vecs * RMat::from_diagonal(&RVec::from_iterator(n, lambda.iter().map(|l| 1.0 / l))) * vecs.transpose();

    let mut used = vec![false; n];
    let mut xs: Vec<RVec> = Vec::with_capacity(m);
    let mut ys: Vec<RVec> = Vec::with_capacity(m);
    for _ in 0..m {
        let residuals: Vec<Option<(RVec, f64)>> = (0..n)
            .rev()
            .map(|k| {
                if used[k] {
                    return None;
                }
                let mut v = vecs.column(k).into_owned();
                for b in xs.iter().chain(ys.iter()) {
                    let c = b.dot(&v);
                    v -= b * c;
                }
                let nrm = v.norm();
                Some((v, nrm))
            })
            .collect();
        let best = residuals.iter().flatten().map(|(_, nrm)| *nrm).fold(0.0_f64, f64::max);
        if best < 1e-6 {
            return Err(Error::DecompositionFailed("no symplectic partner left".into()));
        }
        let (idx, (v, nrm)) = residuals
            .into_iter()
            .enumerate()
            .find_map(|(i, r)| r.filter(|(_, nrm)| *nrm >= 0.5 * best).map(|r| (i, r)))
            .expect("a candidate exceeds half the best residual");
        used[n - 1 - idx] = true;
        let x = v / nrm;
        let y = -(&j * &x);
        xs.push(x);
        ys.push(y);
    }

    let mut pairs: Vec<(f64, RVec, RVec)> = xs
        .into_iter()
        .zip(ys)
        .map(|(x, y)| {
            let r = x.dot(&(&p * &x)).ln();
            if r < 0.0 {
                (-r, y.clone(), -x)
            } else {
                (r, x, y)
            }
        })
        .collect();
    pairs.sort_by(|a, b| b.0.total_cmp(&a.0));

    let mut r = RMat::zeros(n, n);
    for (k, (_, x, y)) in pairs.iter().enumerate() {
        r.set_column(k, x);
        r.set_column(m + k, y);
    }
    let squeeze = pairs.iter().map(|p| p.0.max(0.0)).collect();
    let r_prime = r.transpose() * p_inv * s;
    Ok(BlochMessiah { r, squeeze, r_prime })
}

/// Full canonical decomposition `Γ = R Q R' Σ R'ᵀ Q Rᵀ`.
#[derive(Debug, Clone)]
pub struct CanonicalDecomposition {
    pub r: RMat,
    pub squeeze: Vec<f64>,
    pub r_prime: RMat,
    pub sigma: Vec<f64>,
}

impl CanonicalDecomposition {
    pub fn q(&self) -> RMat {
        squeeze_matrix(&self.squeeze, 1.0)
    }

    pub fn sigma_matrix(&self) -> RMat {
        let m = self.sigma.len();
        RMat::from_fn(2 * m, 2 * m, |i, j| if i == j { self.sigma[i % m] } else { 0.0 })
    }

    pub fn reconstruct(&self) -> RMat {
        let q = self.q();
        &self.r * &q * &self.r_prime * self.sigma_matrix() * self.r_prime.transpose() * &q * self.r.transpose()
    }

    /// The unitary `U` whose lift is `R`.
    pub fn unitary(&self) -> CMat {
        linalg::unlift(&self.r)
    }
}

pub fn canonical_decomposition(gamma: &RMat) -> Result<CanonicalDecomposition> {
    let w = williamson(gamma)?;
    let bm = bloch_messiah(&w.s)?;
    Ok(CanonicalDecomposition { r: bm.r, squeeze: bm.squeeze, r_prime: bm.r_prime, sigma: w.sigma })
}

/// `Γ₀ = ½ R Q² Rᵀ`: every symplectic eigenvalue of `Γ` replaced by 1/2.
pub fn pure_core(gamma: &RMat) -> Result<RMat> {
    let c = canonical_decomposition(gamma)?;
    let q2 = squeeze_matrix(&c.squeeze, 2.0);
    Ok(linalg::symmetrize(&(&c.r * q2 * c.r.transpose() * 0.5)))
}

/// Gaussian density `P_Γ(ξ)` with covariance `Γ − Γ₀`.
pub fn convex_weight(gamma: &RMat, gamma0: &RMat, xi: &RVec) -> Result<f64> {
    let n = gamma.nrows();
    if gamma0.nrows() != n || xi.len() != n {
        return Err(Error::DimensionMismatch("weight arguments disagree in size".into()));
    }
    let diff = linalg::symmetrize(&(gamma - gamma0));
    let (vals, _) = symmetric_eigen(&diff);
    let scale = gamma.amax().max(1.0);
    if vals[0] <= 1e-10 * scale {
        return Err(Error::SingularMixture);
    }
    let chol = Cholesky::new(diff.clone()).ok_or(Error::SingularMixture)?;
    let sol = chol.solve(xi);
    let det = diff.determinant();
    let norm = ((2.0 * std::f64::consts::PI).powi(n as i32) * det).sqrt();
    Ok((-0.5 * xi.dot(&sol)).exp() / norm)
}

/// `∫ P_Γ(ξ) χ_{Γ₀, d−ξ}(η) dξ` in closed form (Gaussian moment generating function).
pub fn mixture_characteristic(state: &GaussianState, gamma0: &RMat, eta: &RVec) -> Complex64 {
    let pure_part = characteristic(gamma0, state.disp(), eta);
    let spread = state.gamma() - gamma0;
    pure_part * (-0.5 * eta.dot(&(&spread * eta))).exp()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PurityClass {
    Pure,
    Mixed,
}

/// Seeded random state with mean photon number `nbar`.
///
/// The photon budget is split between squeezing, thermal noise (mixed only)
/// and displacement by an exponential-draw Dirichlet weight; the state is
/// `Γ = R Σ Q² Rᵀ` with `R` the lift of a Haar unitary.
pub fn random_state(modes: usize, nbar: f64, class: PurityClass, seed: u64) -> Result<GaussianState> {
    if modes == 0 {
        return Err(Error::DimensionMismatch("at least one mode is required".into()));
    }
    if !nbar.is_finite() || nbar < 0.0 {
        return Err(Error::InfeasibleTarget(format!("nbar must be finite and ≥ 0, got {nbar}")));
    }
    if nbar == 0.0 {
        return match class {
            PurityClass::Pure => Ok(GaussianState::vacuum(modes)),
            PurityClass::Mixed => Err(Error::InfeasibleTarget("a mixed state needs a positive photon number".into())),
        };
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = 2 * modes;
    let u = random_unitary(modes, &mut rng);
    let rot = realify(&u);

    let channels = match class {
        PurityClass::Pure => 2,
        PurityClass::Mixed => 3,
    };
    let w: Vec<f64> = (0..channels).map(|_| rng.sample::<f64, _>(Exp1) + 1e-3).collect();
    let total: f64 = w.iter().sum();
    let n_squeeze = nbar * w[0] / total;
    let n_disp = nbar * w[1] / total;
    let n_thermal = if class == PurityClass::Mixed { nbar * w[2] / total } else { 0.0 };

    let mut sigma = vec![0.5; modes];
    if n_thermal > 0.0 {
        let tw: Vec<f64> = (0..modes).map(|_| rng.sample::<f64, _>(Exp1) + 1e-3).collect();
        let tsum: f64 = tw.iter().sum();
        for (s, t) in sigma.iter_mut().zip(&tw) {
            *s += n_thermal * t / tsum;
        }
    }

    // Σ σ_m (cosh 2 s r̂_m − 1) = n_squeeze, monotone in s ≥ 0.
    let dir: Vec<f64> = (0..modes).map(|_| rng.random::<f64>() + 0.05).collect();
    let excess =
        |s: f64| -> f64 { sigma.iter().zip(&dir).map(|(sg, d)| sg * ((2.0 * s * d).cosh() - 1.0)).sum::<f64>() };
    let mut hi = 1.0;
    while excess(hi) < n_squeeze {
        hi *= 2.0;
    }
    let mut lo = 0.0;
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if excess(mid) < n_squeeze {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= f64::EPSILON * hi {
            break;
        }
    }
    let s = 0.5 * (lo + hi);
    let squeeze: Vec<f64> = dir.iter().map(|d| s * d).collect();

    let core = RMat::from_fn(n, n, |i, j| {
        if i != j {
            0.0
        } else if i < modes {
            sigma[i] * (2.0 * squeeze[i]).exp()
        } else {
            sigma[i - modes] * (-2.0 * squeeze[i - modes]).exp()
        }
    });
    let gamma = linalg::symmetrize(&(&rot * core * rot.transpose()));

    let raw = RVec::from_fn(n, |_, _| rng.sample::<f64, _>(StandardNormal));
    let disp = raw.normalize() * (2.0 * n_disp).sqrt();
    GaussianState::new(gamma, disp)
}
