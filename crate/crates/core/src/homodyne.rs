//! Homodyne readout of the optimal probe and a Monte Carlo estimation harness.
//!
//! The probe is prepared at a guess `φ′`, sent through `U_φ`, undone by
//! `(U_{φ′} V_{φ′})†`, rotated by `θ` and the `x` quadrature of mode 1 is read.
//! With `m = (V′† U′† U_φ V′)₁₁` the outcome is a zero-mean Gaussian of
//! variance `½(1 + |m|²(cosh 2r₀ − 1) + Re[e^{−2iθ} m²] sinh 2r₀)`.

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;
use serde::Serialize;

use crate::circuit::PassiveCircuit;
use crate::error::{Error, Result};
use crate::linalg::CMat;

/// Fixed part of the readout: the circuit, the guess and the settings.
pub struct HomodyneSetup<'a, C: PassiveCircuit + ?Sized> {
    circuit: &'a C,
    pub phi_guess: f64,
    pub theta: f64,
    pub r0: f64,
    undo: CMat,
    v: CMat,
}

impl<C: PassiveCircuit + ?Sized> Clone for HomodyneSetup<'_, C> {
    fn clone(&self) -> Self {
        Self { circuit: self.circuit, undo: self.undo.clone(), v: self.v.clone(), ..*self }
    }
}

/// Snapshot of the readout statistics at one true value.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct HomodyneModel {
    pub variance_theta: f64,
    pub theta: f64,
    #[serde(serialize_with = "serialize_complex")]
    pub matrix_elem: Complex64,
    pub r0: f64,
    pub fi: f64,
}

fn serialize_complex<S: serde::Serializer>(z: &Complex64, s: S) -> std::result::Result<S::Ok, S::Error> {
    use serde::ser::SerializeTuple;
    let mut t = s.serialize_tuple(2)?;
    t.serialize_element(&z.re)?;
    t.serialize_element(&z.im)?;
    t.end()
}

impl<'a, C: PassiveCircuit + ?Sized> HomodyneSetup<'a, C> {
    pub fn new(circuit: &'a C, phi_guess: f64, theta: f64, r0: f64) -> Self {
        let v = circuit.spectrum(phi_guess).v;
        let undo = v.adjoint() * circuit.unitary(phi_guess).adjoint();
        Self { circuit, phi_guess, theta, r0, undo, v }
    }

    fn first(m: &CMat) -> Complex64 {
        m[(0, 0)]
    }

    /// `(m, dm/dφ)`.
    pub fn matrix_elem(&self, phi: f64) -> (Complex64, Complex64) {
        let u = self.circuit.unitary(phi);
        let left = self.undo.rows(0, 1) * &u;
        let m = Self::first(&(&left * self.v.columns(0, 1)));
        let dg = self.circuit.generator_matrix(phi) * Complex64::new(0.0, -1.0);
        let dm = Self::first(&(left * dg * self.v.columns(0, 1)));
        (m, dm)
    }

    fn variance_from(&self, m: Complex64) -> f64 {
        let (c, s) = ((2.0 * self.r0).cosh(), (2.0 * self.r0).sinh());
        let rot = Complex64::from_polar(1.0, -2.0 * self.theta);
        0.5 * (1.0 + m.norm_sqr() * (c - 1.0) + (rot * m * m).re * s)
    }

    pub fn variance(&self, phi: f64) -> f64 {
        self.variance_from(self.matrix_elem(phi).0)
    }

    /// `d(Δx)²/dφ` from `dm/dφ`.
    pub fn dvariance(&self, phi: f64) -> f64 {
        let (m, dm) = self.matrix_elem(phi);
        let (c, s) = ((2.0 * self.r0).cosh(), (2.0 * self.r0).sinh());
        let rot = Complex64::from_polar(1.0, -2.0 * self.theta);
        (m.conj() * dm).re * (c - 1.0) + (rot * m * dm).re * s
    }

    /// `½ (∂φ ln (Δx)²)²`.
    pub fn fi(&self, phi: f64) -> f64 {
        let dv = self.dvariance(phi) / self.variance(phi);
        0.5 * dv * dv
    }

    pub fn model(&self, phi: f64) -> HomodyneModel {
        let (m, _) = self.matrix_elem(phi);
        HomodyneModel {
            variance_theta: self.variance_from(m),
            theta: self.theta,
            matrix_elem: m,
            r0: self.r0,
            fi: self.fi(phi),
        }
    }

    pub fn pdf(&self, x: f64, phi: f64) -> f64 {
        gaussian_pdf(x, self.variance(phi))
    }
}

fn gaussian_pdf(x: f64, var: f64) -> f64 {
    (-x * x / (2.0 * var)).exp() / (2.0 * std::f64::consts::PI * var).sqrt()
}

pub fn homodyne_variance<C: PassiveCircuit + ?Sized>(
    circuit: &C,
    phi: f64,
    phi_guess: f64,
    theta: f64,
    r0: f64,
) -> f64 {
    HomodyneSetup::new(circuit, phi_guess, theta, r0).variance(phi)
}

/// Homodyne FI with the guess at the true value.
pub fn homodyne_fi<C: PassiveCircuit + ?Sized>(circuit: &C, phi: f64, r0: f64, theta: f64) -> f64 {
    HomodyneSetup::new(circuit, phi, theta, r0).fi(phi)
}

/// `2ε² sinh² 2r · 4 sin²θ cos²θ / (e^{2r} cos²θ + e^{−2r} sin²θ)²`.
pub fn homodyne_fi_closed_form(eps: f64, r0: f64, theta: f64) -> f64 {
    let (s, c) = theta.sin_cos();
    let den = (2.0 * r0).exp() * c * c + (-2.0 * r0).exp() * s * s;
    2.0 * eps * eps * (2.0 * r0).sinh().powi(2) * 4.0 * s * s * c * c / (den * den)
}

/// `tan⁻¹ e^{2r₀}`.
pub fn optimal_theta(r0: f64) -> f64 {
    (2.0 * r0).exp().atan()
}

pub fn homodyne_pdf<C: PassiveCircuit + ?Sized>(
    x: f64,
    circuit: &C,
    phi: f64,
    phi_guess: f64,
    theta: f64,
    r0: f64,
) -> f64 {
    gaussian_pdf(x, homodyne_variance(circuit, phi, phi_guess, theta, r0))
}

/// Seed of replication `k` in a run seeded with `seed`.
pub fn replication_seed(seed: u64, k: u64) -> u64 {
    seed.wrapping_add(k)
}

/// `n` i.i.d. outcomes drawn from the model.
pub fn sample_homodyne(model: &HomodyneModel, n: usize, seed: u64) -> Vec<f64> {
    let normal = Normal::new(0.0, model.variance_theta.sqrt()).expect("positive variance");
    normal.sample_iter(ChaCha8Rng::seed_from_u64(seed)).take(n).collect()
}

const GOLDEN_TOL: f64 = 1e-10;
const MONOTONE_GRID: usize = 200;

/// Checks that `(Δx)²(φ)` is strictly monotone on `window`.
pub fn check_identifiable<C: PassiveCircuit + ?Sized>(setup: &HomodyneSetup<'_, C>, window: (f64, f64)) -> Result<()> {
    let (lo, hi) = window;
    if lo.is_nan() || hi.is_nan() || hi <= lo {
        return Err(Error::NonIdentifiable(format!("empty window [{lo}, {hi}]")));
    }
    let vals: Vec<f64> =
        (0..=MONOTONE_GRID).map(|k| setup.variance(lo + (hi - lo) * k as f64 / MONOTONE_GRID as f64)).collect();
    let scale = vals.iter().fold(0.0_f64, |a, v| a.max(v.abs()));
    let diffs: Vec<f64> = vals.windows(2).map(|w| w[1] - w[0]).collect();
    let floor = 1e-13 * scale;
    let up = diffs.iter().all(|d| *d > floor);
    let down = diffs.iter().all(|d| *d < -floor);
    if up || down {
        Ok(())
    } else {
        Err(Error::NonIdentifiable(format!("variance is not monotone on [{lo}, {hi}]")))
    }
}

/// Widest window around the guess, at most `max_half_width` each side, on
/// which the variance keeps the sign of its slope at the guess.
pub fn monotone_window<C: PassiveCircuit + ?Sized>(
    setup: &HomodyneSetup<'_, C>,
    max_half_width: f64,
) -> Result<(f64, f64)> {
    let phi0 = setup.phi_guess;
    let slope = setup.dvariance(phi0);
    if slope.abs() <= 1e-12 * setup.variance(phi0) {
        return Err(Error::NonIdentifiable("variance is stationary at the guess".into()));
    }
    let sign = slope.signum();
    let step = max_half_width / 2000.0;
    let edge = |dir: f64| {
        let mut x = phi0;
        while (x - phi0).abs() < max_half_width {
            let next = x + dir * step;
            if setup.dvariance(next) * sign <= 0.0 {
                break;
            }
            x = next;
        }
        x
    };
    Ok((edge(-1.0), edge(1.0)))
}

/// Maximizes `−½ ln v(φ) − S / 2v(φ)` for the second moment `S` over `window`.
pub fn mle_from_second_moment<C: PassiveCircuit + ?Sized>(
    second_moment: f64,
    setup: &HomodyneSetup<'_, C>,
    window: (f64, f64),
) -> Result<f64> {
    check_identifiable(setup, window)?;
    let loglik = |phi: f64| {
        let v = setup.variance(phi);
        -0.5 * v.ln() - second_moment / (2.0 * v)
    };
    Ok(golden_section_max(loglik, window.0, window.1, GOLDEN_TOL))
}

pub fn mle_estimate<C: PassiveCircuit + ?Sized>(
    samples: &[f64],
    setup: &HomodyneSetup<'_, C>,
    window: (f64, f64),
) -> Result<f64> {
    if samples.is_empty() {
        return Err(Error::NonIdentifiable("no samples".into()));
    }
    let s = samples.iter().map(|x| x * x).sum::<f64>() / samples.len() as f64;
    mle_from_second_moment(s, setup, window)
}

fn golden_section_max(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64, tol: f64) -> f64 {
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    while (b - a).abs() > tol {
        if fc > fd {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = f(d);
        }
    }
    0.5 * (a + b)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EstimationRun {
    pub n_samples: usize,
    pub seed: u64,
    pub phi_true: f64,
    pub estimates: Vec<f64>,
    pub mean: f64,
    pub empirical_variance: f64,
    /// Mean squared error about `phi_true`.
    pub mse: f64,
    pub fi: f64,
    /// `1 / (n F)`.
    pub crb: f64,
    pub window: (f64, f64),
}

/// Replication `k` draws its samples as `sample_homodyne` does with
/// `replication_seed(seed, k)`.
pub fn monte_carlo<C: PassiveCircuit + ?Sized>(
    setup: &HomodyneSetup<'_, C>,
    phi_true: f64,
    n_samples: usize,
    replications: usize,
    seed: u64,
    window: (f64, f64),
) -> Result<EstimationRun> {
    if n_samples == 0 || replications == 0 {
        return Err(Error::InfeasibleTarget("samples and replications must be positive".into()));
    }
    check_identifiable(setup, window)?;
    let sd = setup.variance(phi_true).sqrt();
    let normal = Normal::new(0.0, sd).map_err(|e| Error::InfeasibleTarget(e.to_string()))?;
    let estimates = (0..replications as u64)
        .into_par_iter()
        .map(|rep| {
            let mut rng = ChaCha8Rng::seed_from_u64(replication_seed(seed, rep));
            let s = (0..n_samples).map(|_| normal.sample(&mut rng).powi(2)).sum::<f64>() / n_samples as f64;
            mle_from_second_moment(s, setup, window)
        })
        .collect::<Result<Vec<f64>>>()?;
    let k = estimates.len() as f64;
    let mean = estimates.iter().sum::<f64>() / k;
    let empirical_variance =
        if estimates.len() > 1 { estimates.iter().map(|e| (e - mean).powi(2)).sum::<f64>() / (k - 1.0) } else { 0.0 };
    let mse = estimates.iter().map(|e| (e - phi_true).powi(2)).sum::<f64>() / k;
    let fi = setup.fi(phi_true);
    Ok(EstimationRun {
        n_samples,
        seed,
        phi_true,
        estimates,
        mean,
        empirical_variance,
        mse,
        fi,
        crb: 1.0 / (n_samples as f64 * fi),
        window,
    })
}
