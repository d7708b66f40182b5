//! `L` passes of a circuit interleaved with fixed passive controls.
//!
//! On `K ≥ M` modes the target acts as `T = U_φ ⊕ I`, and the overall
//! transformation is `𝒰 = T U_{L−1} T ⋯ U₁ T`. The generator is
//! `𝒢 = Σ_ℓ B_ℓ† (g ⊕ 0) B_ℓ` with `B_0 = I` and `B_ℓ = U_ℓ T B_{ℓ−1}`.

use num_complex::Complex64;
use serde::Serialize;

use crate::circuit::PassiveCircuit;
use crate::error::{Error, Result};
use crate::linalg::{embed, embed_zero, unitarity_residual, CMat};

pub struct SequentialCircuit<'a, C: PassiveCircuit + ?Sized> {
    base: &'a C,
    modes: usize,
    controls: Vec<CMat>,
}

impl<'a, C: PassiveCircuit + ?Sized> SequentialCircuit<'a, C> {
    /// `L = controls.len() + 1` passes on `modes` total modes.
    pub fn new(base: &'a C, modes: usize, controls: Vec<CMat>) -> Result<Self> {
        if modes < base.modes() {
            return Err(Error::DimensionMismatch(format!("{modes} modes cannot host a {}-mode circuit", base.modes())));
        }
        for (k, u) in controls.iter().enumerate() {
            if u.shape() != (modes, modes) {
                return Err(Error::DimensionMismatch(format!(
                    "control {} is {}×{}, expected {modes}×{modes}",
                    k + 1,
                    u.nrows(),
                    u.ncols()
                )));
            }
            let res = unitarity_residual(u);
            if res > 1e-10 {
                return Err(Error::NotUnitary(res));
            }
        }
        Ok(Self { base, modes, controls })
    }

    pub fn passes(&self) -> usize {
        self.controls.len() + 1
    }

    pub fn controls(&self) -> &[CMat] {
        &self.controls
    }

    fn target(&self, phi: f64) -> CMat {
        embed(&self.base.unitary(phi), self.modes)
    }
}

impl<C: PassiveCircuit + ?Sized> PassiveCircuit for SequentialCircuit<'_, C> {
    fn modes(&self) -> usize {
        self.modes
    }

    fn unitary(&self, phi: f64) -> CMat {
        let t = self.target(phi);
        let mut u = t.clone();
        for c in &self.controls {
            u = &t * c * u;
        }
        u
    }

    fn generator_matrix(&self, phi: f64) -> CMat {
        let t = self.target(phi);
        let g = embed_zero(&self.base.generator_matrix(phi), self.modes);
        let mut b = CMat::identity(self.modes, self.modes);
        let mut acc = b.adjoint() * &g * &b;
        for c in &self.controls {
            b = c * &t * b;
            acc += b.adjoint() * &g * &b;
        }
        (&acc + acc.adjoint()) * Complex64::new(0.5, 0.0)
    }
}

/// `(𝒰, 𝒢)` for `L` passes on `k` modes.
pub fn compose_sequential<C: PassiveCircuit + ?Sized>(
    circuit: &C,
    controls: &[CMat],
    passes: usize,
    k: usize,
    phi: f64,
) -> Result<(CMat, CMat)> {
    if passes == 0 || controls.len() + 1 != passes {
        return Err(Error::DimensionMismatch(format!(
            "{passes} passes need {} controls, got {}",
            passes.saturating_sub(1),
            controls.len()
        )));
    }
    let seq = SequentialCircuit::new(circuit, k, controls.to_vec())?;
    Ok((seq.unitary(phi), seq.generator_matrix(phi)))
}

/// `U_ℓ = U_φ†` for every gap, as `M×M` matrices.
pub fn optimal_controls<C: PassiveCircuit + ?Sized>(circuit: &C, phi: f64, passes: usize) -> Vec<CMat> {
    let u = circuit.unitary(phi).adjoint();
    vec![u; passes.saturating_sub(1)]
}

/// `u ⊕ I` on `k` modes.
pub fn embed_control(u: &CMat, k: usize) -> CMat {
    embed(u, k)
}

/// `8 L² ‖g‖² N̄ (N̄ + 1)`.
pub fn sequential_bound(g_specnorm: f64, passes: usize, nbar: f64) -> f64 {
    let l = passes as f64;
    8.0 * l * l * g_specnorm * g_specnorm * nbar * (nbar + 1.0)
}

/// Serializable description of a plan.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SequentialPlan {
    #[serde(rename = "L")]
    pub passes: usize,
    #[serde(rename = "K")]
    pub modes: usize,
    /// Row-major `[re, im]` pairs per control.
    pub controls: Vec<Vec<[f64; 2]>>,
    pub circuit: String,
}

impl SequentialPlan {
    pub fn new<C: PassiveCircuit + ?Sized>(seq: &SequentialCircuit<'_, C>, circuit: String) -> Self {
        let controls = seq
            .controls()
            .iter()
            .map(|u| {
                (0..u.nrows())
                    .flat_map(|i| (0..u.ncols()).map(move |j| (i, j)))
                    .map(|ij| [u[ij].re, u[ij].im])
                    .collect()
            })
            .collect();
        Self { passes: seq.passes(), modes: seq.modes(), controls, circuit }
    }
}
