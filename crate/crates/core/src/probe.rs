//! The optimal Gaussian probe and the mixed-state bound chain.

use serde::Serialize;

use crate::circuit::{diagonalizer_lift, PassiveCircuit};
use crate::error::{Error, Result};
use crate::gaussian::{pure_core, squeeze_matrix, GaussianState};
use crate::linalg::{symmetrize, CMat, RVec};
use crate::qfi::{qfi, qfi_bound};

/// `r₀ = ln(√N̄ + √(N̄+1))`, so that `sinh² r₀ = N̄`.
pub fn squeeze_param(nbar: f64) -> Result<f64> {
    if !nbar.is_finite() || nbar < 0.0 {
        return Err(Error::InfeasibleTarget(format!("nbar must be finite and ≥ 0, got {nbar}")));
    }
    Ok(nbar.sqrt().asinh())
}

#[derive(Debug, Clone)]
pub struct OptimalProbeSpec {
    pub r0: f64,
    /// Diagonalizer of the generator at the guess.
    pub v: CMat,
    pub state: GaussianState,
}

/// Squeezed vacuum in mode 1 rotated by the lift of `V_{φ′}`.
pub fn optimal_state<C: PassiveCircuit + ?Sized>(circuit: &C, phi_guess: f64, nbar: f64) -> Result<OptimalProbeSpec> {
    let r0 = squeeze_param(nbar)?;
    let m = circuit.modes();
    let v = circuit.spectrum(phi_guess).v;
    let p = diagonalizer_lift(&v)?;
    let mut r = vec![0.0; m];
    r[0] = r0;
    let gamma = symmetrize(&(&p * squeeze_matrix(&r, 2.0) * p.transpose() * 0.5));
    let state = GaussianState::new(gamma, RVec::zeros(2 * m))?;
    Ok(OptimalProbeSpec { r0, v, state })
}

/// `bound − qfi` for the probe built at the true value.
pub fn saturation_check<C: PassiveCircuit + ?Sized>(circuit: &C, phi: f64, nbar: f64) -> Result<f64> {
    let probe = optimal_state(circuit, phi, nbar)?;
    let report = qfi(&probe.state, circuit, phi)?;
    Ok(qfi_bound(report.specnorm, nbar) - report.qfi)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AuditReport {
    pub qfi: f64,
    /// `8‖g‖²(N̄(N̄+1) − ¼[Tr(Γ−Γ₀) + d²]²)`.
    pub intermediate: f64,
    /// `8‖g‖² N̄(N̄+1)`.
    pub bound: f64,
    pub nbar: f64,
    pub mixture_trace: f64,
    pub disp_sq: f64,
    pub specnorm: f64,
    pub chain_holds: bool,
}

/// Relative slack allowed at each step of the chain.
pub const AUDIT_SLACK: f64 = 1e-8;

pub fn mixed_bound_audit<C: PassiveCircuit + ?Sized>(
    state: &GaussianState,
    circuit: &C,
    phi: f64,
) -> Result<AuditReport> {
    let report = qfi(state, circuit, phi)?;
    let g0 = pure_core(state.gamma())?;
    let mixture_trace = (state.gamma() - g0).trace();
    let disp_sq = state.disp().norm_squared();
    let nbar = state.mean_photon_number();
    let s2 = report.specnorm * report.specnorm;
    let excess = mixture_trace + disp_sq;
    let intermediate = 8.0 * s2 * (nbar * (nbar + 1.0) - 0.25 * excess * excess);
    let bound = qfi_bound(report.specnorm, nbar);
    let slack = AUDIT_SLACK * bound.max(f64::MIN_POSITIVE);
    let chain_holds = report.qfi <= intermediate + slack && intermediate <= bound + slack;
    Ok(AuditReport {
        qfi: report.qfi,
        intermediate,
        bound,
        nbar,
        mixture_trace,
        disp_sq,
        specnorm: report.specnorm,
        chain_holds,
    })
}
