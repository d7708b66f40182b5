//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any criterion fails.

use std::time::{Duration, Instant};

use nalgebra::{Cholesky, DMatrix, DVector};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use gaussmet::circuit::{parse_circuit, ParamCircuit, PassiveCircuit};
use gaussmet::corpus;
use gaussmet::gaussian::{convex_weight, pure_core, random_state, GaussianState, PurityClass};
use gaussmet::homodyne::{monotone_window, monte_carlo, optimal_theta, HomodyneSetup};
use gaussmet::lemmas::{random_psd, verify_matrix_lemmas};
use gaussmet::linalg::{embed_zero, random_hermitian, random_unitary, realify, symmetric_eigen, CMat, RMat, RVec};
use gaussmet::probe::{optimal_state, squeeze_param};
use gaussmet::qfi::{generator_variance, output_moments, qfi, qfi_bound, qfi_via, solve_lambda, Route};
use gaussmet::sequential::{embed_control, optimal_controls, sequential_bound, SequentialCircuit};

struct Outcome {
    pass: bool,
    detail: String,
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(f64::MIN_POSITIVE)
}

fn corpus_all() -> Vec<(&'static str, ParamCircuit)> {
    corpus::ALL.iter().map(|(n, s)| (*n, parse_circuit(s).unwrap())).collect()
}

fn corpus_table() -> Vec<(&'static str, ParamCircuit)> {
    corpus::TABLE.iter().map(|(n, s)| (*n, parse_circuit(s).unwrap())).collect()
}

fn slope(xs: &[f64], ys: &[f64]) -> f64 {
    let lx: Vec<f64> = xs.iter().map(|x| x.ln()).collect();
    let ly: Vec<f64> = ys.iter().map(|y| y.ln()).collect();
    let n = lx.len() as f64;
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxy: f64 = lx.iter().zip(&ly).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = lx.iter().map(|x| (x - mx).powi(2)).sum();
    sxy / sxx
}

const PHI: f64 = 0.3;

fn table1() -> Outcome {
    let start = Instant::now();
    let coefs = [8.0, 2.0, 8.0, 16.0];
    let mut worst = 0.0_f64;
    for ((_, c), k) in corpus_table().iter().zip(coefs) {
        for nbar in [0.5, 1.0, 2.0, 5.0] {
            let probe = optimal_state(c, PHI, nbar).unwrap().state;
            let q = qfi(&probe, c, PHI).unwrap().qfi;
            worst = worst.max(rel(q, k * nbar * (nbar + 1.0)));
        }
    }
    let t = start.elapsed();
    Outcome {
        pass: worst < 1e-8 && t < Duration::from_secs(1),
        detail: format!("max rel err {worst:.2e}, {:.3} s", t.as_secs_f64()),
    }
}

struct AuditCase {
    circuit: usize,
    state: GaussianState,
    phi: f64,
}

fn audit_cases() -> Vec<AuditCase> {
    let circuits = corpus_all();
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    (0..1000u64)
        .map(|seed| {
            let ci = seed as usize % circuits.len();
            let class = if seed % 2 == 0 { PurityClass::Pure } else { PurityClass::Mixed };
            let nbar = rng.random_range(0.1..=5.0);
            let phi = rng.random_range(-std::f64::consts::PI..std::f64::consts::PI);
            let state = random_state(circuits[ci].1.modes(), nbar, class, seed).unwrap();
            AuditCase { circuit: ci, state, phi }
        })
        .collect()
}

fn bound_audit(cases: &[AuditCase]) -> Outcome {
    let start = Instant::now();
    let circuits = corpus_all();
    let mut violations = 0;
    let mut modes_seen = [false; 4];
    let mut max_ratio = 0.0_f64;
    for case in cases {
        let c = &circuits[case.circuit].1;
        let r = qfi(&case.state, c, case.phi).unwrap();
        let bound = qfi_bound(r.specnorm, case.state.mean_photon_number());
        modes_seen[c.modes()] = true;
        max_ratio = max_ratio.max(r.qfi / bound);
        if r.qfi > bound * (1.0 + 1e-8) {
            violations += 1;
        }
    }
    let t = start.elapsed();
    Outcome {
        pass: violations == 0 && modes_seen[1..].iter().all(|s| *s) && t < Duration::from_secs(30),
        detail: format!(
            "{} states, {violations} violations, max qfi/bound {max_ratio:.6}, {:.2} s",
            cases.len(),
            t.as_secs_f64()
        ),
    }
}

fn lambda_consistency(cases: &[AuditCase]) -> Outcome {
    let circuits = corpus_all();
    let mut worst_res = 0.0_f64;
    let mut worst_qfi = 0.0_f64;
    let mut worst_lambda = 0.0_f64;
    let (mut mixed, mut pure) = (0, 0);
    for case in cases {
        let c = &circuits[case.circuit].1;
        let m = output_moments(&case.state, c, case.phi).unwrap();
        let (lambda, res) = solve_lambda(&m.gamma, &m.dgamma).unwrap();
        if case.state.max_purity_defect() > 1e-6 {
            mixed += 1;
            worst_res = worst_res.max(res);
            continue;
        }
        pure += 1;
        let ls = qfi_via(&case.state, c, case.phi, Route::MixedStein).unwrap().qfi;
        let cf = qfi_via(&case.state, c, case.phi, Route::PureClosedForm).unwrap().qfi;
        if cf > 1e-12 {
            worst_qfi = worst_qfi.max(rel(ls, cf));
        }
        let inv = m.gamma.clone().try_inverse().unwrap();
        let expect = &inv * &m.dgamma * &inv * 0.25;
        let scale = expect.amax().max(1.0);
        let dev = (&lambda - &expect).amax() / scale;
        worst_lambda = worst_lambda.max(dev);
    }
    Outcome {
        pass: worst_res < 1e-9 && worst_qfi < 1e-7 && worst_lambda < 1e-8 && mixed > 0 && pure > 0,
        detail: format!(
            "{mixed} mixed: max residual {worst_res:.2e}; {pure} pure: qfi rel {worst_qfi:.2e}, Λ rel {worst_lambda:.2e}"
        ),
    }
}

/// `ln Tr(ρ₁ρ₂)` for two Gaussian states.
fn ln_overlap(g1: &RMat, d1: &RVec, g2: &RMat, d2: &RVec) -> f64 {
    let sum = g1 + g2;
    let chol = Cholesky::new(sum).unwrap();
    let ln_det: f64 = chol.l().diagonal().iter().map(|x| 2.0 * x.ln()).sum();
    let delta = d1 - d2;
    -0.5 * ln_det - 0.5 * delta.dot(&chol.solve(&delta))
}

/// `8 (1 − |⟨ψ_φ|ψ_{φ+h}⟩|) / h²`, symmetrized in `h` and Richardson-extrapolated.
fn fidelity_qfi(state: &GaussianState, c: &ParamCircuit, phi: f64, h: f64) -> f64 {
    let out = |p: f64| {
        let r = realify(&c.unitary(p));
        (&r * state.gamma() * r.transpose(), &r * state.disp())
    };
    let (g0, d0) = out(phi);
    let f = |h: f64| {
        let one = |p: f64| {
            let (g, d) = out(p);
            let infidelity = -(0.5 * ln_overlap(&g0, &d0, &g, &d)).exp_m1();
            8.0 * infidelity / (h * h)
        };
        0.5 * (one(phi + h) + one(phi - h))
    };
    (4.0 * f(h / 2.0) - f(h)) / 3.0
}

fn oracles() -> Outcome {
    let circuits = corpus_all();
    let mut rng = ChaCha8Rng::seed_from_u64(77);
    let (mut worst_var, mut worst_fid) = (0.0_f64, 0.0_f64);
    for k in 0..100u64 {
        let (_, c) = &circuits[k as usize % circuits.len()];
        let nbar = rng.random_range(0.1..=5.0);
        let phi = rng.random_range(-1.5..1.5);
        let state = random_state(c.modes(), nbar, PurityClass::Pure, 5000 + k).unwrap();
        let q = qfi(&state, c, phi).unwrap().qfi;
        let (_, var) = generator_variance(&state, &c.generator_matrix(phi)).unwrap();
        let fid = fidelity_qfi(&state, c, phi, 1e-3);
        let scale = q.max(1e-12);
        worst_var = worst_var.max((q - 4.0 * var).abs() / scale);
        worst_fid = worst_fid.max((q - fid).abs() / scale);
    }
    Outcome {
        pass: worst_var < 1e-8 && worst_fid < 1e-4,
        detail: format!("100 probes: 4Var rel {worst_var:.2e}, fidelity rel {worst_fid:.2e}"),
    }
}

fn homodyne_optimality() -> Outcome {
    let mut worst_opt = 0.0_f64;
    let mut excess = 0.0_f64;
    for (_, c) in corpus_all() {
        for nbar in [0.5, 1.0, 2.0, 5.0] {
            let r0 = squeeze_param(nbar).unwrap();
            let bound = qfi_bound(c.spectrum(PHI).specnorm, nbar);
            let at_opt = HomodyneSetup::new(&c, PHI, optimal_theta(r0), r0).fi(PHI);
            worst_opt = worst_opt.max(rel(at_opt, bound));
            for k in 0..1000 {
                let theta = std::f64::consts::PI * k as f64 / 1000.0;
                let fi = HomodyneSetup::new(&c, PHI, theta, r0).fi(PHI);
                excess = excess.max((fi - bound) / bound);
            }
        }
    }
    Outcome {
        pass: worst_opt < 1e-10 && excess <= 1e-10,
        detail: format!("FI(θ*) rel {worst_opt:.2e}, max (FI(θ)−QFI)/QFI {excess:.2e}"),
    }
}

fn monte_carlo_crb() -> Outcome {
    let start = Instant::now();
    let c = corpus::mz1();
    let nbar = 1.0;
    let r0 = squeeze_param(nbar).unwrap();
    let setup = HomodyneSetup::new(&c, PHI, optimal_theta(r0), r0);
    let window = monotone_window(&setup, 0.5).unwrap();
    let seed = 20_240_601;
    let mut mses = Vec::new();
    let ns = [100usize, 1000, 10_000];
    let mut variance_ratio = f64::NAN;
    for &n in &ns {
        let run = monte_carlo(&setup, PHI, n, 200, seed, window).unwrap();
        mses.push(run.mse);
        if n == 10_000 {
            variance_ratio = run.empirical_variance / run.crb;
        }
    }
    let xs: Vec<f64> = ns.iter().map(|n| *n as f64).collect();
    let s = slope(&xs, &mses);
    let t = start.elapsed();
    Outcome {
        pass: (variance_ratio - 1.0).abs() <= 0.1 && (s + 1.0).abs() <= 0.15 && t < Duration::from_secs(60),
        detail: format!(
            "var/CRB at n=1e4 {variance_ratio:.4}, MSE slope {s:.4}, window [{:.3}, {:.3}], {:.2} s",
            window.0,
            window.1,
            t.as_secs_f64()
        ),
    }
}

fn heisenberg() -> Outcome {
    let nbars = [4.0, 8.0, 16.0, 32.0];
    let mut slopes = Vec::new();
    for (_, c) in corpus_table() {
        let q: Vec<f64> =
            nbars.iter().map(|&n| qfi(&optimal_state(&c, PHI, n).unwrap().state, &c, PHI).unwrap().qfi).collect();
        slopes.push(slope(&nbars, &q));
    }
    Outcome {
        pass: slopes.iter().all(|s| (1.9..=2.0).contains(s)),
        detail: format!("slopes {}", slopes.iter().map(|s| format!("{s:.4}")).collect::<Vec<_>>().join(", ")),
    }
}

fn cdiag(v: &[f64]) -> CMat {
    CMat::from_diagonal(&DVector::from_iterator(v.len(), v.iter().map(|&x| Complex64::new(x, 0.0))))
}

fn real_orthogonal(n: usize, rng: &mut ChaCha8Rng) -> CMat {
    let x = DMatrix::<f64>::from_fn(n, n, |_, _| rng.sample(StandardNormal));
    let q = x.qr().q();
    q.map(|v| Complex64::new(v, 0.0))
}

fn lemmas() -> Outcome {
    let tol = 1e-10;
    let mut rng = ChaCha8Rng::seed_from_u64(31);
    let mut worst = f64::INFINITY;
    for _ in 0..1000 {
        let n = rng.random_range(1..=6);
        let (a, b) = if rng.random_bool(0.5) {
            (random_hermitian(n, &mut rng), random_hermitian(n, &mut rng))
        } else {
            let ka = rng.random_range(1..=n);
            let kb = rng.random_range(1..=n);
            (random_psd(n, ka, &mut rng), random_psd(n, kb, &mut rng))
        };
        let r = verify_matrix_lemmas(&a, &b, tol).unwrap();
        for c in [Some(r.commutator), Some(r.transpose), r.spectral, r.rank_one].into_iter().flatten() {
            worst = worst.min(c.slack);
        }
    }
    let mut failures = Vec::new();
    for _ in 0..50 {
        let n = rng.random_range(2..=6);
        let draw = |rng: &mut ChaCha8Rng| (0..n).map(|_| rng.random_range(-2.0..2.0)).collect::<Vec<f64>>();
        // Commuting pair sharing a random eigenbasis.
        let w = random_unitary(n, &mut rng);
        let (da, db) = (draw(&mut rng), draw(&mut rng));
        let r = verify_matrix_lemmas(&(&w * cdiag(&da) * w.adjoint()), &(&w * cdiag(&db) * w.adjoint()), tol).unwrap();
        if !(r.commutator.equality && r.commutator.condition) {
            failures.push("commuting");
        }
        // Real symmetric pair with a common real eigenbasis: AB is symmetric.
        let o = real_orthogonal(n, &mut rng);
        let (da, db) = (draw(&mut rng), draw(&mut rng));
        let r =
            verify_matrix_lemmas(&(&o * cdiag(&da) * o.transpose()), &(&o * cdiag(&db) * o.transpose()), tol).unwrap();
        if !(r.transpose.equality && r.transpose.condition) {
            failures.push("symmetric product");
        }
        // B supported inside the degenerate top eigenspace of A.
        let w = random_unitary(n, &mut rng);
        let top = rng.random_range(1.0..3.0);
        let mut av = vec![top, top];
        av.extend((2..n).map(|_| rng.random_range(0.0..0.9 * top)));
        let mut bv = vec![rng.random_range(0.1..2.0), rng.random_range(0.0..2.0)];
        bv.extend(std::iter::repeat_n(0.0, n - 2));
        let r = verify_matrix_lemmas(&(&w * cdiag(&av) * w.adjoint()), &(&w * cdiag(&bv) * w.adjoint()), tol).unwrap();
        let s = r.spectral.unwrap();
        if !(s.equality && s.condition) {
            failures.push("rank-1 support");
        }
        // A = λ v v†.
        let v = random_unitary(n, &mut rng).column(0).into_owned();
        let a = &v * v.adjoint() * Complex64::new(rng.random_range(0.1..3.0), 0.0);
        let r = verify_matrix_lemmas(&a, &random_psd(n, n, &mut rng), tol).unwrap();
        let q = r.rank_one.unwrap();
        if !(q.equality && q.condition) {
            failures.push("rank-1 non-degenerate");
        }
    }
    failures.dedup();
    Outcome {
        pass: worst >= -1e-10 && failures.is_empty(),
        detail: format!("1000 pairs, min slack {worst:.2e}; 4×50 equality cases, failed: {failures:?}"),
    }
}

fn sequential() -> Outcome {
    let nbar = 1.5;
    let mut worst_opt = 0.0_f64;
    let mut worst_ancilla = 0.0_f64;
    for (_, c) in corpus_all() {
        let m = c.modes();
        let norm = c.spectrum(PHI).specnorm;
        for l in [1usize, 2, 4, 8] {
            let ctrl = optimal_controls(&c, PHI, l);
            let seq = SequentialCircuit::new(&c, m, ctrl.clone()).unwrap();
            let probe = optimal_state(&seq, PHI, nbar).unwrap().state;
            let q = qfi(&probe, &seq, PHI).unwrap().qfi;
            worst_opt = worst_opt.max(rel(q, sequential_bound(norm, l, nbar)));

            // Base probe with vacuum ancillas through the extended plan.
            let k = m + 2;
            let wide = SequentialCircuit::new(&c, k, ctrl.iter().map(|u| embed_control(u, k)).collect()).unwrap();
            let base = optimal_state(&c, PHI, nbar).unwrap().state;
            let padded = base.with_vacuum_modes(2);
            let q_wide = qfi(&padded, &wide, PHI).unwrap().qfi;
            let q_narrow = qfi(&base, &seq, PHI).unwrap().qfi;
            worst_ancilla = worst_ancilla.max(rel(q_wide, q_narrow));
            let g_wide = wide.generator_matrix(PHI);
            let g_narrow = embed_zero(&seq.generator_matrix(PHI), k);
            worst_ancilla = worst_ancilla.max((g_wide - g_narrow).iter().fold(0.0, |a: f64, z| a.max(z.norm())));
        }
    }
    let circuits = corpus_all();
    let mut rng = ChaCha8Rng::seed_from_u64(404);
    let mut exceed = 0;
    for trial in 0..100u64 {
        let (_, c) = &circuits[trial as usize % circuits.len()];
        let l = [2usize, 4, 8][trial as usize % 3];
        let k = c.modes() + (trial as usize % 2);
        let controls: Vec<CMat> = (1..l).map(|_| random_unitary(k, &mut rng)).collect();
        let seq = SequentialCircuit::new(c, k, controls).unwrap();
        let bound = sequential_bound(c.spectrum(PHI).specnorm, l, nbar);
        let best = qfi(&optimal_state(&seq, PHI, nbar).unwrap().state, &seq, PHI).unwrap().qfi;
        let random = qfi(&random_state(k, nbar, PurityClass::Pure, 7000 + trial).unwrap(), &seq, PHI).unwrap().qfi;
        if best > bound * (1.0 + 1e-8) || random > bound * (1.0 + 1e-8) {
            exceed += 1;
        }
    }
    Outcome {
        pass: worst_opt < 1e-8 && worst_ancilla < 1e-10 && exceed == 0,
        detail: format!(
            "optimal controls rel {worst_opt:.2e}; ancilla change {worst_ancilla:.2e}; random control sets above bound: {exceed}/100"
        ),
    }
}

/// Probabilists' Gauss–Hermite rule (weights sum to one).
fn gauss_hermite(n: usize) -> (Vec<f64>, Vec<f64>) {
    let jac = RMat::from_fn(n, n, |i, j| if i.abs_diff(j) == 1 { (i.max(j) as f64).sqrt() } else { 0.0 });
    let (nodes, vecs) = symmetric_eigen(&jac);
    let weights = (0..n).map(|k| vecs[(0, k)].powi(2)).collect();
    (nodes, weights)
}

fn chi(gamma: &RMat, disp: &RVec, eta: &RVec) -> Complex64 {
    Complex64::new(-0.5 * eta.dot(&(gamma * eta)), eta.dot(disp)).exp()
}

fn convex_identity() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    let (nodes, weights) = gauss_hermite(40);
    let mut worst_closed = 0.0_f64;
    let mut worst_quad = 0.0_f64;
    let mut quad_states = 0;
    for k in 0..100u64 {
        let modes = 1 + (k as usize % 3);
        let nbar = rng.random_range(0.2..=3.0);
        let state = random_state(modes, nbar, PurityClass::Mixed, 9000 + k).unwrap();
        let g0 = pure_core(state.gamma()).unwrap();
        let n = 2 * modes;
        let scale = state.gamma().trace().sqrt();
        let etas: Vec<RVec> =
            (0..100).map(|_| RVec::from_fn(n, |_, _| rng.sample::<f64, _>(StandardNormal) / scale)).collect();
        for eta in &etas {
            let direct = state.characteristic_function(eta);
            let mixed = gaussmet::gaussian::mixture_characteristic(&state, &g0, eta);
            worst_closed = worst_closed.max((direct - mixed).norm() / direct.norm());
        }
        if modes != 1 {
            continue;
        }
        // Tensor-product quadrature of the ξ integral, weighted by the mixture density.
        quad_states += 1;
        let spread = state.gamma() - &g0;
        let l = Cholesky::new(spread.clone()).unwrap().l();
        let det_l = l.determinant().abs();
        for eta in etas.iter().take(10) {
            let mut acc = Complex64::new(0.0, 0.0);
            for (i, &ui) in nodes.iter().enumerate() {
                for (j, &uj) in nodes.iter().enumerate() {
                    let u = RVec::from_vec(vec![ui, uj]);
                    let xi = &l * &u;
                    let p = convex_weight(state.gamma(), &g0, &xi).unwrap();
                    let jacobian = p * det_l * 2.0 * std::f64::consts::PI * (0.5 * u.norm_squared()).exp();
                    acc += chi(&g0, &(state.disp() - &xi), eta) * (weights[i] * weights[j] * jacobian);
                }
            }
            let direct = state.characteristic_function(eta);
            worst_quad = worst_quad.max((acc - direct).norm() / direct.norm());
        }
    }
    Outcome {
        pass: worst_closed < 1e-10 && worst_quad < 1e-10,
        detail: format!(
            "100 states × 100 η: closed form rel {worst_closed:.2e}; quadrature on {quad_states} single-mode states rel {worst_quad:.2e}"
        ),
    }
}

type Criterion<'a> = (&'static str, Box<dyn Fn() -> Outcome + 'a>);

fn main() {
    let cases = audit_cases();
    let criteria: Vec<Criterion> = vec![
        ("table reproduction", Box::new(table1)),
        ("universal bound audit", Box::new(|| bound_audit(&cases))),
        ("Λ-equation consistency", Box::new(|| lambda_consistency(&cases))),
        ("independent oracles", Box::new(oracles)),
        ("homodyne optimality", Box::new(homodyne_optimality)),
        ("Monte Carlo Cramér-Rao", Box::new(monte_carlo_crb)),
        ("Heisenberg scaling", Box::new(heisenberg)),
        ("matrix lemmas", Box::new(lemmas)),
        ("sequential strategy", Box::new(sequential)),
        ("convex decomposition", Box::new(convex_identity)),
    ];
    let mut failed = 0;
    for (k, (name, run)) in criteria.iter().enumerate() {
        let o = run();
        if !o.pass {
            failed += 1;
        }
        println!("{} criterion {:>2} ({name}): {}", if o.pass { "PASS" } else { "FAIL" }, k + 1, o.detail);
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
