//! One function per subcommand.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use gaussmet::circuit::{parse_circuit, ParamCircuit, PassiveCircuit};
use gaussmet::gaussian::{random_state, GaussianState, PurityClass};
use gaussmet::homodyne::{monotone_window, monte_carlo, optimal_theta, replication_seed, HomodyneModel, HomodyneSetup};
use gaussmet::lemmas::{random_psd, verify_matrix_lemmas};
use gaussmet::linalg::random_hermitian;
use gaussmet::probe::{mixed_bound_audit, optimal_state, squeeze_param};
use gaussmet::qfi::{qfi, qfi_bound};
use gaussmet::sequential::{optimal_controls, sequential_bound, SequentialCircuit, SequentialPlan};
use gaussmet::{corpus, Error};

use crate::config::{Command, Options, RunConfig};
use crate::report::{Report, Table};

/// Slack allowed above a bound before it counts as violated.
const BOUND_SLACK: f64 = 1e-8;

#[derive(Debug)]
pub enum Failure {
    /// Bad input; exit code 2.
    Validation(String),
    /// The engine failed or a bound was violated; exit code 3.
    Numeric(String),
}

impl Failure {
    pub fn exit_code(&self) -> i32 {
        match self {
            Failure::Validation(_) => 2,
            Failure::Numeric(_) => 3,
        }
    }

    pub fn message(&self) -> &str {
        match self {
            Failure::Validation(m) | Failure::Numeric(m) => m,
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::DecompositionFailed(_)
            | Error::SingularBeyondPureTol(_)
            | Error::SingularMixture
            | Error::NonIdentifiable(_) => Failure::Numeric(e.to_string()),
            _ => Failure::Validation(e.to_string()),
        }
    }
}

type Outcome = Result<Report, Failure>;

fn require<T: Copy>(v: Option<T>, name: &str, cmd: Command) -> Result<T, Failure> {
    v.ok_or_else(|| Failure::Validation(format!("{} requires --{name}", cmd.name())))
}

fn load_circuit(spec: &str) -> Result<(String, ParamCircuit), Failure> {
    if let Some(c) = corpus::by_name(spec) {
        return Ok((spec.to_string(), c));
    }
    let text =
        std::fs::read_to_string(spec).map_err(|e| Failure::Validation(format!("cannot read circuit `{spec}`: {e}")))?;
    Ok((spec.to_string(), parse_circuit(&text)?))
}

fn circuit_arg(o: &Options, cmd: Command) -> Result<(String, ParamCircuit), Failure> {
    let spec = o.circuit.as_deref().ok_or_else(|| Failure::Validation(format!("{} requires --circuit", cmd.name())))?;
    load_circuit(spec)
}

fn parse_number(text: &str, what: &str) -> Result<f64, Failure> {
    text.parse().map_err(|_| Failure::Validation(format!("bad {what} `{text}`")))
}

/// Accepts a bare state document or any report whose result holds a `state`.
fn load_state_file(path: &str) -> Result<GaussianState, Failure> {
    let text =
        std::fs::read_to_string(path).map_err(|e| Failure::Validation(format!("cannot read state `{path}`: {e}")))?;
    let value: serde_json::Value =
        serde_json::from_str(&text).map_err(|e| Failure::Validation(format!("state `{path}`: {e}")))?;
    let doc = value.get("result").and_then(|r| r.get("state")).cloned().unwrap_or(value);
    serde_json::from_value(doc).map_err(|e| Failure::Validation(format!("state `{path}`: {e}")))
}

fn build_state(spec: &str, circuit: &ParamCircuit, o: &Options, phi: f64) -> Result<GaussianState, Failure> {
    let m = circuit.modes();
    let (kind, arg) = match spec.split_once(':') {
        Some((k, a)) => (k, Some(a)),
        None => (spec, None),
    };
    let state = match (kind, arg) {
        ("vacuum", None) => GaussianState::vacuum(m),
        ("coherent", Some(a)) => GaussianState::coherent(m, parse_number(a, "amplitude")?),
        ("squeezed", Some(r)) => GaussianState::squeezed_vacuum(m, parse_number(r, "squeezing")?),
        ("thermal", Some(s)) => GaussianState::thermal(m, parse_number(s, "sigma")?)?,
        ("optimal", None) => {
            let nbar = require(o.nbar, "nbar", Command::Qfi)?;
            optimal_state(circuit, o.phi_guess.unwrap_or(phi), nbar)?.state
        }
        _ => load_state_file(spec)?,
    };
    if state.modes() != m {
        return Err(Failure::Validation(format!("state has {} modes, circuit has {m}", state.modes())));
    }
    Ok(state)
}

pub fn run(cfg: &RunConfig) -> Outcome {
    let o = &cfg.options;
    match cfg.command {
        Command::Qfi => cmd_qfi(o),
        Command::Bound => cmd_bound(o),
        Command::OptimalProbe => cmd_optimal_probe(o),
        Command::Homodyne => cmd_homodyne(o),
        Command::Montecarlo => cmd_montecarlo(o),
        Command::Sequential => cmd_sequential(o),
        Command::Audit => cmd_audit(o),
        Command::Lemmas => cmd_lemmas(o),
        Command::Table1 => cmd_table1(o),
    }
}

fn cmd_qfi(o: &Options) -> Outcome {
    let cmd = Command::Qfi;
    let (_, c) = circuit_arg(o, cmd)?;
    let phi = require(o.phi, "phi", cmd)?;
    let spec = o.state.as_deref().ok_or_else(|| Failure::Validation("qfi requires --state".into()))?;
    let state = build_state(spec, &c, o, phi)?;
    let r = qfi(&state, &c, phi)?;
    if r.qfi > r.bound * (1.0 + BOUND_SLACK) {
        return Err(Failure::Numeric(format!("qfi {} exceeds the bound {}", r.qfi, r.bound)));
    }
    Ok(Report::new(cmd.name(), &r, Table::single(&r)))
}

#[derive(Serialize)]
struct BoundReport {
    circuit: String,
    phi: f64,
    nbar: f64,
    specnorm: f64,
    eps: Vec<f64>,
    bound: f64,
}

fn cmd_bound(o: &Options) -> Outcome {
    let cmd = Command::Bound;
    let (name, c) = circuit_arg(o, cmd)?;
    let phi = require(o.phi, "phi", cmd)?;
    let nbar = require(o.nbar, "nbar", cmd)?;
    squeeze_param(nbar)?;
    let spec = c.spectrum(phi);
    let r = BoundReport {
        circuit: name,
        phi,
        nbar,
        specnorm: spec.specnorm,
        eps: spec.eps,
        bound: qfi_bound(spec.specnorm, nbar),
    };
    Ok(Report::new(cmd.name(), &r, Table::single(&r)))
}

#[derive(Serialize)]
struct ProbeReport {
    circuit: String,
    phi_guess: f64,
    phi: f64,
    nbar: f64,
    r0: f64,
    qfi: f64,
    bound: f64,
    state: GaussianState,
}

fn cmd_optimal_probe(o: &Options) -> Outcome {
    let cmd = Command::OptimalProbe;
    let (name, c) = circuit_arg(o, cmd)?;
    let phi = require(o.phi, "phi", cmd)?;
    let nbar = require(o.nbar, "nbar", cmd)?;
    let guess = o.phi_guess.unwrap_or(phi);
    let p = optimal_state(&c, guess, nbar)?;
    let r = qfi(&p.state, &c, phi)?;
    let report = ProbeReport {
        circuit: name,
        phi_guess: guess,
        phi,
        nbar,
        r0: p.r0,
        qfi: r.qfi,
        bound: r.bound,
        state: p.state,
    };
    Ok(Report::new(cmd.name(), &report, Table::single(&report)))
}

#[derive(Serialize)]
struct HomodyneReport {
    circuit: String,
    phi: f64,
    phi_guess: f64,
    nbar: f64,
    theta_opt: f64,
    bound: f64,
    fi: f64,
    model: HomodyneModel,
}

fn homodyne_setup<'a>(
    c: &'a ParamCircuit,
    o: &Options,
    cmd: Command,
) -> Result<(HomodyneSetup<'a, ParamCircuit>, f64, f64), Failure> {
    let phi = require(o.phi, "phi", cmd)?;
    let nbar = require(o.nbar, "nbar", cmd)?;
    let r0 = squeeze_param(nbar)?;
    let theta = o.theta.unwrap_or_else(|| optimal_theta(r0));
    Ok((HomodyneSetup::new(c, o.phi_guess.unwrap_or(phi), theta, r0), phi, nbar))
}

fn cmd_homodyne(o: &Options) -> Outcome {
    let cmd = Command::Homodyne;
    let (name, c) = circuit_arg(o, cmd)?;
    let (setup, phi, nbar) = homodyne_setup(&c, o, cmd)?;
    let model = setup.model(phi);
    let bound = qfi_bound(c.spectrum(phi).specnorm, nbar);
    if model.fi > bound * (1.0 + BOUND_SLACK) {
        return Err(Failure::Numeric(format!("FI {} exceeds the QFI bound {bound}", model.fi)));
    }
    let r = HomodyneReport {
        circuit: name,
        phi,
        phi_guess: setup.phi_guess,
        nbar,
        theta_opt: optimal_theta(setup.r0),
        bound,
        fi: model.fi,
        model,
    };
    Ok(Report::new(cmd.name(), &r, Table::single(&r)))
}

#[derive(Serialize)]
struct MonteCarloReport {
    circuit: String,
    phi: f64,
    phi_guess: f64,
    nbar: f64,
    theta: f64,
    samples: usize,
    replications: usize,
    seed: u64,
    window: (f64, f64),
    mean: f64,
    empirical_variance: f64,
    mse: f64,
    fi: f64,
    crb: f64,
    variance_to_crb: f64,
    estimates: Vec<f64>,
}

#[derive(Serialize)]
struct EstimateRow {
    seed: u64,
    phi_hat: f64,
}

fn cmd_montecarlo(o: &Options) -> Outcome {
    let cmd = Command::Montecarlo;
    let (name, c) = circuit_arg(o, cmd)?;
    let (setup, phi, nbar) = homodyne_setup(&c, o, cmd)?;
    let samples = o.samples.unwrap_or(10_000);
    let reps = o.replications.unwrap_or(200);
    let seed = o.seed.unwrap_or(0);
    let window = monotone_window(&setup, 0.5)?;
    if !(window.0..=window.1).contains(&phi) {
        return Err(Failure::Validation(format!(
            "phi {phi} lies outside the identifiable window [{}, {}] around the guess",
            window.0, window.1
        )));
    }
    let run = monte_carlo(&setup, phi, samples, reps, seed, window)?;
    let rows: Vec<EstimateRow> = run
        .estimates
        .iter()
        .enumerate()
        .map(|(k, e)| EstimateRow { seed: replication_seed(seed, k as u64), phi_hat: *e })
        .collect();
    let r = MonteCarloReport {
        circuit: name,
        phi,
        phi_guess: setup.phi_guess,
        nbar,
        theta: setup.theta,
        samples,
        replications: reps,
        seed,
        window,
        mean: run.mean,
        empirical_variance: run.empirical_variance,
        mse: run.mse,
        fi: run.fi,
        crb: run.crb,
        variance_to_crb: run.empirical_variance / run.crb,
        estimates: run.estimates,
    };
    Ok(Report::new(cmd.name(), &r, Table::from_items(&rows)))
}

#[derive(Serialize)]
struct SequentialReport {
    circuit: String,
    phi: f64,
    nbar: f64,
    specnorm: f64,
    overall_specnorm: f64,
    qfi: f64,
    bound: f64,
    plan: SequentialPlan,
}

fn cmd_sequential(o: &Options) -> Outcome {
    let cmd = Command::Sequential;
    let (name, c) = circuit_arg(o, cmd)?;
    let phi = require(o.phi, "phi", cmd)?;
    let nbar = require(o.nbar, "nbar", cmd)?;
    let passes = o.passes.unwrap_or(1);
    if passes == 0 {
        return Err(Failure::Validation("L must be at least 1".into()));
    }
    let k = o.modes.unwrap_or(c.modes());
    let controls =
        optimal_controls(&c, phi, passes).iter().map(|u| gaussmet::sequential::embed_control(u, k)).collect();
    let seq = SequentialCircuit::new(&c, k, controls)?;
    let probe = optimal_state(&seq, phi, nbar)?.state;
    let q = qfi(&probe, &seq, phi)?;
    let specnorm = c.spectrum(phi).specnorm;
    let bound = sequential_bound(specnorm, passes, nbar);
    if q.qfi > bound * (1.0 + BOUND_SLACK) {
        return Err(Failure::Numeric(format!("qfi {} exceeds the sequential bound {bound}", q.qfi)));
    }
    let r = SequentialReport {
        circuit: name.clone(),
        phi,
        nbar,
        specnorm,
        overall_specnorm: seq.spectrum(phi).specnorm,
        qfi: q.qfi,
        bound,
        plan: SequentialPlan::new(&seq, name),
    };
    Ok(Report::new(cmd.name(), &r, Table::single(&r)))
}

#[derive(Serialize)]
struct AuditRow {
    seed: u64,
    circuit: String,
    modes: usize,
    class: PurityClass,
    nbar: f64,
    phi: f64,
    qfi: f64,
    intermediate: f64,
    bound: f64,
    violation: bool,
}

#[derive(Serialize)]
struct AuditSummary {
    states: usize,
    violations: usize,
    chain_failures: usize,
    max_qfi_over_bound: f64,
    rows: Vec<AuditRow>,
}

fn cmd_audit(o: &Options) -> Outcome {
    let cmd = Command::Audit;
    let n = o.seeds.unwrap_or(1000);
    let base = o.seed.unwrap_or(0);
    let circuits: Vec<(String, ParamCircuit)> = match &o.circuit {
        Some(spec) => {
            let c = load_circuit(spec)?;
            if o.modes.is_some_and(|m| m != c.1.modes()) {
                return Err(Failure::Validation("--modes disagrees with the circuit".into()));
            }
            vec![c]
        }
        None => corpus::ALL
            .iter()
            .map(|(name, _)| (name.to_string(), corpus::by_name(name).expect("corpus name")))
            .filter(|(_, c)| o.modes.is_none_or(|m| c.modes() == m))
            .collect(),
    };
    if circuits.is_empty() {
        return Err(Failure::Validation(format!("no built-in circuit has {} modes", o.modes.unwrap_or(0))));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(base);
    let mut rows = Vec::with_capacity(n);
    let mut chain_failures = 0;
    let mut max_ratio = 0.0_f64;
    for k in 0..n {
        let seed = base.wrapping_add(k as u64);
        let (name, c) = &circuits[k % circuits.len()];
        let class = if k % 2 == 0 { PurityClass::Pure } else { PurityClass::Mixed };
        let nbar = rng.random_range(0.1..=5.0);
        let phi = rng.random_range(-std::f64::consts::PI..std::f64::consts::PI);
        let state = random_state(c.modes(), nbar, class, seed)?;
        let a = mixed_bound_audit(&state, c, phi)?;
        if !a.chain_holds {
            chain_failures += 1;
        }
        max_ratio = max_ratio.max(a.qfi / a.bound);
        rows.push(AuditRow {
            seed,
            circuit: name.clone(),
            modes: c.modes(),
            class,
            nbar: a.nbar,
            phi,
            qfi: a.qfi,
            intermediate: a.intermediate,
            bound: a.bound,
            violation: a.qfi > a.bound * (1.0 + BOUND_SLACK),
        });
    }
    let violations = rows.iter().filter(|r| r.violation).count();
    let table = Table::from_items(&rows);
    let summary = AuditSummary { states: n, violations, chain_failures, max_qfi_over_bound: max_ratio, rows };
    if violations > 0 {
        return Err(Failure::Numeric(format!("{violations} of {n} states exceed the bound")));
    }
    Ok(Report::new(cmd.name(), &summary, table))
}

#[derive(Serialize)]
struct LemmaRow {
    pair: usize,
    n: usize,
    psd: bool,
    commutator_slack: f64,
    transpose_slack: f64,
    spectral_slack: Option<f64>,
    rank_one_slack: Option<f64>,
    holds: bool,
}

#[derive(Serialize)]
struct LemmaSummary {
    pairs: usize,
    violations: usize,
    min_slack: f64,
    rows: Vec<LemmaRow>,
}

fn cmd_lemmas(o: &Options) -> Outcome {
    let cmd = Command::Lemmas;
    let n = o.seeds.unwrap_or(1000);
    let tol = 1e-10;
    let mut rng = ChaCha8Rng::seed_from_u64(o.seed.unwrap_or(0));
    let mut rows = Vec::with_capacity(n);
    let mut min_slack = f64::INFINITY;
    for pair in 0..n {
        let size = rng.random_range(1..=6);
        let psd = rng.random_bool(0.5);
        let (a, b) = if psd {
            let (ka, kb) = (rng.random_range(1..=size), rng.random_range(1..=size));
            (random_psd(size, ka, &mut rng), random_psd(size, kb, &mut rng))
        } else {
            (random_hermitian(size, &mut rng), random_hermitian(size, &mut rng))
        };
        let r = verify_matrix_lemmas(&a, &b, tol)?;
        for c in [Some(r.commutator), Some(r.transpose), r.spectral, r.rank_one].into_iter().flatten() {
            min_slack = min_slack.min(c.slack);
        }
        rows.push(LemmaRow {
            pair,
            n: size,
            psd,
            commutator_slack: r.commutator.slack,
            transpose_slack: r.transpose.slack,
            spectral_slack: r.spectral.map(|c| c.slack),
            rank_one_slack: r.rank_one.map(|c| c.slack),
            holds: r.all_hold(tol),
        });
    }
    let violations = rows.iter().filter(|r| !r.holds).count();
    let table = Table::from_items(&rows);
    if violations > 0 {
        return Err(Failure::Numeric(format!("{violations} of {n} pairs violate an inequality")));
    }
    Ok(Report::new(cmd.name(), &LemmaSummary { pairs: n, violations, min_slack, rows }, table))
}

#[derive(Serialize)]
struct Table1Row {
    circuit: &'static str,
    nbar: f64,
    phi: f64,
    specnorm: f64,
    qfi: f64,
    bound: f64,
    /// `qfi / (N̄(N̄+1))`.
    coefficient: f64,
}

#[derive(Serialize)]
struct Table1Report {
    rows: Vec<Table1Row>,
}

fn cmd_table1(o: &Options) -> Outcome {
    let cmd = Command::Table1;
    let nbar = o.nbar.unwrap_or(1.0);
    let phi = o.phi.unwrap_or(0.3);
    let mut rows = Vec::new();
    for (name, src) in corpus::TABLE {
        let c = parse_circuit(src)?;
        let probe = optimal_state(&c, phi, nbar)?.state;
        let r = qfi(&probe, &c, phi)?;
        let per_photon = nbar * (nbar + 1.0);
        rows.push(Table1Row {
            circuit: name,
            nbar,
            phi,
            specnorm: r.specnorm,
            qfi: r.qfi,
            bound: r.bound,
            coefficient: if per_photon > 0.0 { r.qfi / per_photon } else { 0.0 },
        });
    }
    let table = Table::from_items(&rows);
    Ok(Report::new(cmd.name(), &Table1Report { rows }, table))
}
