use std::fs;
use std::path::Path;

use clap::ValueEnum;
use mqc::compiler::{compile, verify, GateCircuit, Mode, VerifyReport};
use mqc::exec::{execute, ExecOptions, ResourceCounts};
use mqc::formats::{circuit_from_json, program_from_json, program_to_json, to_canonical_json};
use mqc::gadgets::{acn_branch_probabilities, acn_branch_table, acn_state, prepare_acn, prepare_acn_stabilizer};
use mqc::msets::{u_squared_deviation, SpecialU};
use mqc::pauli::PauliString;
use mqc::program::FramePolicy;
use mqc::state::{fidelity, PureState};
use mqc::stats::{pauli_gadget_experiment, walk_experiment, ChiSquareTest, Summary};
use mqc::tableau::tableau_to_state;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::args::{
    AcnArgs, Common, CompileArgs, Experiment, ModeArgs, Policy, RunArgs, StatsArgs, UsqArgs, VerifyArgs,
    WalkArgs,
};
use crate::error::{CliError, CliResult};

pub const TOL_ENV: &str = "MQC_TOL";
pub const WORKERS_ENV: &str = "MQC_WORKERS";

/// Fewest trials for which the 3-sigma checks are meaningful.
pub const MIN_TRIALS: usize = 100;

#[derive(Debug, Serialize)]
struct EnvEcho {
    #[serde(rename = "MQC_TOL")]
    tol: Option<String>,
    #[serde(rename = "MQC_WORKERS")]
    workers: Option<String>,
}

#[derive(Debug, Serialize)]
struct Header {
    command: &'static str,
    version: &'static str,
    seed: u64,
    tol: f64,
    workers: usize,
    env: EnvEcho,
}

#[derive(Debug, Serialize)]
struct Report<T: Serialize> {
    header: Header,
    pass: bool,
    #[serde(flatten)]
    body: T,
}

/// Settings shared by every report-producing command.
struct Context {
    header: Header,
    output: Option<std::path::PathBuf>,
}

impl Context {
    fn new(command: &'static str, common: &Common, default_tol: f64) -> CliResult<Self> {
        let env_tol = std::env::var(TOL_ENV).ok();
        let env_workers = std::env::var(WORKERS_ENV).ok();
        let tol = match (common.tol, &env_tol) {
            (Some(t), _) => t,
            (None, Some(s)) => s
                .trim()
                .parse()
                .map_err(|_| CliError::Usage(format!("{TOL_ENV}={s:?} is not a number")))?,
            (None, None) => default_tol,
        };
        if !(tol > 0.0 && tol.is_finite()) {
            return Err(CliError::Usage(format!("tol must be positive, got {tol}")));
        }
        let workers = match (common.workers, &env_workers) {
            (Some(w), _) => w,
            (None, Some(s)) => s
                .trim()
                .parse()
                .map_err(|_| CliError::Usage(format!("{WORKERS_ENV}={s:?} is not an integer")))?,
            (None, None) => 1,
        };
        if workers == 0 {
            return Err(CliError::Usage("workers must be at least 1".into()));
        }
        Ok(Self {
            header: Header {
                command,
                version: env!("CARGO_PKG_VERSION"),
                seed: common.seed,
                tol,
                workers,
                env: EnvEcho {
                    tol: env_tol,
                    workers: env_workers,
                },
            },
            output: common.output.clone(),
        })
    }

    fn tol(&self) -> f64 {
        self.header.tol
    }

    /// Writes the report, then turns a failed check into `fail`.
    fn emit<T: Serialize>(self, pass: bool, body: T, fail: impl FnOnce() -> CliError) -> CliResult<()> {
        let text = to_canonical_json(&Report {
            header: self.header,
            pass,
            body,
        })?;
        write_out(self.output.as_deref(), &text)?;
        if pass {
            Ok(())
        } else {
            Err(fail())
        }
    }
}

fn read(path: &Path) -> CliResult<String> {
    fs::read_to_string(path).map_err(|source| CliError::Io {
        path: path.display().to_string(),
        source,
    })
}

fn write_out(path: Option<&Path>, text: &str) -> CliResult<()> {
    match path {
        Some(p) => fs::write(p, text).map_err(|source| CliError::Io {
            path: p.display().to_string(),
            source,
        }),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn policy(p: Option<Policy>) -> Option<FramePolicy> {
    p.map(|p| match p {
        Policy::Eager => FramePolicy::Eager,
        Policy::Deferred => FramePolicy::Deferred,
    })
}

fn special_u(theta: Option<f64>, phi: Option<f64>) -> CliResult<SpecialU> {
    let d = SpecialU::default();
    Ok(SpecialU::new(theta.unwrap_or(d.theta), phi.unwrap_or(d.phi))?)
}

pub fn mode_from(args: &ModeArgs) -> CliResult<Mode> {
    let name = args
        .mode
        .ok_or_else(|| CliError::Usage("--mode is required to compile a circuit".into()))?;
    let special = match (args.theta, args.phi) {
        (None, None) => None,
        (t, p) => Some(special_u(t, p)?),
    };
    let name = name.to_possible_value().expect("no skipped variants");
    Ok(Mode::from_parts(name.get_name(), args.set.as_deref(), args.set_theta, special)?)
}

fn load_circuit(path: &Path) -> CliResult<GateCircuit> {
    Ok(circuit_from_json(&read(path)?)?)
}

pub fn cmd_compile(a: &CompileArgs) -> CliResult<()> {
    let circuit = load_circuit(&a.circuit)?;
    let mode = mode_from(&a.mode)?;
    let mut program = compile(&circuit, &mode)?;
    program.frame_policy = policy(Some(a.policy)).unwrap_or_default();
    if !program.is_measurement_only() {
        return Err(CliError::Check("compiled program contains a unitary instruction".into()));
    }
    write_out(a.output.as_deref(), &program_to_json(&program)?)?;
    eprintln!("high-water mark: {} physical qubits", program.num_physical_qubits());
    Ok(())
}

fn amplitudes(s: &PureState) -> Vec<[f64; 2]> {
    s.amplitudes().iter().map(|a| [a.re, a.im]).collect()
}

#[derive(Debug, Serialize)]
struct RunBody {
    mode: Option<String>,
    policy: FramePolicy,
    /// Flushed output amplitudes, qubit 0 most significant.
    output_state: Vec<[f64; 2]>,
    residual_frame: PauliString,
    /// `(register, value)` in program order.
    outcomes: Vec<(usize, usize)>,
    branch_probability: f64,
    loops: Vec<(String, usize)>,
    resource_counts: ResourceCounts,
    num_physical_qubits: usize,
    /// Against the dense circuit; absent for program input.
    infidelity: Option<f64>,
}

pub fn cmd_run(a: &RunArgs) -> CliResult<()> {
    let ctx = Context::new("run", &a.common, 1e-9)?;
    let text = read(&a.input)?;
    let (program, circuit, mode) = if a.program {
        (program_from_json(&text)?, None, None)
    } else {
        let c = circuit_from_json(&text)?;
        let mode = mode_from(&a.mode)?;
        (compile(&c, &mode)?, Some(c), Some(mode.to_string()))
    };
    let pol = policy(a.policy).unwrap_or(program.frame_policy);
    let res = execute(
        &program,
        None,
        &ExecOptions {
            seed: a.common.seed,
            forced: None,
            policy: Some(pol),
        },
    )?;
    let out = res.flushed()?;
    let infidelity = match &circuit {
        Some(c) => Some((1.0 - fidelity(&out, &c.simulate()?)?).max(0.0)),
        None => None,
    };
    let pass = infidelity.is_none_or(|i| i <= ctx.tol());
    let body = RunBody {
        mode,
        policy: pol,
        output_state: amplitudes(&out),
        residual_frame: res.frame.clone(),
        outcomes: res.trace.outcomes.iter().map(|(r, v)| (r.0, *v)).collect(),
        branch_probability: res.trace.probability,
        loops: res.trace.loops.clone(),
        resource_counts: res.trace.resources,
        num_physical_qubits: program.num_physical_qubits(),
        infidelity,
    };
    let tol = ctx.tol();
    ctx.emit(pass, body, || {
        CliError::Check(format!("output infidelity {:e} exceeds {tol:e}", infidelity.unwrap_or(0.0)))
    })
}

pub fn cmd_verify(a: &VerifyArgs) -> CliResult<()> {
    let ctx = Context::new("verify", &a.common, 1e-9)?;
    if a.trials == 0 {
        return Err(CliError::Usage("--trials must be at least 1".into()));
    }
    let circuit = load_circuit(&a.circuit)?;
    let mode = mode_from(&a.mode)?;
    let report: VerifyReport = verify(&circuit, &mode, a.trials, a.common.seed, policy(a.policy))?;
    let (inf, tol) = (report.max_infidelity, ctx.tol());
    ctx.emit(inf <= tol, report, || {
        CliError::Check(format!("max infidelity {inf:e} exceeds {tol:e}"))
    })
}

#[derive(Debug, Serialize)]
struct ModelCheck {
    expected: f64,
    /// Standard error of the mean under the geometric model.
    model_stderr: f64,
    z_score: f64,
}

impl ModelCheck {
    /// Geometric on `1, 2, ...` with success probability `p`, scaled by `scale`.
    fn geometric(s: &Summary, p: f64, scale: f64) -> Self {
        let expected = scale / p;
        let model_stderr = scale * (1.0 - p).sqrt() / p / (s.n as f64).sqrt();
        Self {
            expected,
            model_stderr,
            z_score: (s.mean - expected) / model_stderr,
        }
    }

    fn within_3_sigma(&self) -> bool {
        self.z_score.abs() <= 3.0
    }
}

#[derive(Debug, Serialize)]
struct GadgetBody {
    experiment: &'static str,
    trials: usize,
    pauli: usize,
    rounds: Summary,
    bell_measurements: Summary,
    rounds_model: ModelCheck,
    bell_model: ModelCheck,
    rounds_per_trial: Vec<usize>,
}

#[derive(Debug, Serialize)]
struct WalkBody {
    experiment: &'static str,
    trials: usize,
    target: PauliString,
    iterations: Summary,
    iterations_model: ModelCheck,
    chi_square: ChiSquareTest,
    histogram: Vec<(usize, usize)>,
}

fn walk_body(trials: usize, seed: u64, target: &str, workers: usize) -> CliResult<(bool, WalkBody)> {
    let target: PauliString = target.parse()?;
    let w = walk_experiment(trials, seed, &target, workers)?;
    let model = ModelCheck::geometric(&w.iterations, 1.0 / 16.0, 1.0);
    let pass = model.within_3_sigma() && !w.chi_square.rejected;
    Ok((
        pass,
        WalkBody {
            experiment: "walk",
            trials,
            target: w.target,
            iterations: w.iterations,
            iterations_model: model,
            chi_square: w.chi_square,
            histogram: w.histogram,
        },
    ))
}

fn check_trials(trials: usize) -> CliResult<()> {
    if trials < MIN_TRIALS {
        return Err(CliError::Usage(format!("--trials must be at least {MIN_TRIALS}, got {trials}")));
    }
    Ok(())
}

pub fn cmd_stats(a: &StatsArgs) -> CliResult<()> {
    check_trials(a.trials)?;
    let ctx = Context::new("stats", &a.common, 1e-10)?;
    let workers = ctx.header.workers;
    match a.experiment {
        Experiment::PauliGadget => {
            if !(1..=3).contains(&a.pauli) {
                return Err(CliError::Usage(format!("--pauli must be 1, 2 or 3, got {}", a.pauli)));
            }
            let s = pauli_gadget_experiment(a.trials, a.common.seed, a.pauli, workers)?;
            let rounds_model = ModelCheck::geometric(&s.rounds, 0.25, 1.0);
            let bell_model = ModelCheck::geometric(&s.bell_measurements, 0.25, 2.0);
            let pass = rounds_model.within_3_sigma() && bell_model.within_3_sigma();
            let detail = format!(
                "mean rounds {:.4} (z {:.2}), mean Bell measurements {:.4} (z {:.2})",
                s.rounds.mean, rounds_model.z_score, s.bell_measurements.mean, bell_model.z_score
            );
            let body = GadgetBody {
                experiment: "pauli-gadget",
                trials: a.trials,
                pauli: a.pauli,
                rounds: s.rounds,
                bell_measurements: s.bell_measurements,
                rounds_model,
                bell_model,
                rounds_per_trial: s.rounds_per_trial,
            };
            ctx.emit(pass, body, || CliError::Statistical(detail))
        }
        Experiment::Walk => {
            let (pass, body) = walk_body(a.trials, a.common.seed, &a.target, workers)?;
            let detail = format!(
                "mean iterations {:.4} (z {:.2}), chi-square p {:.3e}",
                body.iterations.mean, body.iterations_model.z_score, body.chi_square.p_value
            );
            ctx.emit(pass, body, || CliError::Statistical(detail))
        }
    }
}

pub fn cmd_walk(a: &WalkArgs) -> CliResult<()> {
    check_trials(a.trials)?;
    let ctx = Context::new("walk", &a.common, 1e-10)?;
    let (pass, body) = walk_body(a.trials, a.common.seed, &a.target, ctx.header.workers)?;
    let p = body.chi_square.p_value;
    ctx.emit(pass, body, || {
        CliError::Statistical(format!("hitting times do not fit the geometric model (p {p:.3e})"))
    })
}

#[derive(Debug, Serialize)]
struct AcnBody {
    post_select: bool,
    /// `(IXXI, ZIZI)` outcomes, 0 for +1.
    parity_outcomes: [usize; 2],
    /// Every preparation outcome: Z, Z, X, Bell, IXXI, ZIZI.
    outcomes: Vec<usize>,
    /// The prepared state is `(sigma_k ⊗ sigma_l ⊗ I ⊗ I)|a_cn>`.
    classification: (usize, usize),
    /// Prepared amplitudes with the phase of `|0000>` removed, after the
    /// classification fix-up.
    state_amplitudes: Vec<[f64; 2]>,
    expected_amplitudes: Vec<[f64; 2]>,
    state_fidelity: f64,
    stabilizer_generators: [Vec<PauliString>; 3],
    stabilizer_fidelity: f64,
    cross_engine_fidelity: f64,
    /// `(k, l)` per `(IXXI, ZIZI)` outcome pair.
    branch_table: [[(usize, usize); 2]; 2],
    branch_probabilities: [[f64; 2]; 2],
}

pub fn cmd_acn(a: &AcnArgs) -> CliResult<()> {
    let ctx = Context::new("acn", &a.common, 1e-10)?;
    let mut rng = ChaCha8Rng::seed_from_u64(a.common.seed);
    let prep = prepare_acn(&mut rng, a.post_select)?;
    let (k, l) = prep.classification;
    let fixed = PauliString::from_indices(&[k, l]).apply_to(&prep.state, &[0, 1])?;
    let phase = fixed.amplitudes()[0] / fixed.amplitudes()[0].norm();
    let dephased = PureState::new(fixed.amplitudes().iter().map(|x| x / phase).collect())?;
    let want = acn_state();
    let tables = prepare_acn_stabilizer()?;
    let tab_state = tableau_to_state(&tables[2])?;
    let state_fidelity = fidelity(&fixed, &want)?;
    let stabilizer_fidelity = fidelity(&tab_state, &want)?;
    let cross_engine_fidelity = fidelity(&fixed, &tab_state)?;
    let tol = ctx.tol();
    let worst = [state_fidelity, stabilizer_fidelity, cross_engine_fidelity]
        .into_iter()
        .fold(1.0, f64::min);
    let body = AcnBody {
        post_select: a.post_select,
        parity_outcomes: [prep.xx, prep.zz],
        outcomes: prep.outcomes,
        classification: prep.classification,
        state_amplitudes: amplitudes(&dephased),
        expected_amplitudes: amplitudes(&want),
        state_fidelity,
        stabilizer_generators: tables.map(|t| t.generators().to_vec()),
        stabilizer_fidelity,
        cross_engine_fidelity,
        branch_table: acn_branch_table()?,
        branch_probabilities: acn_branch_probabilities()?,
    };
    ctx.emit(1.0 - worst <= tol, body, || {
        CliError::Check(format!("a_cn fidelity {worst} below 1 - {tol:e}"))
    })
}

#[derive(Debug, Serialize)]
struct UsqBody {
    theta: f64,
    phi: f64,
    /// `max |(I⊗Z) U^dagger (I⊗Z) U - U^2|`.
    deviation: f64,
}

pub fn cmd_usq(a: &UsqArgs) -> CliResult<()> {
    let ctx = Context::new("usq", &a.common, 1e-12)?;
    let su = special_u(a.theta, a.phi)?;
    let deviation = u_squared_deviation(su.unitary())?;
    let tol = ctx.tol();
    let body = UsqBody {
        theta: su.theta,
        phi: su.phi,
        deviation,
    };
    ctx.emit(deviation <= tol, body, || {
        CliError::Check(format!("U^2 deviation {deviation:e} exceeds {tol:e}"))
    })
}
