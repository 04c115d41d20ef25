//! Subcommand implementations. Data goes to `--out` or stdout, summaries to stderr.

use std::path::Path;

use majoflow::channel::{
    certify, channel_from_generator, check_trace_preserving, check_unital_kraus, choi_matrix,
    default_rank_tol, interval_channels, kraus_from_choi, verdict_counts, KrausCheck,
    MonotoneCertificate, PairMode, Verdict, VerifyOptions,
};
use majoflow::lindblad::{check_unital, evolve, HamiltonianSchedule, LindbladGenerator, UnitalityCheck, UNITAL_TOL};
use majoflow::linalg::diag;
use majoflow::random::seeded;
use majoflow::spin::{random_frame_schedule, reachable_interval, simulate_controlled, SpinGks};
use majoflow::{validate_density, Tolerances};
use rand::RngCore;
use serde::Serialize;

use crate::output::{
    emit, fmt_f64, timestamp, to_json, trajectory_csv, trajectory_json, RunMetadata, VERSION,
};
use crate::scenario::{matrix_to_literal, MatrixLiteral, Scenario};
use crate::CliError;

/// Outcome of a command that ran to completion.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Success,
    Failure,
}

impl Status {
    fn from_pass(pass: bool) -> Self {
        if pass {
            Self::Success
        } else {
            Self::Failure
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Csv,
    Json,
}

/// Largest number of frames in a random control schedule.
pub const MAX_CONTROL_SEGMENTS: usize = 8;
/// Tolerance on the reachable interval before `MAJOFLOW_TOL` scaling.
pub const INTERVAL_TOL: f64 = 1e-8;
/// Kraus residual tolerance before `MAJOFLOW_TOL` scaling.
pub const KRAUS_TOL: f64 = 1e-8;

fn fail_line(name: &str, err: &dyn std::fmt::Display) -> String {
    format!("{name}: FAIL {err}")
}

/// Checks every object in the scenario and reports one line per object.
pub fn validate(s: &Scenario, mult: f64, out: Option<&Path>) -> Result<Status, CliError> {
    let tol = &s.tolerances;
    let mut lines = Vec::new();
    let mut pass = true;
    let basis = s.operator_basis();
    match &basis {
        Ok(b) => lines.push(format!("basis: ok ({} operators, orthonormal, traceless)", b.len())),
        Err(e) => {
            pass = false;
            lines.push(fail_line("basis", e));
        }
    }
    match s.hamiltonian.validate(s.dimension, tol) {
        Ok(()) => lines.push(format!(
            "hamiltonian: ok ({} segment(s), Hermitian)",
            s.hamiltonian.num_segments()
        )),
        Err(e) => {
            pass = false;
            lines.push(fail_line("hamiltonian", &e));
        }
    }
    let gks = s.gks_matrix();
    match &gks {
        Ok(g) => match g.psd_warning(tol) {
            Some(w) => lines.push(format!("gks: ok (warning: {w})")),
            None => lines.push(format!(
                "gks: ok (Hermitian, PSD, min eigenvalue {})",
                fmt_f64(g.min_eigenvalue())
            )),
        },
        Err(e) => {
            pass = false;
            lines.push(fail_line("gks", e));
        }
    }
    if let Some(m) = &s.initial_state {
        match validate_density(m, tol) {
            Ok(_) => lines.push("initial_state: ok (Hermitian, trace 1, PSD)".into()),
            Err(e) => {
                pass = false;
                lines.push(fail_line("initial_state", &e));
            }
        }
    }
    if let Some(t) = &s.times {
        lines.push(format!(
            "times: ok ({} points on [0, {}])",
            t.len(),
            fmt_f64(*t.last().expect("nonempty grid"))
        ));
    }
    match (basis, gks) {
        (Ok(b), Ok(g)) => {
            let gen = LindbladGenerator::new(b, g, HamiltonianSchedule::zero(s.dimension), tol)?;
            let u = check_unital(&gen, UNITAL_TOL * mult);
            let residual = u.residual.max(u.residual_direct);
            if u.unital {
                lines.push(format!("unital: yes, residual {residual:.1e}"));
            } else {
                pass = false;
                lines.push(format!("unital: no, residual {residual:.1e}"));
            }
        }
        _ => {
            pass = false;
            lines.push("unital: not checked".into());
        }
    }
    let mut report = lines.join("\n");
    report.push('\n');
    if let Some(path) = out {
        emit(Some(path), &report)?;
    }
    emit(None, &report)?;
    Ok(Status::from_pass(pass))
}

pub fn simulate(s: &Scenario, format: Format, out: Option<&Path>) -> Result<Status, CliError> {
    let gen = s.generator()?;
    let rho0 = s.initial_density()?;
    let grid = s.time_grid()?;
    let traj = evolve(&gen, &rho0, &grid, &s.evolve_options())?;
    let meta = RunMetadata::new(&traj, s.seed, s.tolerances);
    let text = match format {
        Format::Csv => trajectory_csv(&traj, &meta),
        Format::Json => trajectory_json(&traj, meta)?,
    };
    emit(out, &text)?;
    eprintln!(
        "simulated {} samples on [0, {}] with {}",
        traj.len(),
        fmt_f64(*grid.last().expect("nonempty grid")),
        traj.metadata.integrator
    );
    Ok(Status::Success)
}

#[derive(Debug, Serialize)]
struct VerdictSummary {
    monotone: usize,
    violated: usize,
    inconclusive: usize,
}

#[derive(Debug, Serialize)]
struct VerifyReport<'a> {
    metadata: RunMetadata,
    pairs: PairMode,
    unitality: UnitalityCheck,
    summary: VerdictSummary,
    certificates: &'a [MonotoneCertificate],
}

pub fn verify_options(tol: Tolerances, pairs: PairMode, mult: f64) -> VerifyOptions {
    let base = VerifyOptions::default();
    VerifyOptions {
        pairs,
        tol,
        tol_functional: base.tol_functional * mult,
        tol_stochastic: base.tol_stochastic * mult,
        ..base
    }
}

pub fn verify(s: &Scenario, pairs: PairMode, mult: f64, out: Option<&Path>) -> Result<Status, CliError> {
    let gen = s.generator()?;
    let rho0 = s.initial_density()?;
    let grid = s.time_grid()?;
    let opts = verify_options(s.tolerances, pairs, mult);
    let traj = evolve(&gen, &rho0, &grid, &s.evolve_options())?;
    let channels = interval_channels(&gen, &grid, &opts)?;
    let certificates = certify(&channels, &traj, &opts)?;
    let (monotone, violated, inconclusive) = verdict_counts(&certificates);
    let report = VerifyReport {
        metadata: RunMetadata::new(&traj, s.seed, s.tolerances),
        pairs,
        unitality: check_unital(&gen, UNITAL_TOL * mult),
        summary: VerdictSummary {
            monotone,
            violated,
            inconclusive,
        },
        certificates: &certificates,
    };
    emit(out, &to_json(&report)?)?;
    eprintln!("monotone: {monotone}, violated: {violated}, inconclusive: {inconclusive}");
    Ok(Status::from_pass(
        certificates.iter().all(|c| c.verdict == Verdict::Monotone),
    ))
}

#[derive(Debug, Serialize)]
struct KrausReport {
    version: String,
    generated_at: u64,
    fingerprint: String,
    t1: f64,
    t2: f64,
    tolerances: Tolerances,
    kraus_operators: Vec<MatrixLiteral>,
    trace_preserving: KrausCheck,
    unital: KrausCheck,
    generator_unitality: UnitalityCheck,
    choi_spectrum: Vec<f64>,
    discarded_mass: f64,
}

pub fn kraus(s: &Scenario, t1: f64, t2: f64, mult: f64, out: Option<&Path>) -> Result<Status, CliError> {
    let gen = s.generator()?;
    let channel = channel_from_generator(&gen, t1, t2)?;
    let ks = kraus_from_choi(&choi_matrix(&channel), default_rank_tol(s.dimension), s.tolerances.psd)?;
    let tp = check_trace_preserving(&ks, KRAUS_TOL * mult);
    let unital = check_unital_kraus(&ks, KRAUS_TOL * mult);
    let report = KrausReport {
        version: VERSION.into(),
        generated_at: timestamp(),
        fingerprint: gen.fingerprint().into(),
        t1,
        t2,
        tolerances: s.tolerances,
        kraus_operators: ks.operators().iter().map(matrix_to_literal).collect(),
        trace_preserving: tp,
        unital,
        generator_unitality: check_unital(&gen, UNITAL_TOL * mult),
        choi_spectrum: ks.choi_spectrum.clone(),
        discarded_mass: ks.discarded_mass,
    };
    emit(out, &to_json(&report)?)?;
    eprintln!(
        "kraus operators: {}, trace-preserving residual {}, unital residual {}",
        ks.len(),
        fmt_f64(tp.residual),
        fmt_f64(unital.residual)
    );
    Ok(Status::from_pass(tp.pass))
}

pub struct SpinRequest {
    pub horizon: f64,
    pub lambda0: f64,
    pub samples: usize,
    pub seed: u64,
}

/// Analytic reachable interval plus `samples` random fast-control schedules.
pub fn reachable_spin(s: &Scenario, req: &SpinRequest, mult: f64, out: Option<&Path>) -> Result<Status, CliError> {
    if s.dimension != 2 {
        return Err(CliError::Usage(format!(
            "reachable-spin needs a qubit scenario, dimension is {}",
            s.dimension
        )));
    }
    let gks = s.gks_matrix()?;
    let a = SpinGks::new(&gks).map_err(|e| CliError::Usage(e.to_string()))?;
    let (lo, hi) = reachable_interval(&a, req.horizon, req.lambda0)?;
    let tol = INTERVAL_TOL * mult;

    let gen = a.generator(HamiltonianSchedule::zero(2))?;
    let start = validate_density(&diag(&[0.5 + req.lambda0, 0.5 - req.lambda0]), &s.tolerances)?;
    let free = evolve(&gen, &start, &[0.0, req.horizon], &s.evolve_options())?;
    let e = free.states[1].eigenvalues();
    let uncontrolled = 0.5 * (e[0] - e[1]);

    let mut master = seeded(req.seed);
    let mut rows = String::new();
    let mut inside_count = 0;
    for k in 0..req.samples {
        let schedule_seed = master.next_u64();
        let schedule = random_frame_schedule(req.horizon, MAX_CONTROL_SEGMENTS, &mut seeded(schedule_seed));
        let run = simulate_controlled(&a, &schedule, req.lambda0, req.horizon)?;
        let inside = run.lambda_final >= lo - tol && run.lambda_final <= hi + tol;
        inside_count += usize::from(inside);
        rows.push_str(&format!(
            "{k},{schedule_seed},{},{},{},{}\n",
            schedule.0.len(),
            fmt_f64(run.lambda_final),
            fmt_f64(run.lambda_final_full),
            inside
        ));
    }
    let mu = a.eigenvalues();
    let mut text = String::new();
    text.push_str("# majoflow reachable-spin\n");
    text.push_str(&format!("# version: {VERSION}\n"));
    text.push_str(&format!("# generated_at: {}\n", timestamp()));
    text.push_str(&format!("# seed: {}\n", req.seed));
    text.push_str(&format!("# horizon: {}\n", fmt_f64(req.horizon)));
    text.push_str(&format!("# lambda0: {}\n", fmt_f64(req.lambda0)));
    text.push_str(&format!(
        "# gks_eigenvalues: {} {} {}\n",
        fmt_f64(mu[0]),
        fmt_f64(mu[1]),
        fmt_f64(mu[2])
    ));
    text.push_str(&format!("# lower: {}\n", fmt_f64(lo)));
    text.push_str(&format!("# upper: {}\n", fmt_f64(hi)));
    text.push_str(&format!("# uncontrolled: {}\n", fmt_f64(uncontrolled)));
    text.push_str(&format!("# inside: {inside_count}/{}\n", req.samples));
    text.push_str("sample,schedule_seed,segments,lambda_T,lambda_T_full,inside\n");
    text.push_str(&rows);
    emit(out, &text)?;
    eprintln!("interval: [{}, {}]", fmt_f64(lo), fmt_f64(hi));
    eprintln!("uncontrolled: {}", fmt_f64(uncontrolled));
    eprintln!("inside: {inside_count}/{}", req.samples);
    Ok(Status::from_pass(inside_count == req.samples))
}
