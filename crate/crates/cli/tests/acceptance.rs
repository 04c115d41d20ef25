//! Acceptance suite. Runs without the libtest harness and prints one line per criterion.

use std::process::{Command, ExitCode, Stdio};
use std::time::Instant;

use majoflow::channel::{
    certify, check_unital_kraus, interval_channels, KrausSet, MonotoneCertificate, Verdict, VerifyOptions,
};
use majoflow::lindblad::{
    check_unital, evolve, EvolveOptions, GksMatrix, HamiltonianSchedule, LindbladGenerator, UNITAL_TOL,
};
use majoflow::linalg::{diag, identity, max_abs};
use majoflow::majorization::{
    apply_doubly_stochastic, birkhoff_decompose, schur_horn_construct, schur_horn_diagonal,
    DoublyStochasticMatrix, ProbVector,
};
use majoflow::random::{
    haar_unitary, random_density, random_hermitian, random_nonunital_gks, random_permutation_mixture,
    random_simplex, random_sinkhorn, random_unital_gks, seeded, SeededRng,
};
use majoflow::spin::{random_frame_schedule, reachable_interval, simulate_controlled, SpinGks};
use majoflow::{gell_mann_basis, purity, validate_density, von_neumann_entropy, DensityMatrix, Tolerances};
use majoflow_cli::scenario::matrix_to_literal;
use rand::Rng;
use serde_json::json;

const GENERATORS_PER_KIND: usize = 100;
const RANDOM_STATES: usize = 20;
const GRID_POINTS: usize = 50;
const HORIZON: f64 = 2.0;
const KRAUS_PROBES: usize = 100;

struct Outcome {
    pass: bool,
    detail: String,
}

impl Outcome {
    fn new(pass: bool, detail: String) -> Self {
        Self { pass, detail }
    }
}

fn grid() -> Vec<f64> {
    let last = (GRID_POINTS - 1) as f64;
    (0..GRID_POINTS).map(|k| HORIZON * k as f64 / last).collect()
}

fn initial_states(n: usize, rng: &mut SeededRng) -> Vec<DensityMatrix> {
    let mut states = vec![DensityMatrix::maximally_mixed(n).unwrap()];
    for k in 0..RANDOM_STATES {
        if k % 5 == 4 {
            let u = haar_unitary(n, rng);
            let psi: Vec<_> = u.column(0).iter().copied().collect();
            states.push(DensityMatrix::pure(&psi).unwrap());
        } else {
            states.push(random_density(n, rng));
        }
    }
    states
}

#[derive(Default)]
struct SweepStats {
    unital_generators: usize,
    nonunital_generators: usize,
    runs: usize,
    certificates: usize,
    // criterion 1
    unital_construction_failures: usize,
    nonunital_detected_as_unital: usize,
    unital_non_monotone: usize,
    nonunital_without_violation: usize,
    // criterion 2
    unital_not_doubly_stochastic: usize,
    tp_sum_failures: usize,
    max_unital_line_sum_error: f64,
    max_tp_sum_error: f64,
    nonunital_without_sum_deviation: usize,
    // criterion 4
    max_kraus_error: f64,
    unitality_disagreements: usize,
    // criterion 6
    functional_violations: usize,
    worst_entropy_drop: f64,
    worst_purity_rise: f64,
    // criterion 7
    max_identity_drift: f64,
}

fn line_sum_error(sums: &[f64]) -> f64 {
    sums.iter().map(|s| (s - 1.0).abs()).fold(0.0, f64::max)
}

fn kraus_error(ks: &KrausSet, ch: &majoflow::channel::SuperOperator, n: usize, rng: &mut SeededRng) -> f64 {
    (0..KRAUS_PROBES)
        .map(|_| {
            let rho = random_density(n, rng);
            max_abs(&(ks.apply(rho.matrix()) - ch.apply(rho.matrix())))
        })
        .fold(0.0, f64::max)
}

fn sweep_generator(
    gen: &LindbladGenerator,
    unital: bool,
    rng: &mut SeededRng,
    stats: &mut SweepStats,
) {
    let n = gen.dim();
    let t = grid();
    let opts = VerifyOptions::default();
    let channels = interval_channels(gen, &t, &opts).expect("interval channels");

    let u = check_unital(gen, UNITAL_TOL);
    if unital && !u.unital {
        stats.unital_construction_failures += 1;
    }
    if !unital && u.unital {
        stats.nonunital_detected_as_unital += 1;
    }

    let full = majoflow::channel::channel_from_generator(gen, 0.0, HORIZON).unwrap();
    let full_kraus = majoflow::channel::kraus_from_choi(
        &majoflow::channel::choi_matrix(&full),
        majoflow::channel::default_rank_tol(n),
        Tolerances::default().psd,
    )
    .unwrap();
    stats.max_kraus_error = stats.max_kraus_error.max(kraus_error(&full_kraus, &full, n, rng));
    let first = &channels[0];
    stats.max_kraus_error = stats
        .max_kraus_error
        .max(kraus_error(&first.kraus, &first.channel, n, rng));
    if check_unital_kraus(&full_kraus, 1e-8).pass != u.unital {
        stats.unitality_disagreements += 1;
    }

    let mut sum_deviation_seen = false;
    for (k, rho0) in initial_states(n, rng).iter().enumerate() {
        let traj = evolve(gen, rho0, &t, &EvolveOptions::default()).expect("evolve");
        let certs: Vec<MonotoneCertificate> = certify(&channels, &traj, &opts).expect("certify");
        stats.runs += 1;
        stats.certificates += certs.len();
        for c in &certs {
            // spectrum2 = D spectrum1, so trace preservation fixes the column sums
            let tp_err = line_sum_error(&c.column_sums);
            let other_err = line_sum_error(&c.row_sums);
            stats.max_tp_sum_error = stats.max_tp_sum_error.max(tp_err);
            if tp_err > 1e-8 {
                stats.tp_sum_failures += 1;
            }
            if unital {
                stats.max_unital_line_sum_error = stats.max_unital_line_sum_error.max(other_err);
                let nonneg = c.d.iter().flatten().all(|&v| v >= -1e-12);
                if other_err > 1e-8 || !nonneg {
                    stats.unital_not_doubly_stochastic += 1;
                }
            } else if other_err > 1e-6 {
                sum_deviation_seen = true;
            }
        }
        if unital {
            if certs.iter().any(|c| c.verdict != Verdict::Monotone) {
                stats.unital_non_monotone += 1;
            }
            for w in traj.states.windows(2) {
                let ds = von_neumann_entropy(&w[1]) - von_neumann_entropy(&w[0]);
                let dp = purity(&w[1]) - purity(&w[0]);
                stats.worst_entropy_drop = stats.worst_entropy_drop.max(-ds);
                stats.worst_purity_rise = stats.worst_purity_rise.max(dp);
                if ds < -1e-8 || dp > 1e-8 {
                    stats.functional_violations += 1;
                }
            }
            if k == 0 {
                let mixed = identity(n).scale(1.0 / n as f64);
                for rho in &traj.states {
                    stats.max_identity_drift = stats.max_identity_drift.max(max_abs(&(rho.matrix() - &mixed)));
                }
            }
        } else if k == 0 && !certs.iter().any(|c| c.verdict == Verdict::Violated) {
            stats.nonunital_without_violation += 1;
        }
    }
    if !unital && !sum_deviation_seen {
        stats.nonunital_without_sum_deviation += 1;
    }
    if unital {
        stats.unital_generators += 1;
    } else {
        stats.nonunital_generators += 1;
    }
}

fn random_generator(n: usize, unital: bool, rng: &mut SeededRng) -> LindbladGenerator {
    let basis = gell_mann_basis(n).unwrap();
    let gks = if unital {
        random_unital_gks(&basis, rng)
    } else {
        random_nonunital_gks(&basis, rng)
    };
    let h = random_hermitian(n, rng);
    LindbladGenerator::new(basis, gks, HamiltonianSchedule::Constant(h), &Tolerances::default()).unwrap()
}

fn sweep() -> SweepStats {
    let mut stats = SweepStats::default();
    let mut rng = seeded(20_240_601);
    for unital in [true, false] {
        for k in 0..GENERATORS_PER_KIND {
            let n = if k % 2 == 0 { 2 } else { 3 };
            let gen = random_generator(n, unital, &mut rng);
            sweep_generator(&gen, unital, &mut rng, &mut stats);
        }
    }
    stats
}

fn criterion_1(s: &SweepStats) -> Outcome {
    let pass = s.unital_generators == GENERATORS_PER_KIND
        && s.nonunital_generators == GENERATORS_PER_KIND
        && s.unital_construction_failures == 0
        && s.nonunital_detected_as_unital == 0
        && s.unital_non_monotone == 0
        && s.nonunital_without_violation == 0;
    Outcome::new(
        pass,
        format!(
            "{} unital + {} non-unital generators, {} runs, {} certificates; unital runs not monotone: {}; non-unital runs from I/N without a violation: {}; misclassified generators: {}",
            s.unital_generators,
            s.nonunital_generators,
            s.runs,
            s.certificates,
            s.unital_non_monotone,
            s.nonunital_without_violation,
            s.unital_construction_failures + s.nonunital_detected_as_unital
        ),
    )
}

fn criterion_2(s: &SweepStats) -> Outcome {
    let pass = s.unital_not_doubly_stochastic == 0
        && s.tp_sum_failures == 0
        && s.nonunital_without_sum_deviation == 0;
    Outcome::new(
        pass,
        format!(
            "unital line-sum error max {:.2e}; trace-preserving sums error max {:.2e}; non-unital generators with no sum deviation > 1e-6: {}",
            s.max_unital_line_sum_error, s.max_tp_sum_error, s.nonunital_without_sum_deviation
        ),
    )
}

fn criterion_3() -> Outcome {
    let mut notes = Vec::new();
    let mut pass = true;
    for gamma in [1.0, 0.37] {
        let a = SpinGks::diagonal(3.0 * gamma, 2.0 * gamma, gamma).unwrap();
        let horizon = 1.0 / gamma;
        let (lo, hi) = reachable_interval(&a, horizon, 0.5).unwrap();
        let want = (0.5 * (-5.0_f64).exp(), 0.5 * (-3.0_f64).exp());
        let endpoint_err = ((lo - want.0) / want.0).abs().max(((hi - want.1) / want.1).abs());
        let exact = if gamma == 1.0 { lo == want.0 && hi == want.1 } else { endpoint_err < 1e-14 };
        pass &= exact;

        let mut rng = seeded(7 + (gamma * 100.0) as u64);
        let mut outside = 0;
        let mut worst_gap = 0.0_f64;
        for _ in 0..500 {
            let sched = random_frame_schedule(horizon, 8, &mut rng);
            let run = simulate_controlled(&a, &sched, 0.5, horizon).unwrap();
            if run.lambda_final < lo - 1e-8 || run.lambda_final > hi + 1e-8 {
                outside += 1;
            }
            worst_gap = worst_gap.max(run.gap_discrepancy);
        }
        pass &= outside == 0;

        let gen = a.generator(HamiltonianSchedule::zero(2)).unwrap();
        let start = validate_density(&diag(&[1.0, 0.0]), &Tolerances::default()).unwrap();
        let traj = evolve(&gen, &start, &[0.0, horizon], &EvolveOptions::default()).unwrap();
        let e = traj.states[1].eigenvalues();
        let uncontrolled = 0.5 * (e[0] - e[1]);
        let free_err = (uncontrolled - lo).abs();
        pass &= free_err <= 1e-6;
        notes.push(format!(
            "gamma={gamma}: endpoints rel err {endpoint_err:.1e}, 500 schedules outside: {outside}, full-model gap discrepancy {worst_gap:.1e}, uncontrolled err {free_err:.1e}"
        ));
    }
    Outcome::new(pass, notes.join("; "))
}

fn criterion_4(s: &SweepStats) -> Outcome {
    Outcome::new(
        s.max_kraus_error <= 1e-8 && s.unitality_disagreements == 0,
        format!(
            "max reconstruction error {:.2e} over {} probes per channel; generator/Kraus unitality disagreements: {}",
            s.max_kraus_error, KRAUS_PROBES, s.unitality_disagreements
        ),
    )
}

fn criterion_5() -> Outcome {
    let mut rng = seeded(55);
    let mut worst_recon = 0.0_f64;
    let mut too_many_terms = 0;
    for k in 0..100 {
        let n = rng.random_range(2..=6);
        let m = if k % 2 == 0 {
            random_sinkhorn(n, &mut rng)
        } else {
            let terms = rng.random_range(1..=2 * n);
            random_permutation_mixture(n, terms, &mut rng).1
        };
        let d = DoublyStochasticMatrix::new(m, 1e-9).unwrap();
        let dec = birkhoff_decompose(&d).unwrap();
        worst_recon = worst_recon.max((dec.reconstruct(n) - d.matrix()).abs().max());
        if dec.terms.len() > (n - 1) * (n - 1) + 1 {
            too_many_terms += 1;
        }
    }
    let mut worst_sh = 0.0_f64;
    for _ in 0..100 {
        let n = rng.random_range(2..=6);
        let lambda = ProbVector::new(random_simplex(n, &mut rng)).unwrap();
        let d = DoublyStochasticMatrix::new(random_sinkhorn(n, &mut rng), 1e-9).unwrap();
        let a = apply_doubly_stochastic(&d, &lambda).unwrap();
        let k = schur_horn_construct(&a, &lambda).unwrap();
        let got = schur_horn_diagonal(&lambda, &k).unwrap();
        for (x, y) in got.as_slice().iter().zip(a.as_slice()) {
            worst_sh = worst_sh.max((x - y).abs());
        }
    }
    Outcome::new(
        worst_recon <= 1e-10 && too_many_terms == 0 && worst_sh <= 1e-9,
        format!(
            "Birkhoff max reconstruction error {worst_recon:.2e}, term-bound violations {too_many_terms}; Schur-Horn max diagonal error {worst_sh:.2e}"
        ),
    )
}

fn criterion_6(s: &SweepStats) -> Outcome {
    Outcome::new(
        s.functional_violations == 0,
        format!(
            "violations {}; largest entropy drop {:.2e}, largest purity rise {:.2e}",
            s.functional_violations, s.worst_entropy_drop, s.worst_purity_rise
        ),
    )
}

fn criterion_7(s: &SweepStats) -> Outcome {
    Outcome::new(
        s.max_identity_drift <= 1e-8,
        format!("max drift from I/N {:.2e}", s.max_identity_drift),
    )
}

fn strip_timestamp(text: &str) -> String {
    text.lines()
        .filter(|l| !l.contains("generated_at"))
        .collect::<Vec<_>>()
        .join("\n")
}

fn criterion_8() -> Outcome {
    let dir = tempfile::tempdir().unwrap();
    let mut rng = seeded(88);
    let basis = gell_mann_basis(3).unwrap();
    let gks: GksMatrix = random_unital_gks(&basis, &mut rng);
    let rho0 = random_density(3, &mut rng);
    let scenario = json!({
        "dimension": 3,
        "hamiltonian": matrix_to_literal(&random_hermitian(3, &mut rng)),
        "gks": matrix_to_literal(gks.matrix()),
        "initial_state": matrix_to_literal(rho0.matrix()),
        "times": {"t_end": 1.5, "samples": 16},
        "seed": 42
    });
    let spin = json!({
        "dimension": 2,
        "gks": matrix_to_literal(&diag(&[0.9, 0.5, 0.2])),
        "lambda0": 0.4,
        "horizon": 1.0
    });
    let sp = dir.path().join("scenario.json");
    let qp = dir.path().join("spin.json");
    std::fs::write(&sp, scenario.to_string()).unwrap();
    std::fs::write(&qp, spin.to_string()).unwrap();
    let sp = sp.to_str().unwrap();
    let qp = qp.to_str().unwrap();
    let runs: [(&str, Vec<&str>); 4] = [
        ("verify", vec!["verify", "--scenario", sp, "--pairs", "all"]),
        ("simulate", vec!["simulate", "--scenario", sp, "--format", "json"]),
        ("kraus", vec!["kraus", "--scenario", sp, "--t1", "0.2", "--t2", "1.1"]),
        ("reachable-spin", vec!["reachable-spin", "--scenario", qp, "--seed", "42", "--samples", "50"]),
    ];
    let mut identical = 0;
    let mut notes = Vec::new();
    for (name, args) in &runs {
        let mut outputs = Vec::new();
        for rep in 0..2 {
            let out = dir.path().join(format!("{name}-{rep}.out"));
            let status = Command::new(env!("CARGO_BIN_EXE_majoflow"))
                .args(args)
                .arg("--out")
                .arg(&out)
                .env_remove("SOURCE_DATE_EPOCH")
                .env_remove("MAJOFLOW_TOL")
                .stderr(Stdio::null())
                .status()
                .unwrap();
            if status.code() != Some(0) {
                notes.push(format!("{name} exited with {status}"));
            }
            outputs.push(std::fs::read_to_string(&out).unwrap_or_default());
        }
        if !outputs[0].is_empty() && strip_timestamp(&outputs[0]) == strip_timestamp(&outputs[1]) {
            identical += 1;
        } else {
            notes.push(format!("{name} outputs differ"));
        }
    }
    let pass = identical == runs.len() && notes.is_empty();
    notes.insert(0, format!("{identical}/{} commands byte-identical apart from the timestamp", runs.len()));
    Outcome::new(pass, notes.join("; "))
}

fn main() -> ExitCode {
    let start = Instant::now();
    let stats = sweep();
    let results = [
        ("1 unitality decides majorization monotonicity", criterion_1(&stats)),
        ("2 doubly stochastic certificates", criterion_2(&stats)),
        ("3 single-spin reachable interval", criterion_3()),
        ("4 Kraus pipeline fidelity", criterion_4(&stats)),
        ("5 Birkhoff and Schur-Horn machinery", criterion_5()),
        ("6 entropy and purity monotone along unital flows", criterion_6(&stats)),
        ("7 identity is a steady state of unital flows", criterion_7(&stats)),
        ("8 deterministic CLI output", criterion_8()),
    ];
    println!();
    let mut failed = 0;
    for (name, outcome) in &results {
        let tag = if outcome.pass { "PASS" } else { "FAIL" };
        println!("acceptance criterion {name}: {tag} ({})", outcome.detail);
        failed += usize::from(!outcome.pass);
    }
    println!(
        "acceptance: {} passed, {failed} failed in {:.1}s",
        results.len() - failed,
        start.elapsed().as_secs_f64()
    );
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
