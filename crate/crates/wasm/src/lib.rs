//! Browser bindings for the majoflow demo page. Every export returns a JSON string.

use majoflow::channel::{verdict_counts, verify_monotone, Verdict, VerifyOptions};
use majoflow::lindblad::{check_unital, evolve, EvolveOptions, GksMatrix, HamiltonianSchedule, LindbladGenerator, UNITAL_TOL};
use majoflow::linalg::{c, diag, identity, trace};
use majoflow::majorization::{
    birkhoff_decompose, majorizes, schur_horn_construct, schur_horn_diagonal, DoublyStochasticMatrix,
    ProbVector, MAJORIZATION_TOL,
};
use majoflow::operators::pauli;
use majoflow::random::seeded;
use majoflow::spin::{random_frame_schedule, reachable_interval, simulate_controlled, SpinGks};
use majoflow::{gell_mann_basis, purity, validate_density, von_neumann_entropy, CMatrix, Tolerances};
use serde::Serialize;
use wasm_bindgen::prelude::*;

const MAX_SEGMENTS: usize = 8;
const TRACED_SAMPLES: usize = 40;

fn to_json<T: Serialize>(value: &T) -> Result<String, String> {
    serde_json::to_string(value).map_err(|e| e.to_string())
}

#[derive(Serialize)]
pub struct Envelope {
    pub lower: f64,
    pub upper: f64,
    pub uncontrolled: f64,
    pub finals: Vec<f64>,
    pub inside: usize,
    /// `(t, λ)` traces of the first few schedules.
    pub traces: Vec<Vec<(f64, f64)>>,
}

/// Reachable gap interval and random fast-control runs for `A = diag(m1, m2, m3)`.
pub fn reachable_envelope_json(
    m1: f64,
    m2: f64,
    m3: f64,
    horizon: f64,
    lambda0: f64,
    samples: usize,
    seed: u64,
) -> Result<String, String> {
    let a = SpinGks::diagonal(m1, m2, m3).map_err(|e| e.to_string())?;
    let (lower, upper) = reachable_interval(&a, horizon, lambda0).map_err(|e| e.to_string())?;
    let mut rng = seeded(seed);
    let mut finals = Vec::with_capacity(samples);
    let mut traces = Vec::new();
    for k in 0..samples {
        let sched = random_frame_schedule(horizon, MAX_SEGMENTS, &mut rng);
        let run = simulate_controlled(&a, &sched, lambda0, horizon).map_err(|e| e.to_string())?;
        finals.push(run.lambda_final);
        if k < TRACED_SAMPLES {
            traces.push(run.trace);
        }
    }
    let identity_frame = majoflow::spin::ControlSchedule(vec![majoflow::spin::ControlSegment::Frame {
        duration: horizon,
        unitary: identity(2),
    }]);
    let uncontrolled = simulate_controlled(&a, &identity_frame, lambda0, horizon)
        .map_err(|e| e.to_string())?
        .lambda_final;
    let tol = 1e-8;
    let inside = finals
        .iter()
        .filter(|&&l| l >= lower - tol && l <= upper + tol)
        .count();
    to_json(&Envelope {
        lower,
        upper,
        uncontrolled,
        finals,
        inside,
        traces,
    })
}

#[derive(Serialize)]
pub struct QubitRun {
    pub unital: bool,
    pub unital_residual: f64,
    pub times: Vec<f64>,
    pub eigenvalues: Vec<Vec<f64>>,
    pub bloch: Vec<[f64; 3]>,
    pub entropy: Vec<f64>,
    pub purity: Vec<f64>,
    pub verdicts: Vec<Verdict>,
    pub min_slack: Vec<f64>,
    pub monotone: usize,
    pub violated: usize,
    pub inconclusive: usize,
}

/// Qubit GKS matrix in the normalized Pauli basis: `diag(gx, gy, gz)` plus
/// decay toward `|0⟩` at rate `decay`.
pub fn qubit_gks(gx: f64, gy: f64, gz: f64, decay: f64) -> CMatrix {
    let mut a = diag(&[gx, gy, gz]);
    a[(0, 0)] += c(decay, 0.0);
    a[(1, 1)] += c(decay, 0.0);
    a[(0, 1)] += c(0.0, -decay);
    a[(1, 0)] += c(0.0, decay);
    a
}

fn bloch_state(x: f64, y: f64, z: f64) -> CMatrix {
    let [sx, sy, sz] = pauli();
    (identity(2) + sx.scale(x) + sy.scale(y) + sz.scale(z)).scale(0.5)
}

#[allow(clippy::too_many_arguments)]
pub fn simulate_qubit_json(
    gx: f64,
    gy: f64,
    gz: f64,
    decay: f64,
    hx: f64,
    hz: f64,
    bloch: [f64; 3],
    t_end: f64,
    samples: usize,
) -> Result<String, String> {
    let tol = Tolerances::default();
    let err = |e: majoflow::Error| e.to_string();
    let gks = GksMatrix::new(qubit_gks(gx, gy, gz, decay), &tol).map_err(err)?;
    let [sx, _, sz] = pauli();
    let h = (sx.scale(hx) + sz.scale(hz)).scale(0.5);
    let gen = LindbladGenerator::new(gell_mann_basis(2).map_err(err)?, gks, HamiltonianSchedule::Constant(h), &tol)
        .map_err(err)?;
    let rho0 = validate_density(&bloch_state(bloch[0], bloch[1], bloch[2]), &tol).map_err(err)?;
    if t_end.is_nan() || t_end <= 0.0 || samples < 2 {
        return Err("need t_end > 0 and at least 2 samples".into());
    }
    let grid: Vec<f64> = (0..samples)
        .map(|k| t_end * k as f64 / (samples - 1) as f64)
        .collect();
    let traj = evolve(&gen, &rho0, &grid, &EvolveOptions::default()).map_err(err)?;
    let certs = verify_monotone(&gen, &rho0, &grid, &VerifyOptions::default()).map_err(err)?;
    let (monotone, violated, inconclusive) = verdict_counts(&certs);
    let u = check_unital(&gen, UNITAL_TOL);
    let paulis = pauli();
    to_json(&QubitRun {
        unital: u.unital,
        unital_residual: u.residual,
        times: traj.times.clone(),
        eigenvalues: traj.states.iter().map(|s| s.clamped_eigenvalues().0).collect(),
        bloch: traj
            .states
            .iter()
            .map(|s| {
                let comp = |p: &CMatrix| trace(&(p * s.matrix())).re;
                [comp(&paulis[0]), comp(&paulis[1]), comp(&paulis[2])]
            })
            .collect(),
        entropy: traj.states.iter().map(von_neumann_entropy).collect(),
        purity: traj.states.iter().map(purity).collect(),
        verdicts: certs.iter().map(|c| c.verdict).collect(),
        min_slack: certs
            .iter()
            .map(|c| c.slack[..c.slack.len() - 1].iter().copied().fold(f64::INFINITY, f64::min))
            .collect(),
        monotone,
        violated,
        inconclusive,
    })
}

#[derive(Serialize)]
pub struct BirkhoffTerm {
    pub weight: f64,
    pub permutation: Vec<usize>,
}

#[derive(Serialize)]
pub struct MajorizationReport {
    pub y: Vec<f64>,
    pub x: Vec<f64>,
    pub holds: bool,
    pub slacks: Vec<f64>,
    /// Rotation `K` with `diag(K diag(y) Kᵀ) = x`, when `x ≺ y`.
    pub rotation: Option<Vec<Vec<f64>>>,
    pub diagonal: Option<Vec<f64>>,
    /// `D_ij = K_ij²`, so that `x = D y`.
    pub doubly_stochastic: Option<Vec<Vec<f64>>>,
    pub birkhoff: Option<Vec<BirkhoffTerm>>,
}

fn normalized(v: &[f64], name: &str) -> Result<ProbVector, String> {
    let total: f64 = v.iter().sum();
    if v.is_empty() || v.iter().any(|x| !x.is_finite() || *x < 0.0) || total.is_nan() || total <= 0.0 {
        return Err(format!("{name} must be a nonempty list of nonnegative numbers"));
    }
    ProbVector::new(v.iter().map(|x| x / total).collect()).map_err(|e| e.to_string())
}

fn rows(m: &majoflow::RMatrix) -> Vec<Vec<f64>> {
    m.row_iter().map(|r| r.iter().copied().collect()).collect()
}

/// Tests `x ≺ y` after normalizing both to unit sum; when it holds, builds the
/// Schur-Horn rotation and the Birkhoff decomposition of its orthostochastic matrix.
pub fn majorization_json(y: &[f64], x: &[f64]) -> Result<String, String> {
    let y = normalized(y, "y")?;
    let x = normalized(x, "x")?;
    let check = majorizes(&y, &x, MAJORIZATION_TOL).map_err(|e| e.to_string())?;
    let mut report = MajorizationReport {
        y: y.as_slice().to_vec(),
        x: x.as_slice().to_vec(),
        holds: check.holds,
        slacks: check.slacks.clone(),
        rotation: None,
        diagonal: None,
        doubly_stochastic: None,
        birkhoff: None,
    };
    if check.holds {
        let k = schur_horn_construct(&x, &y).map_err(|e| e.to_string())?;
        let diagonal = schur_horn_diagonal(&y, &k).map_err(|e| e.to_string())?;
        let d = k.map(|v| v * v);
        let dec = birkhoff_decompose(&DoublyStochasticMatrix::new(d.clone(), 1e-9).map_err(|e| e.to_string())?)
            .map_err(|e| e.to_string())?;
        report.rotation = Some(rows(&k));
        report.diagonal = Some(diagonal.as_slice().to_vec());
        report.doubly_stochastic = Some(rows(&d));
        report.birkhoff = Some(
            dec.terms
                .into_iter()
                .map(|(weight, p)| BirkhoffTerm {
                    weight,
                    permutation: p.0,
                })
                .collect(),
        );
    }
    to_json(&report)
}

#[wasm_bindgen(js_name = reachableEnvelope)]
pub fn reachable_envelope(
    m1: f64,
    m2: f64,
    m3: f64,
    horizon: f64,
    lambda0: f64,
    samples: u32,
    seed: u32,
) -> Result<String, JsError> {
    reachable_envelope_json(m1, m2, m3, horizon, lambda0, samples as usize, u64::from(seed))
        .map_err(|e| JsError::new(&e))
}

#[allow(clippy::too_many_arguments)]
#[wasm_bindgen(js_name = simulateQubit)]
pub fn simulate_qubit(
    gx: f64,
    gy: f64,
    gz: f64,
    decay: f64,
    hx: f64,
    hz: f64,
    x: f64,
    y: f64,
    z: f64,
    t_end: f64,
    samples: u32,
) -> Result<String, JsError> {
    simulate_qubit_json(gx, gy, gz, decay, hx, hz, [x, y, z], t_end, samples as usize)
        .map_err(|e| JsError::new(&e))
}

#[wasm_bindgen(js_name = checkMajorization)]
pub fn check_majorization(y: Vec<f64>, x: Vec<f64>) -> Result<String, JsError> {
    majorization_json(&y, &x).map_err(|e| JsError::new(&e))
}
