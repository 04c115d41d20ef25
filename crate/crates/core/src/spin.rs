//! Single-qubit dissipation: eigenvalue-gap dynamics, rate bounds from the GKS
//! spectrum, reachable gaps under fast coherent control, and pure dephasing.
//!
//! A qubit state with eigenvalues `½ ± λ`, `λ ∈ [0, ½]`, in eigenframe `U`
//! obeys `λ' = −(a'₁₁ + a'₂₂) λ` with `A' = Cᵀ A C`, where `C ∈ SO(3)` is the
//! adjoint representation of `U` in the normalized Pauli basis. With GKS
//! eigenvalues `μ₁ ≥ μ₂ ≥ μ₃` the rate lies in `[μ₂ + μ₃, μ₁ + μ₂]`.

use rand::Rng;
use serde::Serialize;

use crate::channel::{verdict_counts, verify_monotone, MonotoneCertificate, VerifyOptions};
use crate::error::{Error, Result};
use crate::lindblad::{
    apply_dissipator, evolve, EvolveOptions, GksMatrix, HamiltonianSchedule, HamiltonianSegment,
    LindbladGenerator, Trajectory,
};
use crate::linalg::{c, diag, eigvals_symmetric, max_abs, trace, unitarity_error, CMatrix, RMatrix, I};
use crate::operators::{gell_mann_basis, pauli, OperatorBasis};
use crate::random::haar_su2;
use crate::state::{DensityMatrix, Tolerances};

const SPIN_TOL: f64 = 1e-10;

/// Real symmetric PSD 3x3 GKS matrix in the `(x, y, z)` Pauli order.
#[derive(Debug, Clone, PartialEq)]
pub struct SpinGks {
    a: RMatrix,
    mu: [f64; 3],
}

impl SpinGks {
    pub fn new(gks: &GksMatrix) -> Result<Self> {
        if gks.dim() != 3 {
            return Err(Error::DimensionMismatch(format!(
                "single-spin GKS matrix must be 3x3, got {0}x{0}",
                gks.dim()
            )));
        }
        let imag = gks.imaginary_part_norm();
        if imag > SPIN_TOL {
            return Err(Error::ContractViolation(format!(
                "single-spin GKS matrix must be real symmetric (imaginary part {imag:e}); the dynamics is not unital"
            )));
        }
        Self::from_real(gks.matrix().map(|z| z.re))
    }

    pub fn from_real(a: RMatrix) -> Result<Self> {
        if a.nrows() != 3 || a.ncols() != 3 {
            return Err(Error::InvalidShape {
                expected: "3x3".into(),
                rows: a.nrows(),
                cols: a.ncols(),
            });
        }
        let asym = (&a - a.transpose()).abs().max();
        if asym > SPIN_TOL {
            return Err(Error::ContractViolation(format!(
                "single-spin GKS matrix is not symmetric (error {asym:e})"
            )));
        }
        let a = (&a + a.transpose()).scale(0.5);
        let v = eigvals_symmetric(&a);
        if v[2] < -Tolerances::default().psd {
            return Err(Error::ContractViolation(format!(
                "GKS matrix is not positive semi-definite (min eigenvalue {:e})",
                v[2]
            )));
        }
        Ok(Self {
            a,
            mu: [v[0], v[1], v[2]],
        })
    }

    pub fn diagonal(mu1: f64, mu2: f64, mu3: f64) -> Result<Self> {
        Self::from_real(RMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![mu1, mu2, mu3])))
    }

    pub fn matrix(&self) -> &RMatrix {
        &self.a
    }

    /// `μ₁ ≥ μ₂ ≥ μ₃`.
    pub fn eigenvalues(&self) -> [f64; 3] {
        self.mu
    }

    pub fn gks(&self) -> GksMatrix {
        GksMatrix::new(self.a.map(|v| c(v, 0.0)), &Tolerances::default())
            .expect("validated real symmetric PSD")
    }

    /// Qubit generator with this dissipator and the given Hamiltonian schedule.
    pub fn generator(&self, hamiltonian: HamiltonianSchedule) -> Result<LindbladGenerator> {
        LindbladGenerator::new(
            pauli_basis(),
            self.gks(),
            hamiltonian,
            &Tolerances::default(),
        )
    }
}

fn pauli_basis() -> OperatorBasis {
    gell_mann_basis(2).expect("N = 2 is valid")
}

/// `C` with `U† F_a U = Σ_g C_ag F_g` in the normalized Pauli basis.
pub fn adjoint_so3(u: &CMatrix) -> Result<RMatrix> {
    if u.nrows() != 2 || u.ncols() != 2 {
        return Err(Error::InvalidShape {
            expected: "2x2 unitary".into(),
            rows: u.nrows(),
            cols: u.ncols(),
        });
    }
    let err = unitarity_error(u);
    if err > 1e-9 {
        return Err(Error::ContractViolation(format!(
            "control is not unitary (error {err:e})"
        )));
    }
    let basis = pauli_basis();
    let f = basis.operators();
    let mut out = RMatrix::zeros(3, 3);
    for a in 0..3 {
        let rotated = u.adjoint() * &f[a] * u;
        for g in 0..3 {
            out[(a, g)] = trace(&(&f[g] * &rotated)).re;
        }
    }
    Ok(out)
}

/// Mixing rate `a'₁₁ + a'₂₂` of the eigenvalue gap in eigenframe `U`.
pub fn lambda_rate(a: &SpinGks, u: &CMatrix) -> Result<f64> {
    let cm = adjoint_so3(u)?;
    let rotated = cm.transpose() * a.matrix() * &cm;
    Ok(rotated[(0, 0)] + rotated[(1, 1)])
}

fn check_lambda0(lambda0: f64) -> Result<()> {
    if !(0.0..=0.5).contains(&lambda0) {
        return Err(Error::ContractViolation(format!(
            "lambda0 = {lambda0} must lie in [0, 1/2]"
        )));
    }
    Ok(())
}

/// `(e^{−(μ₁+μ₂)T} λ0, e^{−(μ₂+μ₃)T} λ0)`.
pub fn reachable_interval(a: &SpinGks, horizon: f64, lambda0: f64) -> Result<(f64, f64)> {
    check_lambda0(lambda0)?;
    if !(horizon >= 0.0 && horizon.is_finite()) {
        return Err(Error::ContractViolation(format!(
            "horizon {horizon} must be nonnegative"
        )));
    }
    let [m1, m2, m3] = a.mu;
    Ok((
        (-(m1 + m2) * horizon).exp() * lambda0,
        (-(m2 + m3) * horizon).exp() * lambda0,
    ))
}

/// One piece of a control schedule.
#[derive(Debug, Clone, PartialEq)]
pub enum ControlSegment {
    /// Fast control holds the eigenframe at `unitary` for `duration`.
    Frame { duration: f64, unitary: CMatrix },
    /// Finite-strength control Hamiltonian `Σ u_i H_i` for `duration`.
    Hamiltonian { duration: f64, h: CMatrix },
}

impl ControlSegment {
    pub fn duration(&self) -> f64 {
        match self {
            Self::Frame { duration, .. } | Self::Hamiltonian { duration, .. } => *duration,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct ControlSchedule(pub Vec<ControlSegment>);

impl ControlSchedule {
    pub fn total_duration(&self) -> f64 {
        self.0.iter().map(ControlSegment::duration).sum()
    }
}

/// Random frame schedule with 1..=`max_segments` Haar-random frames covering `[0, horizon]`.
pub fn random_frame_schedule<R: Rng + ?Sized>(
    horizon: f64,
    max_segments: usize,
    rng: &mut R,
) -> ControlSchedule {
    let count = rng.random_range(1..=max_segments.max(1));
    let mut cuts: Vec<f64> = (0..count - 1).map(|_| rng.random_range(0.0..horizon)).collect();
    cuts.push(0.0);
    cuts.push(horizon);
    cuts.sort_by(f64::total_cmp);
    ControlSchedule(
        cuts.windows(2)
            .filter(|w| w[1] > w[0])
            .map(|w| ControlSegment::Frame {
                duration: w[1] - w[0],
                unitary: haar_su2(rng),
            })
            .collect(),
    )
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ControlledRun {
    pub lambda_final: f64,
    /// `(t, λ(t))` samples, including segment boundaries.
    pub trace: Vec<(f64, f64)>,
    /// Final `λ` from the full 2x2 master-equation evolution.
    pub lambda_final_full: f64,
    /// Largest eigenvalue-gap difference between the two computations.
    pub gap_discrepancy: f64,
}

const SAMPLES_PER_SEGMENT: usize = 8;

/// Qubit state `U diag(½+λ, ½−λ) U†`.
fn frame_state(u: &CMatrix, lambda: f64) -> Result<DensityMatrix> {
    let m = u * diag(&[0.5 + lambda, 0.5 - lambda]) * u.adjoint();
    crate::state::validate_density(&m, &Tolerances::default().for_trajectory())
}

/// Hamiltonian cancelling the dissipative rotation of the eigenframe `U`,
/// so that `U diag(½±λ) U†` stays diagonal in that frame for every `λ`.
fn frame_holding_hamiltonian(gen: &LindbladGenerator, u: &CMatrix) -> Result<CMatrix> {
    let [_, _, sz] = pauli();
    let m = u.adjoint() * apply_dissipator(gen, &(u * sz * u.adjoint()))? * u;
    let w = I * m[(0, 1)] * 0.5;
    let h_frame = CMatrix::from_row_slice(2, 2, &[c(0.0, 0.0), w, w.conj(), c(0.0, 0.0)]);
    Ok(u * h_frame * u.adjoint())
}

fn gap_lambda(rho: &DensityMatrix) -> f64 {
    let e = rho.eigenvalues();
    0.5 * (e[0] - e[1])
}

/// Integrates the gap ODE under a frame schedule, and replays the schedule
/// through the full 2x2 master equation as an independent check.
pub fn simulate_controlled(
    a: &SpinGks,
    schedule: &ControlSchedule,
    lambda0: f64,
    horizon: f64,
) -> Result<ControlledRun> {
    check_lambda0(lambda0)?;
    if schedule.0.is_empty() || (schedule.total_duration() - horizon).abs() > 1e-9 * horizon.max(1.0) {
        return Err(Error::ContractViolation(format!(
            "schedule covers {} time units, horizon is {horizon}",
            schedule.total_duration()
        )));
    }
    let dissipative = a.generator(HamiltonianSchedule::zero(2))?;
    let mut t = 0.0;
    let mut lambda = lambda0;
    let mut lambda_full = lambda0;
    let mut trace = vec![(0.0, lambda0)];
    let mut gap_discrepancy = 0.0_f64;
    for seg in &schedule.0 {
        let ControlSegment::Frame { duration, unitary } = seg else {
            return Err(Error::ContractViolation(
                "simulate_controlled takes frame segments; use simulate_hamiltonian_control".into(),
            ));
        };
        let rate = lambda_rate(a, unitary)?;
        let hold = frame_holding_hamiltonian(&dissipative, unitary)?;
        let gen = a.generator(HamiltonianSchedule::Constant(hold))?;
        let grid: Vec<f64> = (0..=SAMPLES_PER_SEGMENT)
            .map(|k| duration * k as f64 / SAMPLES_PER_SEGMENT as f64)
            .collect();
        let start = frame_state(unitary, lambda_full)?;
        let traj = evolve(&gen, &start, &grid, &EvolveOptions::default())?;
        for (&dt, rho) in grid.iter().zip(traj.states.iter()).skip(1) {
            let l = lambda * (-rate * dt).exp();
            let full = gap_lambda(rho);
            gap_discrepancy = gap_discrepancy.max(2.0 * (l - full).abs());
            trace.push((t + dt, l));
        }
        lambda *= (-rate * duration).exp();
        lambda_full = gap_lambda(traj.states.last().expect("nonempty"));
        t += duration;
    }
    Ok(ControlledRun {
        lambda_final: lambda,
        trace,
        lambda_final_full: lambda_full,
        gap_discrepancy,
    })
}

/// Runs a finite-strength control schedule through the full master equation
/// (`H(t) = H_drift + Σ u_i H_i` per segment) and reports `λ(t)` at segment ends.
pub fn simulate_hamiltonian_control(
    a: &SpinGks,
    drift: &CMatrix,
    schedule: &ControlSchedule,
    rho0: &DensityMatrix,
) -> Result<Trajectory> {
    let mut segments = Vec::with_capacity(schedule.0.len());
    let mut grid = vec![0.0];
    for seg in &schedule.0 {
        let ControlSegment::Hamiltonian { duration, h } = seg else {
            return Err(Error::ContractViolation(
                "finite-strength mode takes Hamiltonian segments".into(),
            ));
        };
        segments.push(HamiltonianSegment {
            duration: *duration,
            h: drift + h,
        });
        grid.push(grid.last().expect("nonempty") + duration);
    }
    let gen = a.generator(HamiltonianSchedule::Piecewise(segments))?;
    evolve(&gen, rho0, &grid, &EvolveOptions::default())
}

/// Result of the transverse-relaxation example.
#[derive(Debug, Clone)]
pub struct TransverseRelaxation {
    pub trajectory: Trajectory,
    /// Predicted limit `½ I + α σz` with `α = ρ0₁₁ − ½`.
    pub alpha: f64,
    /// `max |ρ(T) − (½ I + α σz)|`.
    pub distance_to_limit: f64,
    pub converged: bool,
    pub certificates: Vec<MonotoneCertificate>,
    pub all_monotone: bool,
}

/// Distance below which the final state counts as converged.
pub const CONVERGENCE_TOL: f64 = 1e-6;

/// Qubit generator `ρ' = −i[σz, ρ] − γ [σz, [σz, ρ]]`, i.e. Lindblad dephasing
/// with GKS matrix `diag(0, 0, 4γ)`.
pub fn transverse_relaxation_generator(gamma: f64) -> Result<LindbladGenerator> {
    if gamma.is_nan() || gamma <= 0.0 {
        return Err(Error::ContractViolation(format!("gamma = {gamma} must be positive")));
    }
    let [_, _, sz] = pauli();
    SpinGks::diagonal(0.0, 0.0, 4.0 * gamma)?.generator(HamiltonianSchedule::Constant(sz))
}

/// Simulates transverse relaxation from `rho0` over `[0, horizon]` on `samples + 1` points.
pub fn transverse_relaxation_demo(
    gamma: f64,
    rho0: &DensityMatrix,
    horizon: f64,
    samples: usize,
) -> Result<TransverseRelaxation> {
    if rho0.dim() != 2 {
        return Err(Error::DimensionMismatch("transverse relaxation is a qubit example".into()));
    }
    let gen = transverse_relaxation_generator(gamma)?;
    let samples = samples.max(1);
    let grid: Vec<f64> = (0..=samples)
        .map(|k| horizon * k as f64 / samples as f64)
        .collect();
    let trajectory = evolve(&gen, rho0, &grid, &EvolveOptions::default())?;
    let alpha = rho0.matrix()[(0, 0)].re - 0.5;
    let limit = diag(&[0.5 + alpha, 0.5 - alpha]);
    let last = trajectory.states.last().expect("nonempty");
    let distance_to_limit = max_abs(&(last.matrix() - limit));
    let certificates = verify_monotone(&gen, rho0, &grid, &VerifyOptions::default())?;
    let (_, violated, inconclusive) = verdict_counts(&certificates);
    Ok(TransverseRelaxation {
        trajectory,
        alpha,
        distance_to_limit,
        converged: distance_to_limit <= CONVERGENCE_TOL,
        certificates,
        all_monotone: violated == 0 && inconclusive == 0,
    })
}
