//! Lindblad generators, the unitality test, and master-equation integration.
//!
//! The dissipator is written in a fixed traceless Hermitian basis `{F_a}`:
//!
//! `L(ρ) = Σ_ab a_ab (F_a ρ F_b† − ½ {F_b† F_a, ρ})`
//!
//! with a Hermitian PSD coefficient (GKS) matrix `A = (a_ab)`. GKS matrices are
//! basis dependent; see [`crate::operators`] for the ordering convention.

use std::collections::HashMap;

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::linalg::{
    anticommutator, commutator, eig_hermitian_unchecked, expm, hermitian_part, hermiticity_error,
    identity, kron, max_abs, unvec, vec, CMatrix, I,
};
use crate::operators::OperatorBasis;
use crate::state::{validate_density, DensityMatrix, Tolerances};

/// GKS matrices failing PSD by more than this are rejected outright.
pub const GKS_PSD_HARD_LIMIT: f64 = 1e-6;
/// Default tolerance for `check_unital`.
pub const UNITAL_TOL: f64 = 1e-10;
/// Agreement demanded between the two integrators when cross-checking.
pub const CROSS_CHECK_TOL: f64 = 1e-6;

/// Hermitian PSD dissipator coefficients, `(N²−1) x (N²−1)`.
#[derive(Debug, Clone, PartialEq)]
pub struct GksMatrix {
    matrix: CMatrix,
    min_eigenvalue: f64,
}

impl GksMatrix {
    pub fn new(matrix: CMatrix, tol: &Tolerances) -> Result<Self> {
        if !matrix.is_square() {
            return Err(Error::InvalidShape {
                expected: "square GKS matrix".into(),
                rows: matrix.nrows(),
                cols: matrix.ncols(),
            });
        }
        let herm = hermiticity_error(&matrix);
        if herm > tol.herm * max_abs(&matrix).max(1.0) {
            return Err(Error::ContractViolation(format!(
                "GKS matrix is not Hermitian (max |A - A^dag| = {herm:e})"
            )));
        }
        let matrix = hermitian_part(&matrix);
        let min_eigenvalue = *eig_hermitian_unchecked(&matrix)
            .eigenvalues
            .last()
            .expect("nonempty");
        if min_eigenvalue < -GKS_PSD_HARD_LIMIT {
            return Err(Error::ContractViolation(format!(
                "GKS matrix is not positive semi-definite (min eigenvalue {min_eigenvalue:e})"
            )));
        }
        Ok(Self {
            matrix,
            min_eigenvalue,
        })
    }

    pub fn zeros(dim: usize) -> Self {
        Self {
            matrix: CMatrix::zeros(dim, dim),
            min_eigenvalue: 0.0,
        }
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.min_eigenvalue
    }

    /// Diagnostic text when PSD fails by more than `tol_psd` but within the hard limit.
    pub fn psd_warning(&self, tol: &Tolerances) -> Option<String> {
        (self.min_eigenvalue < -tol.psd).then(|| {
            format!(
                "GKS matrix is not PSD (min eigenvalue {:e}); dynamics may not be completely positive",
                self.min_eigenvalue
            )
        })
    }

    /// `max |A − conj(A)|`, i.e. how far `A` is from being real.
    pub fn imaginary_part_norm(&self) -> f64 {
        self.matrix.iter().fold(0.0_f64, |acc, z| acc.max(z.im.abs()))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct HamiltonianSegment {
    pub duration: f64,
    pub h: CMatrix,
}

/// Piecewise-constant Hamiltonian. The final segment persists past its nominal end.
#[derive(Debug, Clone, PartialEq)]
pub enum HamiltonianSchedule {
    Constant(CMatrix),
    Piecewise(Vec<HamiltonianSegment>),
}

impl HamiltonianSchedule {
    pub fn zero(n: usize) -> Self {
        Self::Constant(CMatrix::zeros(n, n))
    }

    pub fn num_segments(&self) -> usize {
        match self {
            Self::Constant(_) => 1,
            Self::Piecewise(s) => s.len(),
        }
    }

    pub fn hamiltonian(&self, segment: usize) -> Option<&CMatrix> {
        match self {
            Self::Constant(h) if segment == 0 => Some(h),
            Self::Constant(_) => None,
            Self::Piecewise(s) => s.get(segment).map(|s| &s.h),
        }
    }

    /// Shortest segment duration; `None` for a constant Hamiltonian.
    pub fn min_duration(&self) -> Option<f64> {
        match self {
            Self::Constant(_) => None,
            Self::Piecewise(s) => s.iter().map(|s| s.duration).reduce(f64::min),
        }
    }

    pub fn validate(&self, n: usize, tol: &Tolerances) -> Result<()> {
        let check = |h: &CMatrix| -> Result<()> {
            if h.nrows() != n || h.ncols() != n {
                return Err(Error::DimensionMismatch(format!(
                    "Hamiltonian is {}x{}, system dimension {n}",
                    h.nrows(),
                    h.ncols()
                )));
            }
            let herm = hermiticity_error(h);
            if herm > tol.herm * max_abs(h).max(1.0) {
                return Err(Error::ContractViolation(format!(
                    "Hamiltonian is not Hermitian (error {herm:e})"
                )));
            }
            Ok(())
        };
        match self {
            Self::Constant(h) => check(h),
            Self::Piecewise(segments) => {
                if segments.is_empty() {
                    return Err(Error::ContractViolation("empty Hamiltonian schedule".into()));
                }
                for s in segments {
                    if !(s.duration > 0.0 && s.duration.is_finite()) {
                        return Err(Error::ContractViolation(format!(
                            "segment duration {} is not positive",
                            s.duration
                        )));
                    }
                    check(&s.h)?;
                }
                Ok(())
            }
        }
    }

    /// Splits `[t1, t2]` into `(segment, duration)` pieces in time order.
    pub fn pieces(&self, t1: f64, t2: f64) -> Vec<(usize, f64)> {
        match self {
            Self::Constant(_) => vec![(0, t2 - t1)],
            Self::Piecewise(segments) => {
                let mut out = Vec::new();
                let mut start = 0.0;
                let last = segments.len() - 1;
                for (k, s) in segments.iter().enumerate() {
                    let end = if k == last { f64::INFINITY } else { start + s.duration };
                    let lo = t1.max(start);
                    let hi = t2.min(end);
                    if hi > lo {
                        out.push((k, hi - lo));
                    }
                    start = end;
                    if start >= t2 {
                        break;
                    }
                }
                out
            }
        }
    }
}

/// Hamiltonian schedule plus dissipator.
#[derive(Debug, Clone)]
pub struct LindbladGenerator {
    basis: OperatorBasis,
    gks: GksMatrix,
    hamiltonian: HamiltonianSchedule,
    /// `Σ_ab a_ab F_b† F_a`
    decay: CMatrix,
    /// Dissipator in Liouville space.
    dissipator_super: CMatrix,
    fingerprint: String,
}

impl LindbladGenerator {
    pub fn new(
        basis: OperatorBasis,
        gks: GksMatrix,
        hamiltonian: HamiltonianSchedule,
        tol: &Tolerances,
    ) -> Result<Self> {
        let n = basis.dim();
        if gks.dim() != basis.len() {
            return Err(Error::DimensionMismatch(format!(
                "GKS matrix is {0}x{0}, basis has {1} operators",
                gks.dim(),
                basis.len()
            )));
        }
        hamiltonian.validate(n, tol)?;
        let ops = basis.operators();
        let a = gks.matrix();
        let mut decay = CMatrix::zeros(n, n);
        let mut dissipator_super = CMatrix::zeros(n * n, n * n);
        for (al, fa) in ops.iter().enumerate() {
            for (be, fb) in ops.iter().enumerate() {
                let w = a[(al, be)];
                if w.norm() == 0.0 {
                    continue;
                }
                decay += fb.adjoint() * fa * w;
                dissipator_super += kron(&fb.map(|z| z.conj()), fa) * w;
            }
        }
        let id = identity(n);
        dissipator_super -= (kron(&id, &decay) + kron(&decay.transpose(), &id)).scale(0.5);
        let fingerprint = fingerprint(&basis, &gks, &hamiltonian);
        Ok(Self {
            basis,
            gks,
            hamiltonian,
            decay,
            dissipator_super,
            fingerprint,
        })
    }

    pub fn dim(&self) -> usize {
        self.basis.dim()
    }

    pub fn basis(&self) -> &OperatorBasis {
        &self.basis
    }

    pub fn gks(&self) -> &GksMatrix {
        &self.gks
    }

    pub fn hamiltonian(&self) -> &HamiltonianSchedule {
        &self.hamiltonian
    }

    /// Short content hash identifying the generator.
    pub fn fingerprint(&self) -> &str {
        &self.fingerprint
    }

    /// `−i[H_k, ρ] + L(ρ)` for segment `k`.
    pub fn apply(&self, segment: usize, rho: &CMatrix) -> CMatrix {
        let h = self
            .hamiltonian
            .hamiltonian(segment)
            .expect("segment index in range");
        commutator(h, rho) * (-I) + self.dissipate(rho)
    }

    fn dissipate(&self, rho: &CMatrix) -> CMatrix {
        let ops = self.basis.operators();
        let a = self.gks.matrix();
        let n = self.dim();
        let mut out = CMatrix::zeros(n, n);
        for (al, fa) in ops.iter().enumerate() {
            let fa_rho = fa * rho;
            for (be, fb) in ops.iter().enumerate() {
                let w = a[(al, be)];
                if w.norm() == 0.0 {
                    continue;
                }
                out += &fa_rho * fb.adjoint() * w;
            }
        }
        out - anticommutator(&self.decay, rho).scale(0.5)
    }
}

fn fingerprint(basis: &OperatorBasis, gks: &GksMatrix, h: &HamiltonianSchedule) -> String {
    let mut hasher = Sha256::new();
    let mut feed = |m: &CMatrix| {
        for z in m.iter() {
            hasher.update(z.re.to_le_bytes());
            hasher.update(z.im.to_le_bytes());
        }
    };
    for f in basis.operators() {
        feed(f);
    }
    feed(gks.matrix());
    match h {
        HamiltonianSchedule::Constant(h) => feed(h),
        HamiltonianSchedule::Piecewise(segs) => {
            for s in segs {
                feed(&CMatrix::from_element(1, 1, s.duration.into()));
                feed(&s.h);
            }
        }
    }
    hasher
        .finalize()
        .iter()
        .take(8)
        .map(|b| format!("{b:02x}"))
        .collect()
}

/// `L(ρ)` by the defining double sum.
pub fn apply_dissipator(gen: &LindbladGenerator, rho: &CMatrix) -> Result<CMatrix> {
    let n = gen.dim();
    if rho.nrows() != n || rho.ncols() != n {
        return Err(Error::DimensionMismatch(format!(
            "state is {}x{}, generator dimension {n}",
            rho.nrows(),
            rho.ncols()
        )));
    }
    Ok(gen.dissipate(rho))
}

/// Outcome of the unitality test `L(I) = 0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct UnitalityCheck {
    pub unital: bool,
    /// `max |Σ_ab a_ab [F_a, F_b†]|`
    pub residual: f64,
    /// `max |L(I)|` evaluated through the dissipator.
    pub residual_direct: f64,
}

/// Decides whether the maximally mixed state is stationary.
pub fn check_unital(gen: &LindbladGenerator, tol: f64) -> UnitalityCheck {
    let n = gen.dim();
    let ops = gen.basis.operators();
    let a = gen.gks.matrix();
    let mut r = CMatrix::zeros(n, n);
    for (al, fa) in ops.iter().enumerate() {
        for (be, fb) in ops.iter().enumerate() {
            r += commutator(fa, &fb.adjoint()) * a[(al, be)];
        }
    }
    let residual = max_abs(&r);
    let residual_direct = max_abs(&gen.dissipate(&identity(n)));
    UnitalityCheck {
        unital: residual <= tol && residual_direct <= tol,
        residual,
        residual_direct,
    }
}

/// Liouville-space generator for one Hamiltonian segment, column-stacking convention.
pub fn liouville_matrix(gen: &LindbladGenerator, segment: usize) -> Result<CMatrix> {
    let h = gen.hamiltonian.hamiltonian(segment).ok_or_else(|| {
        Error::ContractViolation(format!(
            "segment {segment} out of range ({} segments)",
            gen.hamiltonian.num_segments()
        ))
    })?;
    let id = identity(gen.dim());
    Ok((kron(&id, h) - kron(&h.transpose(), &id)) * (-I) + &gen.dissipator_super)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum Method {
    /// Exact exponential of the Liouville matrix on every constant piece.
    ExactExpm,
    /// Classical fourth-order Runge-Kutta; `None` picks the default step.
    Rk4 { step: Option<f64> },
}

impl Method {
    pub fn name(&self) -> &'static str {
        match self {
            Method::ExactExpm => "exact-expm",
            Method::Rk4 { .. } => "rk4",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EvolveOptions {
    pub method: Method,
    /// Also run the other integrator and record the discrepancy.
    pub cross_check: bool,
    pub tol: Tolerances,
}

impl Default for EvolveOptions {
    fn default() -> Self {
        Self {
            method: Method::ExactExpm,
            cross_check: false,
            tol: Tolerances::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TrajectoryMetadata {
    pub integrator: String,
    pub step: Option<f64>,
    pub fingerprint: String,
    /// Largest negative eigenvalue clamped to zero in post-processing.
    pub max_clamp: f64,
    pub cross_check_discrepancy: Option<f64>,
    pub warnings: Vec<String>,
}

#[derive(Debug, Clone)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<DensityMatrix>,
    pub metadata: TrajectoryMetadata,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }
}

fn check_grid(t_grid: &[f64]) -> Result<()> {
    if t_grid.is_empty() || t_grid[0] != 0.0 {
        return Err(Error::ContractViolation("time grid must start at 0".into()));
    }
    if t_grid.iter().any(|t| !t.is_finite()) || t_grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::ContractViolation(
            "time grid must be finite and strictly increasing".into(),
        ));
    }
    Ok(())
}

/// Default RK4 step: a thousandth of the shortest segment (or horizon),
/// capped so that `‖𝓛‖₁ h ≤ 0.1`.
pub fn default_rk4_step(gen: &LindbladGenerator, horizon: f64) -> f64 {
    let base = gen
        .hamiltonian
        .min_duration()
        .map_or(horizon, |d| d.min(horizon))
        / 1000.0;
    let norm = (0..gen.hamiltonian.num_segments())
        .map(|k| {
            let l = liouville_matrix(gen, k).expect("segment in range");
            l.column_iter()
                .map(|col| col.iter().map(|z| z.norm()).sum::<f64>())
                .fold(0.0, f64::max)
        })
        .fold(0.0, f64::max);
    if norm > 0.0 {
        base.min(0.1 / norm)
    } else {
        base
    }
}

fn rk4_piece(gen: &LindbladGenerator, segment: usize, rho: &CMatrix, len: f64, h: f64) -> CMatrix {
    let steps = (len / h).ceil().max(1.0) as usize;
    let dt = len / steps as f64;
    let mut x = rho.clone();
    for _ in 0..steps {
        let k1 = gen.apply(segment, &x);
        let k2 = gen.apply(segment, &(&x + k1.scale(0.5 * dt)));
        let k3 = gen.apply(segment, &(&x + k2.scale(0.5 * dt)));
        let k4 = gen.apply(segment, &(&x + k3.scale(dt)));
        x += (k1 + k2.scale(2.0) + k3.scale(2.0) + k4).scale(dt / 6.0);
    }
    x
}

fn integrate(
    gen: &LindbladGenerator,
    rho0: &DensityMatrix,
    t_grid: &[f64],
    method: Method,
) -> (Vec<CMatrix>, Option<f64>) {
    let n = gen.dim();
    let mut states = vec![rho0.matrix().clone()];
    let horizon = *t_grid.last().expect("nonempty grid");
    let step = match method {
        Method::ExactExpm => None,
        Method::Rk4 { step } => Some(step.unwrap_or_else(|| default_rk4_step(gen, horizon))),
    };
    let mut propagators: HashMap<(usize, u64), CMatrix> = HashMap::new();
    let mut current = rho0.matrix().clone();
    for w in t_grid.windows(2) {
        for (seg, len) in gen.hamiltonian.pieces(w[0], w[1]) {
            current = match step {
                None => {
                    let prop = propagators.entry((seg, len.to_bits())).or_insert_with(|| {
                        let l = liouville_matrix(gen, seg).expect("segment in range");
                        expm(&l.scale(len))
                    });
                    unvec(&(&*prop * vec(&current)), n)
                }
                Some(h) => rk4_piece(gen, seg, &current, len, h),
            };
        }
        states.push(current.clone());
    }
    (states, step)
}

/// Samples the solution of the master equation on `t_grid` (which must start at 0).
pub fn evolve(
    gen: &LindbladGenerator,
    rho0: &DensityMatrix,
    t_grid: &[f64],
    opts: &EvolveOptions,
) -> Result<Trajectory> {
    check_grid(t_grid)?;
    if rho0.dim() != gen.dim() {
        return Err(Error::DimensionMismatch(format!(
            "initial state dimension {} vs generator {}",
            rho0.dim(),
            gen.dim()
        )));
    }
    let (raw, step) = integrate(gen, rho0, t_grid, opts.method);
    let traj_tol = opts.tol.for_trajectory();
    let mut states = Vec::with_capacity(raw.len());
    let mut max_clamp = 0.0_f64;
    for (t, m) in t_grid.iter().zip(raw.iter()) {
        let rho = validate_density(m, &traj_tol).map_err(|e| Error::IntegrationDiverged {
            time: *t,
            reason: e.to_string(),
        })?;
        max_clamp = max_clamp.max(rho.clamped_eigenvalues().1);
        states.push(rho);
    }
    let mut warnings: Vec<String> = gen.gks.psd_warning(&opts.tol).into_iter().collect();
    let mut cross_check_discrepancy = None;
    if opts.cross_check {
        let other = match opts.method {
            Method::ExactExpm => Method::Rk4 { step: None },
            Method::Rk4 { .. } => Method::ExactExpm,
        };
        let (alt, _) = integrate(gen, rho0, t_grid, other);
        let disc = raw
            .iter()
            .zip(alt.iter())
            .map(|(a, b)| max_abs(&(a - b)))
            .fold(0.0, f64::max);
        if disc > CROSS_CHECK_TOL {
            warnings.push(format!(
                "{} and {} disagree by {disc:e}",
                opts.method.name(),
                other.name()
            ));
        }
        cross_check_discrepancy = Some(disc);
    }
    Ok(Trajectory {
        times: t_grid.to_vec(),
        states,
        metadata: TrajectoryMetadata {
            integrator: opts.method.name().to_string(),
            step,
            fingerprint: gen.fingerprint.clone(),
            max_clamp,
            cross_check_discrepancy,
            warnings,
        },
    })
}

/// Descending eigenvalues of every sampled state, negatives clamped to zero.
pub fn eigenvalue_flow(traj: &Trajectory) -> Vec<(f64, Vec<f64>)> {
    traj.times
        .iter()
        .zip(traj.states.iter())
        .map(|(&t, rho)| (t, rho.clamped_eigenvalues().0))
        .collect()
}
