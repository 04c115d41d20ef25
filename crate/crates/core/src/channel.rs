//! Finite-time channels of a Lindblad generator, their Kraus form, and
//! majorization certificates built from them.
//!
//! For a channel `Ψ` with Kraus operators `K_i` mapping `ρ1 = U1 Λ1 U1†` to
//! `ρ2 = U2 Λ2 U2†`, the matrices `V_i = U2† K_i U1` satisfy
//! `Λ2 = Σ_i V_i Λ1 V_i†`, so the spectra are linked by `λ2 = D λ1` with
//! `D_ab = Σ_i |(V_i)_ab|²`. Trace preservation makes every column of `D` sum
//! to one; unitality makes every row sum to one. A doubly stochastic `D`
//! certifies `λ2 ≺ λ1`.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::lindblad::{evolve, liouville_matrix, EvolveOptions, LindbladGenerator, Trajectory};
use crate::linalg::{
    eig_hermitian_unchecked, expm, hermitian_part, hermiticity_error, identity, max_abs, unvec,
    vec, CMatrix, RMatrix,
};
use crate::majorization::{line_sums, partial_sum_slacks};
use crate::state::{entropy_of_spectrum, purity, DensityMatrix, Tolerances};

/// Liouville-space matrix of a linear map on `N x N` matrices (column stacking).
#[derive(Debug, Clone, PartialEq)]
pub struct SuperOperator {
    dim: usize,
    matrix: CMatrix,
}

impl SuperOperator {
    pub fn new(dim: usize, matrix: CMatrix) -> Result<Self> {
        if matrix.nrows() != dim * dim || matrix.ncols() != dim * dim {
            return Err(Error::InvalidShape {
                expected: format!("{0}x{0}", dim * dim),
                rows: matrix.nrows(),
                cols: matrix.ncols(),
            });
        }
        Ok(Self { dim, matrix })
    }

    pub fn identity(dim: usize) -> Self {
        Self {
            dim,
            matrix: identity(dim * dim),
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn apply(&self, x: &CMatrix) -> CMatrix {
        unvec(&(&self.matrix * vec(x)), self.dim)
    }

    /// `other ∘ self`: apply `self` first.
    pub fn then(&self, other: &SuperOperator) -> SuperOperator {
        SuperOperator {
            dim: self.dim,
            matrix: &other.matrix * &self.matrix,
        }
    }
}

/// Propagator from `t1` to `t2`: ordered product of per-segment exponentials.
pub fn channel_from_generator(gen: &LindbladGenerator, t1: f64, t2: f64) -> Result<SuperOperator> {
    if !(t1 >= 0.0 && t2 > t1 && t2.is_finite()) {
        return Err(Error::Interval { t1, t2 });
    }
    let mut out = SuperOperator::identity(gen.dim());
    for (seg, len) in gen.hamiltonian().pieces(t1, t2) {
        let step = expm(&liouville_matrix(gen, seg)?.scale(len));
        out.matrix = step * out.matrix;
    }
    Ok(out)
}

/// `C = Σ_jk Ψ(|j⟩⟨k|) ⊗ |j⟩⟨k|`, so `C[(a,j),(b,k)] = Ψ(E_jk)[a,b]`.
pub fn choi_matrix(psi: &SuperOperator) -> CMatrix {
    let n = psi.dim;
    let mut choi = CMatrix::zeros(n * n, n * n);
    for j in 0..n {
        for k in 0..n {
            // column of the superoperator acting on vec(E_jk)
            let col = psi.matrix.column(j + k * n);
            for a in 0..n {
                for b in 0..n {
                    choi[(a * n + j, b * n + k)] = col[a + b * n];
                }
            }
        }
    }
    choi
}

/// Kraus operators of a channel, with the Choi spectrum they came from.
#[derive(Debug, Clone, PartialEq)]
pub struct KrausSet {
    operators: Vec<CMatrix>,
    /// Choi eigenvalues, descending (empty when built directly from operators).
    pub choi_spectrum: Vec<f64>,
    /// Sum of the Choi eigenvalues dropped as numerically zero.
    pub discarded_mass: f64,
}

impl KrausSet {
    pub fn new(operators: Vec<CMatrix>) -> Result<Self> {
        let Some(first) = operators.first() else {
            return Err(Error::ContractViolation("empty Kraus set".into()));
        };
        let n = first.nrows();
        if operators.iter().any(|k| k.nrows() != n || k.ncols() != n) {
            return Err(Error::DimensionMismatch(
                "Kraus operators must share one square shape".into(),
            ));
        }
        Ok(Self {
            operators,
            choi_spectrum: Vec::new(),
            discarded_mass: 0.0,
        })
    }

    pub fn operators(&self) -> &[CMatrix] {
        &self.operators
    }

    pub fn len(&self) -> usize {
        self.operators.len()
    }

    pub fn is_empty(&self) -> bool {
        self.operators.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.operators[0].nrows()
    }

    /// `Σ_i K_i ρ K_i†`.
    pub fn apply(&self, rho: &CMatrix) -> CMatrix {
        let n = self.dim();
        self.operators
            .iter()
            .fold(CMatrix::zeros(n, n), |acc, k| acc + k * rho * k.adjoint())
    }
}

/// Default Choi eigenvalue cutoff, `1e-10 · N`.
pub fn default_rank_tol(n: usize) -> f64 {
    1e-10 * n as f64
}

/// Kraus operators `√μ · unvec(v)` for the Choi eigenpairs with `μ > tol_rank`.
pub fn kraus_from_choi(choi: &CMatrix, tol_rank: f64, tol_psd: f64) -> Result<KrausSet> {
    let nn = choi.nrows();
    let n = (nn as f64).sqrt().round() as usize;
    if n * n != nn || !choi.is_square() || n == 0 {
        return Err(Error::InvalidShape {
            expected: "N^2 x N^2 Choi matrix".into(),
            rows: choi.nrows(),
            cols: choi.ncols(),
        });
    }
    let herm = hermiticity_error(choi);
    if herm > 1e-8 * max_abs(choi).max(1.0) {
        return Err(Error::ContractViolation(format!(
            "Choi matrix is not Hermitian (error {herm:e})"
        )));
    }
    let eig = eig_hermitian_unchecked(&hermitian_part(choi));
    let min = *eig.eigenvalues.last().expect("nonempty");
    if min < -tol_psd {
        return Err(Error::NotCompletelyPositive { min_eigenvalue: min });
    }
    let mut operators = Vec::new();
    let mut discarded_mass = 0.0;
    for (idx, &mu) in eig.eigenvalues.iter().enumerate() {
        if mu > tol_rank {
            let v = eig.unitary.column(idx);
            let s = mu.sqrt();
            operators.push(CMatrix::from_fn(n, n, |a, j| v[a * n + j] * s));
        } else {
            discarded_mass += mu.abs();
        }
    }
    if operators.is_empty() {
        return Err(Error::ContractViolation("Choi matrix has no support".into()));
    }
    Ok(KrausSet {
        operators,
        choi_spectrum: eig.eigenvalues,
        discarded_mass,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct KrausCheck {
    pub pass: bool,
    pub residual: f64,
}

/// `‖Σ K_i† K_i − I‖_max ≤ tol`.
pub fn check_trace_preserving(ks: &KrausSet, tol: f64) -> KrausCheck {
    let n = ks.dim();
    let sum = ks
        .operators
        .iter()
        .fold(CMatrix::zeros(n, n), |acc, k| acc + k.adjoint() * k);
    let residual = max_abs(&(sum - identity(n)));
    KrausCheck {
        pass: residual <= tol,
        residual,
    }
}

/// `‖Σ K_i K_i† − I‖_max ≤ tol`.
pub fn check_unital_kraus(ks: &KrausSet, tol: f64) -> KrausCheck {
    let n = ks.dim();
    let sum = ks
        .operators
        .iter()
        .fold(CMatrix::zeros(n, n), |acc, k| acc + k * k.adjoint());
    let residual = max_abs(&(sum - identity(n)));
    KrausCheck {
        pass: residual <= tol,
        residual,
    }
}

/// Tolerance on `‖Σ K ρ1 K† − ρ2‖_max` accepted by [`stochastic_matrix`].
pub const CHANNEL_ACTION_TOL: f64 = 1e-8;

/// The matrix `D_ab = Σ_i |(U2† K_i U1)_ab|²` relating the descending spectra of
/// `rho1` and `rho2`.
pub fn stochastic_matrix(
    ks: &KrausSet,
    rho1: &DensityMatrix,
    rho2: &DensityMatrix,
    tol: f64,
) -> Result<RMatrix> {
    let n = ks.dim();
    if rho1.dim() != n || rho2.dim() != n {
        return Err(Error::DimensionMismatch(format!(
            "Kraus dimension {n}, states {} and {}",
            rho1.dim(),
            rho2.dim()
        )));
    }
    let residual = max_abs(&(ks.apply(rho1.matrix()) - rho2.matrix()));
    if residual > tol {
        return Err(Error::InconsistentInputs { residual });
    }
    Ok(stochastic_matrix_in_bases(ks, &rho1.spectrum().unitary, &rho2.spectrum().unitary))
}

/// `D_ab = Σ_i |(U2† K_i U1)_ab|²` for explicitly chosen eigenbases (columns of `u1`, `u2`).
pub fn stochastic_matrix_in_bases(ks: &KrausSet, u1: &CMatrix, u2: &CMatrix) -> RMatrix {
    let n = u1.nrows();
    let u2d = u2.adjoint();
    let mut d = RMatrix::zeros(n, n);
    for k in &ks.operators {
        let v = &u2d * k * u1;
        for a in 0..n {
            for b in 0..n {
                d[(a, b)] += v[(a, b)].norm_sqr();
            }
        }
    }
    d
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Monotone,
    Violated,
    Inconclusive,
}

/// Evidence that `ρ(t2) ≺ ρ(t1)` (or that it fails).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MonotoneCertificate {
    pub t1: f64,
    pub t2: f64,
    pub spectrum1: Vec<f64>,
    pub spectrum2: Vec<f64>,
    /// Rows of `D`, with `spectrum2 = D · spectrum1`.
    pub d: Vec<Vec<f64>>,
    pub row_sums: Vec<f64>,
    pub column_sums: Vec<f64>,
    pub doubly_stochastic: bool,
    /// Partial-sum slacks of `spectrum1` over `spectrum2`, `d = 1..N`.
    pub slack: Vec<f64>,
    pub entropy_delta: f64,
    pub purity_delta: f64,
    pub kraus_count: usize,
    pub verdict: Verdict,
}

impl MonotoneCertificate {
    pub fn d_matrix(&self) -> RMatrix {
        let n = self.d.len();
        RMatrix::from_fn(n, n, |i, j| self.d[i][j])
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum PairMode {
    Adjacent,
    All,
}

#[derive(Debug, Clone, PartialEq)]
pub struct VerifyOptions {
    pub pairs: PairMode,
    pub tol: Tolerances,
    /// Choi cutoff; `None` uses [`default_rank_tol`].
    pub tol_rank: Option<f64>,
    /// Tolerance on entropy and purity monotonicity.
    pub tol_functional: f64,
    /// Row/column sum tolerance for the doubly stochastic flag.
    pub tol_stochastic: f64,
    /// Slacks between `-inconclusive_band · tol.majorization` and
    /// `-tol.majorization` give an inconclusive verdict.
    pub inconclusive_band: f64,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        Self {
            pairs: PairMode::Adjacent,
            tol: Tolerances::default(),
            tol_rank: None,
            tol_functional: 1e-8,
            tol_stochastic: 1e-8,
            inconclusive_band: 100.0,
        }
    }
}

/// The channel and its Kraus set over one certified interval.
#[derive(Debug, Clone)]
pub struct IntervalChannel {
    pub i1: usize,
    pub i2: usize,
    pub channel: SuperOperator,
    pub kraus: KrausSet,
}

fn index_pairs(len: usize, mode: PairMode) -> Vec<(usize, usize)> {
    match mode {
        PairMode::Adjacent => (1..len).map(|j| (j - 1, j)).collect(),
        PairMode::All => (0..len)
            .flat_map(|i| (i + 1..len).map(move |j| (i, j)))
            .collect(),
    }
}

/// Channels and Kraus sets for the grid pairs selected by `opts.pairs`.
/// They depend only on the generator, so they can be shared across initial states.
pub fn interval_channels(
    gen: &LindbladGenerator,
    t_grid: &[f64],
    opts: &VerifyOptions,
) -> Result<Vec<IntervalChannel>> {
    let tol_rank = opts.tol_rank.unwrap_or_else(|| default_rank_tol(gen.dim()));
    index_pairs(t_grid.len(), opts.pairs)
        .into_iter()
        .map(|(i1, i2)| {
            let channel = channel_from_generator(gen, t_grid[i1], t_grid[i2])?;
            let kraus = kraus_from_choi(&choi_matrix(&channel), tol_rank, opts.tol.psd)?;
            Ok(IntervalChannel {
                i1,
                i2,
                channel,
                kraus,
            })
        })
        .collect()
}

/// Builds one certificate per interval channel from the sampled trajectory.
pub fn certify(
    channels: &[IntervalChannel],
    traj: &Trajectory,
    opts: &VerifyOptions,
) -> Result<Vec<MonotoneCertificate>> {
    channels
        .iter()
        .map(|ch| certify_pair(ch, traj, opts))
        .collect()
}

fn certify_pair(
    ch: &IntervalChannel,
    traj: &Trajectory,
    opts: &VerifyOptions,
) -> Result<MonotoneCertificate> {
    let rho1 = &traj.states[ch.i1];
    let rho2 = &traj.states[ch.i2];
    let d = stochastic_matrix(&ch.kraus, rho1, rho2, CHANNEL_ACTION_TOL)?;
    let (lam1, _) = rho1.clamped_eigenvalues();
    let (lam2, _) = rho2.clamped_eigenvalues();
    let slack = partial_sum_slacks(&lam1, &lam2);
    let n = slack.len();
    let min_slack = slack[..n - 1].iter().copied().fold(0.0_f64, f64::min);
    let cutoff = opts.tol.psd;
    let entropy_delta = entropy_of_spectrum(&lam2, cutoff) - entropy_of_spectrum(&lam1, cutoff);
    let purity_delta = purity(rho2) - purity(rho1);
    let (row_sums, column_sums) = line_sums(&d);
    let doubly_stochastic = d.iter().all(|&v| v >= -1e-12)
        && row_sums
            .iter()
            .chain(column_sums.iter())
            .all(|s| (s - 1.0).abs() <= opts.tol_stochastic);
    let tol = opts.tol.majorization;
    let verdict = if min_slack >= -tol {
        if entropy_delta >= -opts.tol_functional && purity_delta <= opts.tol_functional {
            Verdict::Monotone
        } else {
            Verdict::Inconclusive
        }
    } else if min_slack >= -opts.inconclusive_band * tol {
        Verdict::Inconclusive
    } else {
        Verdict::Violated
    };
    Ok(MonotoneCertificate {
        t1: traj.times[ch.i1],
        t2: traj.times[ch.i2],
        spectrum1: lam1,
        spectrum2: lam2,
        d: d.row_iter().map(|r| r.iter().copied().collect()).collect(),
        row_sums,
        column_sums,
        doubly_stochastic,
        slack,
        entropy_delta,
        purity_delta,
        kraus_count: ch.kraus.len(),
        verdict,
    })
}

/// Simulates from `rho0` and certifies every selected pair of grid times.
pub fn verify_monotone(
    gen: &LindbladGenerator,
    rho0: &DensityMatrix,
    t_grid: &[f64],
    opts: &VerifyOptions,
) -> Result<Vec<MonotoneCertificate>> {
    let traj = evolve(
        gen,
        rho0,
        t_grid,
        &EvolveOptions {
            tol: opts.tol,
            ..EvolveOptions::default()
        },
    )?;
    let channels = interval_channels(gen, t_grid, opts)?;
    certify(&channels, &traj, opts)
}

/// Counts of `(monotone, violated, inconclusive)`.
pub fn verdict_counts(certs: &[MonotoneCertificate]) -> (usize, usize, usize) {
    certs.iter().fold((0, 0, 0), |(m, v, i), c| match c.verdict {
        Verdict::Monotone => (m + 1, v, i),
        Verdict::Violated => (m, v + 1, i),
        Verdict::Inconclusive => (m, v, i + 1),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lindblad::{GksMatrix, HamiltonianSchedule};
    use crate::linalg::{c, diag, from_real_rows};
    use crate::operators::gell_mann_basis;
    use crate::random::{random_density, random_hermitian, random_unital_gks, seeded};
    use crate::state::validate_density;
    use nalgebra::DVector;

    fn tol() -> Tolerances {
        Tolerances::default()
    }

    fn qubit(gks: CMatrix, h: CMatrix) -> LindbladGenerator {
        LindbladGenerator::new(
            gell_mann_basis(2).unwrap(),
            GksMatrix::new(gks, &tol()).unwrap(),
            HamiltonianSchedule::Constant(h),
            &tol(),
        )
        .unwrap()
    }

    fn depolarizing(n: usize) -> SuperOperator {
        let v = vec(&identity(n));
        SuperOperator::new(n, (&v * v.transpose()).scale(1.0 / n as f64)).unwrap()
    }

    fn amplitude_damping_kraus(p: f64) -> KrausSet {
        let k0 = diag(&[1.0, (1.0 - p).sqrt()]);
        let k1 = from_real_rows(&[&[0.0, p.sqrt()], &[0.0, 0.0]]);
        KrausSet::new(vec![k0, k1]).unwrap()
    }

    #[test]
    fn short_and_trivial_intervals_give_identity() {
        let gen = qubit(diag(&[0.2, 0.5, 0.1]), random_hermitian(2, &mut seeded(1)));
        let ch = channel_from_generator(&gen, 1.0, 1.0 + 1e-12).unwrap();
        assert!(max_abs(&(ch.matrix() - identity(4))) < 1e-11);
        let zero = qubit(CMatrix::zeros(3, 3), CMatrix::zeros(2, 2));
        let ch = channel_from_generator(&zero, 0.0, 7.0).unwrap();
        assert!(max_abs(&(ch.matrix() - identity(4))) < 1e-15);
        assert!(matches!(channel_from_generator(&zero, 1.0, 1.0), Err(Error::Interval { .. })));
        assert!(channel_from_generator(&zero, -1.0, 1.0).is_err());
    }

    #[test]
    fn channel_matches_evolve_endpoint() {
        let mut rng = seeded(2);
        let basis = gell_mann_basis(3).unwrap();
        let gks = crate::random::random_nonunital_gks(&basis, &mut rng);
        let gen = LindbladGenerator::new(basis, gks, HamiltonianSchedule::Constant(random_hermitian(3, &mut rng)), &tol()).unwrap();
        let rho0 = random_density(3, &mut rng);
        let traj = evolve(&gen, &rho0, &[0.0, 0.3, 1.1], &EvolveOptions::default()).unwrap();
        let ch = channel_from_generator(&gen, 0.3, 1.1).unwrap();
        let out = ch.apply(traj.states[1].matrix());
        assert!(max_abs(&(out - traj.states[2].matrix())) < 1e-9);
    }

    #[test]
    fn choi_of_identity_and_depolarizing() {
        for n in 2..=3 {
            let choi = choi_matrix(&SuperOperator::identity(n));
            let mut omega = DVector::<num_complex::Complex64>::zeros(n * n);
            for j in 0..n {
                omega[j * n + j] = c(1.0, 0.0);
            }
            assert!(max_abs(&(&choi - &omega * omega.adjoint())) < 1e-15);
            assert!((crate::linalg::trace(&choi).re - n as f64).abs() < 1e-15);

            let choi = choi_matrix(&depolarizing(n));
            assert!(max_abs(&(&choi - identity(n * n).scale(1.0 / n as f64))) < 1e-15);
        }
    }

    #[test]
    fn identity_channel_has_one_kraus_operator() {
        let ks = kraus_from_choi(&choi_matrix(&SuperOperator::identity(3)), default_rank_tol(3), 1e-9).unwrap();
        assert_eq!(ks.len(), 1);
        let k = &ks.operators()[0];
        let phase = k[(0, 0)];
        assert!((phase.norm() - 1.0).abs() < 1e-14);
        assert!(max_abs(&(k / phase - identity(3))) < 1e-14);
    }

    #[test]
    fn long_dephasing_gives_projector_kraus_pair() {
        let gen = qubit(diag(&[0.0, 0.0, 2.0]), CMatrix::zeros(2, 2));
        let ch = channel_from_generator(&gen, 0.0, 30.0).unwrap();
        let ks = kraus_from_choi(&choi_matrix(&ch), default_rank_tol(2), 1e-9).unwrap();
        assert_eq!(ks.len(), 2);
        // action equivalence with ρ ↦ P0 ρ P0 + P1 ρ P1
        let mut rng = seeded(3);
        for _ in 0..10 {
            let rho = random_density(2, &mut rng);
            let m = rho.matrix();
            let want = diag(&[m[(0, 0)].re, m[(1, 1)].re]);
            assert!(max_abs(&(ks.apply(m) - want)) < 1e-12);
        }
        for k in ks.operators() {
            assert!(k[(0, 1)].norm() < 1e-12 && k[(1, 0)].norm() < 1e-12);
        }
    }

    #[test]
    fn kraus_rejects_non_cp() {
        // transpose map is positive but not completely positive
        let n = 2;
        let mut m = CMatrix::zeros(4, 4);
        for i in 0..n {
            for j in 0..n {
                m[(j + i * n, i + j * n)] = c(1.0, 0.0);
            }
        }
        let choi = choi_matrix(&SuperOperator::new(2, m).unwrap());
        assert!(matches!(
            kraus_from_choi(&choi, 1e-10, 1e-9),
            Err(Error::NotCompletelyPositive { .. })
        ));
    }

    #[test]
    fn trace_preserving_and_unital_checks() {
        let id = KrausSet::new(vec![identity(2)]).unwrap();
        assert_eq!(check_trace_preserving(&id, 1e-12), KrausCheck { pass: true, residual: 0.0 });
        assert!(check_unital_kraus(&id, 1e-12).pass);
        let half = KrausSet::new(vec![identity(2).scale(0.5)]).unwrap();
        let r = check_trace_preserving(&half, 1e-8);
        assert!(!r.pass && (r.residual - 0.75).abs() < 1e-15);
        for p in [0.1, 0.4, 0.9] {
            let ad = amplitude_damping_kraus(p);
            assert!(check_trace_preserving(&ad, 1e-12).pass);
            let u = check_unital_kraus(&ad, 1e-8);
            assert!(!u.pass);
            assert!((u.residual - p).abs() < 1e-15);
        }
    }

    #[test]
    fn kraus_from_simulated_channels() {
        let mut rng = seeded(4);
        let basis = gell_mann_basis(3).unwrap();
        let gen = LindbladGenerator::new(
            basis.clone(),
            random_unital_gks(&basis, &mut rng),
            HamiltonianSchedule::Constant(random_hermitian(3, &mut rng)),
            &tol(),
        )
        .unwrap();
        let ch = channel_from_generator(&gen, 0.0, 0.7).unwrap();
        let choi = choi_matrix(&ch);
        assert!((crate::linalg::trace(&choi).re - 3.0).abs() < 1e-12);
        let ks = kraus_from_choi(&choi, default_rank_tol(3), 1e-9).unwrap();
        assert!(*ks.choi_spectrum.last().unwrap() >= -1e-9);
        assert!(check_trace_preserving(&ks, 1e-8).pass);
        assert!(check_unital_kraus(&ks, 1e-8).pass);
        for _ in 0..20 {
            let rho = random_density(3, &mut rng);
            assert!(max_abs(&(ks.apply(rho.matrix()) - ch.apply(rho.matrix()))) < 1e-8);
        }
    }

    #[test]
    fn stochastic_matrix_identity_and_depolarizing() {
        let mut rng = seeded(5);
        let rho = random_density(3, &mut rng);
        let id = KrausSet::new(vec![identity(3)]).unwrap();
        let d = stochastic_matrix(&id, &rho, &rho, 1e-8).unwrap();
        assert!((d - RMatrix::identity(3, 3)).abs().max() < 1e-12);

        let ks = kraus_from_choi(&choi_matrix(&depolarizing(3)), default_rank_tol(3), 1e-9).unwrap();
        let out = DensityMatrix::maximally_mixed(3).unwrap();
        let d = stochastic_matrix(&ks, &rho, &out, 1e-8).unwrap();
        assert!((d.map(|v| v - 1.0 / 3.0)).abs().max() < 1e-12);
        let lam2 = &d * DVector::from_column_slice(rho.eigenvalues());
        assert!(lam2.iter().all(|v| (v - 1.0 / 3.0).abs() < 1e-12));

        let wrong = random_density(3, &mut rng);
        assert!(matches!(
            stochastic_matrix(&id, &rho, &wrong, 1e-8),
            Err(Error::InconsistentInputs { .. })
        ));
    }

    #[test]
    fn column_sums_need_only_trace_preservation() {
        // amplitude damping: Σ_a D_ab = 1 always, Σ_b D_ab = 1 fails
        let ks = amplitude_damping_kraus(0.3);
        let rho1 = validate_density(&from_real_rows(&[&[0.3, 0.1], &[0.1, 0.7]]), &tol()).unwrap();
        let rho2 = validate_density(&ks.apply(rho1.matrix()), &tol()).unwrap();
        let d = stochastic_matrix(&ks, &rho1, &rho2, 1e-12).unwrap();
        let (rows, cols) = line_sums(&d);
        assert!(cols.iter().all(|s| (s - 1.0).abs() < 1e-12));
        assert!(rows.iter().any(|s| (s - 1.0).abs() > 1e-3));
        let lam2 = &d * DVector::from_column_slice(rho1.eigenvalues());
        for (a, b) in lam2.iter().zip(rho2.eigenvalues()) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn zero_generator_certificates_are_identity() {
        let gen = qubit(CMatrix::zeros(3, 3), CMatrix::zeros(2, 2));
        let rho0 = random_density(2, &mut seeded(6));
        let grid: Vec<f64> = (0..6).map(|k| k as f64 * 0.2).collect();
        let certs = verify_monotone(&gen, &rho0, &grid, &VerifyOptions::default()).unwrap();
        assert_eq!(certs.len(), 5);
        for cert in &certs {
            assert_eq!(cert.verdict, Verdict::Monotone);
            assert!((cert.d_matrix() - RMatrix::identity(2, 2)).abs().max() < 1e-12);
        }
    }

    #[test]
    fn amplitude_damping_from_mixed_state_is_violated() {
        let a = CMatrix::from_row_slice(3, 3, &[
            c(1.0, 0.0), c(0.0, -1.0), c(0.0, 0.0),
            c(0.0, 1.0), c(1.0, 0.0), c(0.0, 0.0),
            c(0.0, 0.0), c(0.0, 0.0), c(0.0, 0.0),
        ]);
        let gen = qubit(a.scale(0.5), CMatrix::zeros(2, 2));
        let grid: Vec<f64> = (0..=10).map(|k| k as f64 * 0.1).collect();
        let certs = verify_monotone(&gen, &DensityMatrix::maximally_mixed(2).unwrap(), &grid, &VerifyOptions::default()).unwrap();
        assert!(certs.iter().all(|c| c.verdict == Verdict::Violated));
        assert!(certs.iter().all(|c| c.purity_delta > 0.0 && !c.doubly_stochastic));
    }

    #[test]
    fn all_pairs_mode_counts() {
        let gen = qubit(diag(&[0.3, 0.2, 0.1]), CMatrix::zeros(2, 2));
        let rho0 = random_density(2, &mut seeded(7));
        let grid = [0.0, 0.5, 1.0, 2.0];
        let opts = VerifyOptions { pairs: PairMode::All, ..Default::default() };
        let certs = verify_monotone(&gen, &rho0, &grid, &opts).unwrap();
        assert_eq!(certs.len(), 6);
        assert_eq!(verdict_counts(&certs), (6, 0, 0));
    }

    #[test]
    fn degenerate_spectra_any_eigenbasis() {
        let mut rng = seeded(8);
        let basis = gell_mann_basis(3).unwrap();
        let gen = LindbladGenerator::new(
            basis.clone(),
            random_unital_gks(&basis, &mut rng),
            HamiltonianSchedule::zero(3),
            &tol(),
        )
        .unwrap();
        let ch = channel_from_generator(&gen, 0.0, 0.4).unwrap();
        let ks = kraus_from_choi(&choi_matrix(&ch), default_rank_tol(3), 1e-9).unwrap();
        for _ in 0..10 {
            let w = crate::random::haar_unitary(3, &mut rng);
            let lam1 = [0.4, 0.4, 0.2];
            let rho1 = &w * diag(&lam1) * w.adjoint();
            let rho2 = validate_density(&ks.apply(&rho1), &tol()).unwrap();
            // rotate inside the degenerate eigenspace of rho1
            let r = crate::random::haar_unitary(2, &mut rng);
            let mut rot = identity(3);
            rot.view_mut((0, 0), (2, 2)).copy_from(&r);
            let u1 = &w * rot;
            let d = stochastic_matrix_in_bases(&ks, &u1, &rho2.spectrum().unitary);
            let (rows, cols) = line_sums(&d);
            assert!(rows.iter().chain(cols.iter()).all(|s| (s - 1.0).abs() < 1e-8));
            let lam2 = &d * DVector::from_column_slice(&lam1);
            for (a, b) in lam2.iter().zip(rho2.eigenvalues()) {
                assert!((a - b).abs() < 1e-10);
            }
        }
    }
}
