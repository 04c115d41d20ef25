//! Density matrices and the mixedness functionals.

use serde::{Deserialize, Serialize};

use crate::error::{DensityViolation, Error, Result};
use crate::linalg::{
    all_finite, eig_hermitian_unchecked, hermitian_part, hermiticity_error, identity, trace,
    CMatrix, SpectralDecomposition,
};

/// Numerical tolerances. Defaults are the library-wide contract.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Tolerances {
    pub herm: f64,
    pub trace: f64,
    pub psd: f64,
    pub recon: f64,
    /// Slack below `-majorization` counts as a partial-sum violation.
    pub majorization: f64,
    /// PSD tolerance for states sampled along a trajectory.
    pub psd_trajectory: f64,
    /// Hermiticity and trace tolerance for states along a trajectory.
    pub trajectory: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            herm: 1e-10,
            trace: 1e-10,
            psd: 1e-9,
            recon: 1e-9,
            majorization: 1e-9,
            psd_trajectory: 1e-7,
            trajectory: 1e-9,
        }
    }
}

impl Tolerances {
    /// Every tolerance multiplied by `factor`.
    pub fn scaled(&self, factor: f64) -> Self {
        Self {
            herm: self.herm * factor,
            trace: self.trace * factor,
            psd: self.psd * factor,
            recon: self.recon * factor,
            majorization: self.majorization * factor,
            psd_trajectory: self.psd_trajectory * factor,
            trajectory: self.trajectory * factor,
        }
    }

    /// The tolerances applied to states produced by integration.
    pub fn for_trajectory(&self) -> Self {
        Self {
            herm: self.trajectory,
            trace: self.trajectory,
            psd: self.psd_trajectory,
            ..*self
        }
    }
}

/// A Hermitian, positive semi-definite, unit-trace matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    matrix: CMatrix,
    spectrum: SpectralDecomposition,
}

impl DensityMatrix {
    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> CMatrix {
        self.matrix
    }

    /// Spectral decomposition, eigenvalues descending.
    pub fn spectrum(&self) -> &SpectralDecomposition {
        &self.spectrum
    }

    /// Eigenvalues, descending.
    pub fn eigenvalues(&self) -> &[f64] {
        &self.spectrum.eigenvalues
    }

    /// Eigenvalues with small negative values clamped to zero; also returns the
    /// largest clamp applied.
    pub fn clamped_eigenvalues(&self) -> (Vec<f64>, f64) {
        let mut clamp = 0.0_f64;
        let vals = self
            .spectrum
            .eigenvalues
            .iter()
            .map(|&v| {
                if v < 0.0 {
                    clamp = clamp.max(-v);
                    0.0
                } else {
                    v
                }
            })
            .collect();
        (vals, clamp)
    }

    /// `I / N`.
    pub fn maximally_mixed(n: usize) -> Result<Self> {
        if n < 2 {
            return Err(Error::InvalidDimension(n));
        }
        validate_density(&identity(n).scale(1.0 / n as f64), &Tolerances::default())
    }

    /// `|ψ⟩⟨ψ|` for a (not necessarily normalized) vector.
    pub fn pure(psi: &[num_complex::Complex64]) -> Result<Self> {
        let v = nalgebra::DVector::from_column_slice(psi);
        let norm = v.norm();
        if norm == 0.0 || !norm.is_finite() {
            return Err(Error::ContractViolation("zero state vector".into()));
        }
        let v = v / num_complex::Complex64::new(norm, 0.0);
        validate_density(&(&v * v.adjoint()), &Tolerances::default())
    }
}

/// Checks the density-matrix invariants and returns the first one violated.
///
/// The stored matrix is the Hermitian part of `m`.
pub fn validate_density(m: &CMatrix, tol: &Tolerances) -> Result<DensityMatrix> {
    if !m.is_square() {
        return Err(Error::InvalidShape {
            expected: "square matrix".into(),
            rows: m.nrows(),
            cols: m.ncols(),
        });
    }
    if m.nrows() < 2 {
        return Err(Error::InvalidDimension(m.nrows()));
    }
    if !all_finite(m) {
        return Err(DensityViolation::NonFinite.into());
    }
    let herm = hermiticity_error(m);
    if herm > tol.herm {
        return Err(DensityViolation::NotHermitian(herm).into());
    }
    let tr = trace(m).re;
    if (tr - 1.0).abs() > tol.trace {
        return Err(DensityViolation::Trace((tr - 1.0).abs()).into());
    }
    let matrix = hermitian_part(m);
    let spectrum = eig_hermitian_unchecked(&matrix);
    let min = *spectrum.eigenvalues.last().expect("nonempty spectrum");
    if min < -tol.psd {
        return Err(DensityViolation::NotPositive(-min).into());
    }
    Ok(DensityMatrix { matrix, spectrum })
}

/// Von Neumann entropy in nats. Eigenvalues at or below `tol_psd` contribute zero.
pub fn von_neumann_entropy(rho: &DensityMatrix) -> f64 {
    entropy_of_spectrum(rho.eigenvalues(), Tolerances::default().psd)
}

pub fn entropy_of_spectrum(eigenvalues: &[f64], cutoff: f64) -> f64 {
    eigenvalues
        .iter()
        .filter(|&&p| p > cutoff)
        .map(|&p| -p * p.ln())
        .sum()
}

/// `Tr(ρ²)`.
pub fn purity(rho: &DensityMatrix) -> f64 {
    rho.matrix().iter().map(|z| z.norm_sqr()).sum()
}
