use thiserror::Error;

/// Errors raised by the library.
#[derive(Debug, Clone, Error, PartialEq)]
pub enum Error {
    #[error("invalid dimension {0}: need N >= 2")]
    InvalidDimension(usize),

    #[error("invalid shape: expected {expected}, got {rows}x{cols}")]
    InvalidShape {
        expected: String,
        rows: usize,
        cols: usize,
    },

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("contract violation: {0}")]
    ContractViolation(String),

    #[error("invalid density matrix: {0}")]
    InvalidDensity(#[from] DensityViolation),

    #[error("vectors not comparable: totals {lhs} and {rhs} differ")]
    NotComparable { lhs: f64, rhs: f64 },

    #[error("target vector is not majorized by the spectrum (worst slack {slack:e})")]
    NotMajorized { slack: f64 },

    #[error("Birkhoff decomposition stalled with residual mass {residual:e}")]
    NumericalDegeneracy { residual: f64 },

    #[error("interval error: need t2 > t1 >= 0, got [{t1}, {t2}]")]
    Interval { t1: f64, t2: f64 },

    #[error("map is not completely positive: Choi eigenvalue {min_eigenvalue:e}")]
    NotCompletelyPositive { min_eigenvalue: f64 },

    #[error("channel does not map rho1 to rho2 (residual {residual:e})")]
    InconsistentInputs { residual: f64 },

    #[error("integration diverged at t = {time}: {reason}")]
    IntegrationDiverged { time: f64, reason: String },
}

/// The invariant a candidate density matrix failed, with its magnitude.
#[derive(Debug, Clone, Copy, Error, PartialEq)]
pub enum DensityViolation {
    #[error("not Hermitian (max |M - M^dag| = {0:e})")]
    NotHermitian(f64),
    #[error("trace off by {0:e}")]
    Trace(f64),
    #[error("not positive semi-definite (min eigenvalue -{0:e})")]
    NotPositive(f64),
    #[error("non-finite entry")]
    NonFinite,
}

impl DensityViolation {
    /// Size of the violation: |Tr - 1| for trace, minus the smallest eigenvalue for PSD.
    pub fn magnitude(&self) -> f64 {
        match *self {
            DensityViolation::NotHermitian(m)
            | DensityViolation::Trace(m)
            | DensityViolation::NotPositive(m) => m,
            DensityViolation::NonFinite => f64::INFINITY,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
