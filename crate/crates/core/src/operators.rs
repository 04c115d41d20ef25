//! Traceless Hermitian operator bases.
//!
//! The generalized Gell-Mann basis is ordered: all symmetric off-diagonal
//! generators for pairs `(j, k)`, `j < k`, in lexicographic order; then the
//! antisymmetric ones in the same pair order; then the `N - 1` diagonal ones.
//! Every element is scaled so that `Tr(F_a F_b) = δ_ab`. For `N = 2` this is
//! `σx/√2, σy/√2, σz/√2`.

use crate::error::{Error, Result};
use crate::linalg::{c, hermiticity_error, trace, CMatrix};

/// `N² - 1` traceless Hermitian matrices, orthonormal under `Tr(A B)`.
#[derive(Debug, Clone, PartialEq)]
pub struct OperatorBasis {
    dim: usize,
    operators: Vec<CMatrix>,
}

impl OperatorBasis {
    /// Validates an explicit basis.
    pub fn new(operators: Vec<CMatrix>, tol: f64) -> Result<Self> {
        let count = operators.len();
        let dim = (count + 1) as f64;
        let n = dim.sqrt().round() as usize;
        if n < 2 || n * n - 1 != count {
            return Err(Error::DimensionMismatch(format!(
                "a basis must hold N^2 - 1 operators, got {count}"
            )));
        }
        for (k, f) in operators.iter().enumerate() {
            if f.nrows() != n || f.ncols() != n {
                return Err(Error::InvalidShape {
                    expected: format!("{n}x{n}"),
                    rows: f.nrows(),
                    cols: f.ncols(),
                });
            }
            if trace(f).norm() > tol {
                return Err(Error::ContractViolation(format!(
                    "basis operator {k} is not traceless"
                )));
            }
            if hermiticity_error(f) > tol {
                return Err(Error::ContractViolation(format!(
                    "basis operator {k} is not Hermitian"
                )));
            }
        }
        for a in 0..count {
            for b in a..count {
                let g = trace(&(&operators[a] * &operators[b]));
                let want = if a == b { 1.0 } else { 0.0 };
                if (g - c(want, 0.0)).norm() > tol {
                    return Err(Error::ContractViolation(format!(
                        "basis operators {a} and {b} are not orthonormal (Tr = {g})"
                    )));
                }
            }
        }
        Ok(Self {
            dim: n,
            operators,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.operators.len()
    }

    pub fn is_empty(&self) -> bool {
        self.operators.is_empty()
    }

    pub fn operators(&self) -> &[CMatrix] {
        &self.operators
    }

    pub fn get(&self, k: usize) -> &CMatrix {
        &self.operators[k]
    }

    /// Coefficients `Tr(F_a X)` of `X` in this basis (the identity component is dropped).
    pub fn coefficients(&self, x: &CMatrix) -> Vec<num_complex::Complex64> {
        self.operators.iter().map(|f| trace(&(f * x))).collect()
    }

    /// `Σ_a coeffs[a] F_a`.
    pub fn combine(&self, coeffs: &[num_complex::Complex64]) -> CMatrix {
        let mut out = CMatrix::zeros(self.dim, self.dim);
        for (f, &w) in self.operators.iter().zip(coeffs) {
            out += f * w;
        }
        out
    }
}

/// Normalized generalized Gell-Mann matrices for `N >= 2`.
pub fn gell_mann_basis(n: usize) -> Result<OperatorBasis> {
    if n < 2 {
        return Err(Error::InvalidDimension(n));
    }
    let inv_sqrt2 = std::f64::consts::FRAC_1_SQRT_2;
    let pairs: Vec<(usize, usize)> = (0..n)
        .flat_map(|j| (j + 1..n).map(move |k| (j, k)))
        .collect();
    let mut ops = Vec::with_capacity(n * n - 1);
    for &(j, k) in &pairs {
        let mut m = CMatrix::zeros(n, n);
        m[(j, k)] = c(inv_sqrt2, 0.0);
        m[(k, j)] = c(inv_sqrt2, 0.0);
        ops.push(m);
    }
    for &(j, k) in &pairs {
        let mut m = CMatrix::zeros(n, n);
        m[(j, k)] = c(0.0, -inv_sqrt2);
        m[(k, j)] = c(0.0, inv_sqrt2);
        ops.push(m);
    }
    for l in 1..n {
        let lf = l as f64;
        let scale = 1.0 / (lf * (lf + 1.0)).sqrt();
        let mut m = CMatrix::zeros(n, n);
        for j in 0..l {
            m[(j, j)] = c(scale, 0.0);
        }
        m[(l, l)] = c(-lf * scale, 0.0);
        ops.push(m);
    }
    Ok(OperatorBasis { dim: n, operators: ops })
}

/// Unnormalized Pauli matrices `(σx, σy, σz)`.
pub fn pauli() -> [CMatrix; 3] {
    let sx = CMatrix::from_row_slice(2, 2, &[c(0.0, 0.0), c(1.0, 0.0), c(1.0, 0.0), c(0.0, 0.0)]);
    let sy = CMatrix::from_row_slice(2, 2, &[c(0.0, 0.0), c(0.0, -1.0), c(0.0, 1.0), c(0.0, 0.0)]);
    let sz = CMatrix::from_row_slice(2, 2, &[c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(-1.0, 0.0)]);
    [sx, sy, sz]
}
