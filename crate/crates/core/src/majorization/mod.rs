//! Majorization order on real vectors and doubly stochastic matrices.

mod birkhoff;
mod schur_horn;

pub use birkhoff::{birkhoff_decompose, BirkhoffDecomposition, Permutation};
pub use schur_horn::{schur_horn_construct, schur_horn_diagonal};

use nalgebra::DVector;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::{max_abs, unitarity_error, CMatrix, RMatrix};
use crate::state::{validate_density, DensityMatrix, Tolerances};

/// Default slack tolerance for partial-sum comparisons.
pub const MAJORIZATION_TOL: f64 = 1e-9;

/// Nonnegative weights (up to `-1e-9`).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ProbVector(Vec<f64>);

impl ProbVector {
    pub fn new(entries: Vec<f64>) -> Result<Self> {
        if entries.is_empty() {
            return Err(Error::DimensionMismatch("empty vector".into()));
        }
        if let Some(bad) = entries.iter().find(|v| !v.is_finite() || **v < -1e-9) {
            return Err(Error::ContractViolation(format!(
                "vector entry {bad} is negative or non-finite"
            )));
        }
        Ok(Self(entries))
    }

    /// Also checks that the entries sum to `total` within `tol`.
    pub fn with_total(entries: Vec<f64>, total: f64, tol: f64) -> Result<Self> {
        let v = Self::new(entries)?;
        if (v.total() - total).abs() > tol {
            return Err(Error::NotComparable {
                lhs: v.total(),
                rhs: total,
            });
        }
        Ok(v)
    }

    pub fn uniform(n: usize) -> Self {
        Self(vec![1.0 / n as f64; n])
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.0
    }

    pub fn total(&self) -> f64 {
        self.0.iter().sum()
    }

    /// Entries rearranged in descending order.
    pub fn sorted_desc(&self) -> Vec<f64> {
        sorted_desc(&self.0)
    }
}

pub(crate) fn sorted_desc(v: &[f64]) -> Vec<f64> {
    let mut s = v.to_vec();
    s.sort_by(|a, b| b.total_cmp(a));
    s
}

/// Result of comparing two vectors in the majorization order.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MajorizationCheck {
    pub holds: bool,
    /// `Σ_{j≤d} y↓_j − Σ_{j≤d} x↓_j` for `d = 1..n`.
    pub slacks: Vec<f64>,
}

impl MajorizationCheck {
    /// Smallest slack over `d = 1..n-1` (0 when `n = 1`).
    pub fn min_slack(&self) -> f64 {
        let n = self.slacks.len();
        self.slacks[..n.saturating_sub(1)]
            .iter()
            .copied()
            .fold(0.0_f64, f64::min)
    }
}

/// Partial-sum slacks without any total check.
pub fn partial_sum_slacks(y: &[f64], x: &[f64]) -> Vec<f64> {
    let ys = sorted_desc(y);
    let xs = sorted_desc(x);
    let mut sy = 0.0;
    let mut sx = 0.0;
    ys.iter()
        .zip(xs.iter())
        .map(|(a, b)| {
            sy += a;
            sx += b;
            sy - sx
        })
        .collect()
}

/// Decides whether `y` majorizes `x` (`x ≺ y`).
pub fn majorizes(y: &ProbVector, x: &ProbVector, tol: f64) -> Result<MajorizationCheck> {
    if x.len() != y.len() {
        return Err(Error::DimensionMismatch(format!(
            "majorization needs equal lengths, got {} and {}",
            y.len(),
            x.len()
        )));
    }
    if (x.total() - y.total()).abs() > tol {
        return Err(Error::NotComparable {
            lhs: y.total(),
            rhs: x.total(),
        });
    }
    let slacks = partial_sum_slacks(y.as_slice(), x.as_slice());
    let holds = slacks.iter().all(|&s| s >= -tol);
    Ok(MajorizationCheck { holds, slacks })
}

/// Nonnegative matrix with unit row and column sums.
#[derive(Debug, Clone, PartialEq)]
pub struct DoublyStochasticMatrix(RMatrix);

impl DoublyStochasticMatrix {
    pub fn new(m: RMatrix, tol: f64) -> Result<Self> {
        if !m.is_square() || m.nrows() == 0 {
            return Err(Error::InvalidShape {
                expected: "nonempty square matrix".into(),
                rows: m.nrows(),
                cols: m.ncols(),
            });
        }
        if let Some(v) = m.iter().find(|v| !v.is_finite() || **v < -tol) {
            return Err(Error::ContractViolation(format!("negative entry {v}")));
        }
        let (rows, cols) = line_sums(&m);
        let worst = rows
            .iter()
            .chain(cols.iter())
            .map(|s| (s - 1.0).abs())
            .fold(0.0, f64::max);
        if worst > tol {
            return Err(Error::ContractViolation(format!(
                "row/column sums deviate from 1 by {worst:e}"
            )));
        }
        Ok(Self(m))
    }

    pub fn identity(n: usize) -> Self {
        Self(RMatrix::identity(n, n))
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    pub fn matrix(&self) -> &RMatrix {
        &self.0
    }
}

/// `(row sums, column sums)`.
pub fn line_sums(m: &RMatrix) -> (Vec<f64>, Vec<f64>) {
    let rows = m.row_iter().map(|r| r.sum()).collect();
    let cols = m.column_iter().map(|c| c.sum()).collect();
    (rows, cols)
}

/// `D y`.
pub fn apply_doubly_stochastic(d: &DoublyStochasticMatrix, y: &ProbVector) -> Result<ProbVector> {
    if d.dim() != y.len() {
        return Err(Error::DimensionMismatch(format!(
            "{}x{} matrix applied to length {}",
            d.dim(),
            d.dim(),
            y.len()
        )));
    }
    let out = d.matrix() * DVector::from_column_slice(y.as_slice());
    Ok(ProbVector(out.iter().map(|&v| v.max(0.0)).collect()))
}

/// Both sides of `Σ f(x_i) ≤ Σ f(y_i)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ConvexComparison {
    pub sum_x: f64,
    pub sum_y: f64,
    pub holds: bool,
}

/// Compares `Σ f(x_i)` with `Σ f(y_i)` for `x ≺ y`. Convexity of `f` is the caller's responsibility.
pub fn convex_sum_compare<F>(f: F, x: &ProbVector, y: &ProbVector, tol: f64) -> Result<ConvexComparison>
where
    F: Fn(f64) -> f64,
{
    let check = majorizes(y, x, tol)?;
    if !check.holds {
        return Err(Error::NotMajorized {
            slack: check.min_slack(),
        });
    }
    let sum_x = x.as_slice().iter().map(|&v| f(v)).sum();
    let sum_y = y.as_slice().iter().map(|&v| f(v)).sum();
    Ok(ConvexComparison {
        sum_x,
        sum_y,
        holds: sum_x <= sum_y + tol,
    })
}

/// `Σ p_i U_i ρ U_i†`.
pub fn mix_unitary_conjugations(
    rho: &DensityMatrix,
    mixture: &[(f64, CMatrix)],
    tol: &Tolerances,
) -> Result<DensityMatrix> {
    if mixture.is_empty() {
        return Err(Error::ContractViolation("empty mixture".into()));
    }
    let total: f64 = mixture.iter().map(|(p, _)| p).sum();
    if mixture.iter().any(|(p, _)| p.is_nan() || *p <= 0.0) || (total - 1.0).abs() > tol.trace {
        return Err(Error::ContractViolation(format!(
            "mixture weights must be positive and sum to 1 (sum = {total})"
        )));
    }
    let n = rho.dim();
    let mut out = CMatrix::zeros(n, n);
    for (p, u) in mixture {
        if u.nrows() != n || u.ncols() != n {
            return Err(Error::DimensionMismatch(format!(
                "unitary is {}x{}, state is {n}x{n}",
                u.nrows(),
                u.ncols()
            )));
        }
        let err = unitarity_error(u);
        if err > tol.recon {
            return Err(Error::ContractViolation(format!(
                "mixture element is not unitary (error {err:e})"
            )));
        }
        out += (u * rho.matrix() * u.adjoint()).scale(*p);
    }
    debug_assert!(max_abs(&out).is_finite());
    validate_density(&out, tol)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{diag, identity};
    use crate::operators::pauli;

    fn pv(v: &[f64]) -> ProbVector {
        ProbVector::new(v.to_vec()).unwrap()
    }

    #[test]
    fn uniform_is_majorized_by_point_mass() {
        let c = majorizes(&pv(&[1.0, 0.0]), &pv(&[0.5, 0.5]), 1e-9).unwrap();
        assert!(c.holds);
    }

    #[test]
    fn slacks_for_three_vectors() {
        let c = majorizes(&pv(&[0.5, 0.3, 0.2]), &pv(&[0.4, 0.35, 0.25]), 1e-9).unwrap();
        assert!(c.holds);
        let want = [0.1, 0.05, 0.0];
        for (s, w) in c.slacks.iter().zip(want) {
            assert!((s - w).abs() < 1e-15);
        }
    }

    #[test]
    fn first_partial_sum_violation() {
        let c = majorizes(&pv(&[0.6, 0.4]), &pv(&[0.7, 0.3]), 1e-9).unwrap();
        assert!(!c.holds);
        assert!((c.min_slack() + 0.1).abs() < 1e-15);
    }

    #[test]
    fn length_and_total_errors() {
        assert!(matches!(
            majorizes(&pv(&[1.0]), &pv(&[0.5, 0.5]), 1e-9),
            Err(Error::DimensionMismatch(_))
        ));
        assert!(matches!(
            majorizes(&pv(&[1.0, 0.0]), &pv(&[0.5, 0.4]), 1e-9),
            Err(Error::NotComparable { .. })
        ));
    }

    #[test]
    fn doubly_stochastic_actions() {
        let y = pv(&[0.5, 0.3, 0.2]);
        let id = DoublyStochasticMatrix::identity(3);
        assert_eq!(apply_doubly_stochastic(&id, &y).unwrap(), y);
        let flat = DoublyStochasticMatrix::new(RMatrix::from_element(3, 3, 1.0 / 3.0), 1e-12).unwrap();
        let out = apply_doubly_stochastic(&flat, &y).unwrap();
        assert!(out.as_slice().iter().all(|v| (v - 1.0 / 3.0).abs() < 1e-15));
        let wrong = pv(&[0.5, 0.5]);
        assert!(apply_doubly_stochastic(&flat, &wrong).is_err());
    }

    #[test]
    fn doubly_stochastic_validation() {
        let bad = RMatrix::from_row_slice(2, 2, &[0.7, 0.3, 0.4, 0.6]);
        assert!(DoublyStochasticMatrix::new(bad, 1e-9).is_err());
        let neg = RMatrix::from_row_slice(2, 2, &[1.5, -0.5, -0.5, 1.5]);
        assert!(DoublyStochasticMatrix::new(neg, 1e-9).is_err());
    }

    #[test]
    fn convex_functions() {
        let x = pv(&[0.5, 0.5]);
        let y = pv(&[1.0, 0.0]);
        let sq = convex_sum_compare(|t| t * t, &x, &y, 1e-12).unwrap();
        assert!(sq.holds);
        assert!((sq.sum_x - 0.5).abs() < 1e-15 && (sq.sum_y - 1.0).abs() < 1e-15);
        let xlogx = |t: f64| if t > 0.0 { t * t.ln() } else { 0.0 };
        let ent = convex_sum_compare(xlogx, &x, &y, 1e-12).unwrap();
        assert!((ent.sum_x + 2f64.ln()).abs() < 1e-15);
        assert_eq!(ent.sum_y, 0.0);
        assert!(ent.holds);
        assert!(matches!(
            convex_sum_compare(|t| t * t, &y, &x, 1e-12),
            Err(Error::NotMajorized { .. })
        ));
    }

    #[test]
    fn unitary_mixtures() {
        let tol = Tolerances::default();
        let rho = validate_density(&diag(&[1.0, 0.0]), &tol).unwrap();
        let same = mix_unitary_conjugations(&rho, &[(1.0, identity(2))], &tol).unwrap();
        assert!(max_abs(&(same.matrix() - rho.matrix())) < 1e-15);
        let [sx, _, _] = pauli();
        let mixed =
            mix_unitary_conjugations(&rho, &[(0.5, identity(2)), (0.5, sx)], &tol).unwrap();
        assert!(max_abs(&(mixed.matrix() - diag(&[0.5, 0.5]))) < 1e-15);
        assert!(mix_unitary_conjugations(&rho, &[(0.4, identity(2))], &tol).is_err());
        assert!(
            mix_unitary_conjugations(&rho, &[(1.0, identity(2).scale(1.1))], &tol).is_err()
        );
    }
}
