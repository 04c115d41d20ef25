//! Diagonals of rotated diagonal matrices, and Horn's converse construction.

use super::{majorizes, ProbVector, MAJORIZATION_TOL};
use crate::error::{Error, Result};
use crate::linalg::{max_abs_real, RMatrix};

const ORTHO_TOL: f64 = 1e-9;

fn check_special_orthogonal(k: &RMatrix) -> Result<()> {
    if !k.is_square() {
        return Err(Error::InvalidShape {
            expected: "square matrix".into(),
            rows: k.nrows(),
            cols: k.ncols(),
        });
    }
    let n = k.nrows();
    let err = max_abs_real(&(k.transpose() * k - RMatrix::identity(n, n)));
    if err > ORTHO_TOL {
        return Err(Error::ContractViolation(format!(
            "matrix is not orthogonal (max |KᵀK - I| = {err:e})"
        )));
    }
    let det = k.determinant();
    if (det - 1.0).abs() > ORTHO_TOL {
        return Err(Error::ContractViolation(format!(
            "orthogonal matrix has determinant {det}, need +1"
        )));
    }
    Ok(())
}

/// Diagonal of `Kᵀ diag(λ) K` for `K ∈ SO(n)`.
pub fn schur_horn_diagonal(lambda: &ProbVector, k: &RMatrix) -> Result<ProbVector> {
    check_special_orthogonal(k)?;
    if k.nrows() != lambda.len() {
        return Err(Error::DimensionMismatch(format!(
            "{} eigenvalues with a {}x{} rotation",
            lambda.len(),
            k.nrows(),
            k.ncols()
        )));
    }
    let l = lambda.as_slice();
    let diag = (0..k.ncols())
        .map(|j| (0..k.nrows()).map(|i| k[(i, j)] * k[(i, j)] * l[i]).sum())
        .collect();
    ProbVector::new(diag)
}

/// Finds `K ∈ SO(n)` with `diag(Kᵀ diag(λ) K) = a`, given `a ≺ λ`.
///
/// The target is reached by a chain of at most `n - 1` plane rotations, each
/// realizing one T-transform on the current diagonal. Inputs need not be sorted.
pub fn schur_horn_construct(a: &ProbVector, lambda: &ProbVector) -> Result<RMatrix> {
    let check = majorizes(lambda, a, MAJORIZATION_TOL)?;
    if !check.holds {
        return Err(Error::NotMajorized {
            slack: check.min_slack(),
        });
    }
    let n = a.len();
    let by_desc = |v: &[f64]| {
        let mut idx: Vec<usize> = (0..n).collect();
        idx.sort_by(|&i, &j| v[j].total_cmp(&v[i]));
        idx
    };
    let order_l = by_desc(lambda.as_slice());
    let order_a = by_desc(a.as_slice());
    let target: Vec<f64> = order_a.iter().map(|&i| a.as_slice()[i]).collect();

    // permutation placing λ↓_i at diagonal position order_a[i]
    let mut k = RMatrix::zeros(n, n);
    for i in 0..n {
        k[(order_l[i], order_a[i])] = 1.0;
    }
    let mut m = RMatrix::zeros(n, n);
    for i in 0..n {
        m[(order_a[i], order_a[i])] = lambda.as_slice()[order_l[i]];
    }

    let scale = lambda
        .as_slice()
        .iter()
        .fold(0.0_f64, |acc, v| acc.max(v.abs()))
        .max(1e-300);
    let eps = 1e-14 * scale;
    for _ in 0..n {
        let x: Vec<f64> = order_a.iter().map(|&p| m[(p, p)]).collect();
        let Some(j) = (0..n).rev().find(|&j| x[j] > target[j] + eps) else {
            break;
        };
        let Some(kk) = (j + 1..n).find(|&kk| x[kk] < target[kk] - eps) else {
            break;
        };
        let delta = (x[j] - target[j]).min(target[kk] - x[kk]);
        let want = x[j] - delta;
        let (p, q) = (order_a[j], order_a[kk]);
        let theta = rotation_angle(m[(p, p)], m[(q, q)], m[(p, q)], want);
        let g = givens(n, p, q, theta);
        m = g.transpose() * &m * &g;
        k *= &g;
    }
    if k.determinant() < 0.0 {
        // flipping a row of K leaves Kᵀ diag(λ) K unchanged
        for j in 0..n {
            k[(0, j)] = -k[(0, j)];
        }
    }
    Ok(k)
}

/// Angle θ with `cos²θ·mpp + 2 sinθ cosθ·mpq + sin²θ·mqq = want`.
fn rotation_angle(mpp: f64, mqq: f64, mpq: f64, want: f64) -> f64 {
    let mean = 0.5 * (mpp + mqq);
    let half = 0.5 * (mpp - mqq);
    let radius = half.hypot(mpq);
    if radius == 0.0 {
        return 0.0;
    }
    let phi = mpq.atan2(half);
    let cos2 = ((want - mean) / radius).clamp(-1.0, 1.0);
    0.5 * (phi + cos2.acos())
}

/// Identity except for the `(p, q)` plane block `[[c, -s], [s, c]]`.
fn givens(n: usize, p: usize, q: usize, theta: f64) -> RMatrix {
    let (s, c) = theta.sin_cos();
    let mut g = RMatrix::identity(n, n);
    g[(p, p)] = c;
    g[(q, q)] = c;
    g[(p, q)] = -s;
    g[(q, p)] = s;
    g
}
