use serde::Serialize;

use super::DoublyStochasticMatrix;
use crate::error::{Error, Result};
use crate::linalg::RMatrix;

/// Entries at or below this are treated as absent from the support.
const TOL_ENTRY: f64 = 1e-12;
/// Residual mass tolerated when no further perfect matching exists.
const TOL_RESIDUAL: f64 = 1e-10;

/// `perm[i]` is the column holding the 1 in row `i`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Permutation(pub Vec<usize>);

impl Permutation {
    pub fn matrix(&self) -> RMatrix {
        let n = self.0.len();
        let mut m = RMatrix::zeros(n, n);
        for (i, &j) in self.0.iter().enumerate() {
            m[(i, j)] = 1.0;
        }
        m
    }
}

/// Convex combination of permutation matrices.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BirkhoffDecomposition {
    pub terms: Vec<(f64, Permutation)>,
}

impl BirkhoffDecomposition {
    pub fn reconstruct(&self, n: usize) -> RMatrix {
        let mut m = RMatrix::zeros(n, n);
        for (w, p) in &self.terms {
            for (i, &j) in p.0.iter().enumerate() {
                m[(i, j)] += w;
            }
        }
        m
    }

    pub fn total_weight(&self) -> f64 {
        self.terms.iter().map(|(w, _)| w).sum()
    }
}

/// Perfect matching rows -> columns on entries above `TOL_ENTRY` (Kuhn's augmenting paths).
fn perfect_matching(m: &RMatrix) -> Option<Vec<usize>> {
    let n = m.nrows();
    let mut col_owner: Vec<Option<usize>> = vec![None; n];

    fn augment(
        row: usize,
        m: &RMatrix,
        seen: &mut [bool],
        col_owner: &mut [Option<usize>],
    ) -> bool {
        for col in 0..m.ncols() {
            if m[(row, col)] > TOL_ENTRY && !seen[col] {
                seen[col] = true;
                let free = match col_owner[col] {
                    None => true,
                    Some(other) => augment(other, m, seen, col_owner),
                };
                if free {
                    col_owner[col] = Some(row);
                    return true;
                }
            }
        }
        false
    }

    for row in 0..n {
        let mut seen = vec![false; n];
        if !augment(row, m, &mut seen, &mut col_owner) {
            return None;
        }
    }
    let mut perm = vec![0; n];
    for (col, owner) in col_owner.iter().enumerate() {
        perm[owner.expect("perfect matching")] = col;
    }
    Some(perm)
}

/// Writes a doubly stochastic matrix as a convex combination of at most
/// `(n-1)² + 1` permutation matrices.
pub fn birkhoff_decompose(d: &DoublyStochasticMatrix) -> Result<BirkhoffDecomposition> {
    let n = d.dim();
    let mut residual = d.matrix().map(|v| v.max(0.0));
    let mut terms: Vec<(f64, Permutation)> = Vec::new();
    loop {
        let max_entry = residual.iter().copied().fold(0.0, f64::max);
        if max_entry <= TOL_ENTRY {
            break;
        }
        let Some(perm) = perfect_matching(&residual) else {
            let mass = residual
                .row_iter()
                .map(|r| r.sum())
                .fold(0.0, f64::max);
            if mass <= TOL_RESIDUAL {
                break;
            }
            return Err(Error::NumericalDegeneracy { residual: mass });
        };
        let weight = perm
            .iter()
            .enumerate()
            .map(|(i, &j)| residual[(i, j)])
            .fold(f64::INFINITY, f64::min);
        for (i, &j) in perm.iter().enumerate() {
            let v = residual[(i, j)] - weight;
            residual[(i, j)] = if v <= TOL_ENTRY { 0.0 } else { v };
        }
        terms.push((weight, Permutation(perm)));
        if terms.len() > n * n + 1 {
            return Err(Error::NumericalDegeneracy {
                residual: residual.sum() / n as f64,
            });
        }
    }
    let limit = (n - 1) * (n - 1) + 1;
    while terms.len() > limit {
        caratheodory_step(&mut terms, n);
    }
    Ok(BirkhoffDecomposition { terms })
}

/// Removes one term without changing the weighted sum: finds `z` with
/// `Σ z_i P_i = 0` and `Σ z_i = 0`, then moves the weights along `-z` until one vanishes.
fn caratheodory_step(terms: &mut Vec<(f64, Permutation)>, n: usize) {
    let m = terms.len();
    let rows = n * n + 1;
    let mut a = RMatrix::zeros(rows, m);
    for (k, (_, p)) in terms.iter().enumerate() {
        for (i, &j) in p.0.iter().enumerate() {
            a[(i * n + j, k)] = 1.0;
        }
        a[(n * n, k)] = 1.0;
    }
    let gram = a.transpose() * &a;
    let eig = gram.symmetric_eigen();
    let kmin = eig
        .eigenvalues
        .iter()
        .enumerate()
        .min_by(|x, y| x.1.total_cmp(y.1))
        .map(|(k, _)| k)
        .expect("nonempty");
    let z = eig.eigenvectors.column(kmin).into_owned();
    let (drop, step) = terms
        .iter()
        .zip(z.iter())
        .enumerate()
        .filter(|(_, (_, &zk))| zk > 1e-12)
        .map(|(k, ((w, _), &zk))| (k, w / zk))
        .min_by(|x, y| x.1.total_cmp(&y.1))
        .expect("a null vector summing to zero has a positive entry");
    for ((w, _), &zk) in terms.iter_mut().zip(z.iter()) {
        *w -= step * zk;
    }
    terms.remove(drop);
    terms.retain(|(w, _)| *w > TOL_ENTRY);
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ds(rows: &[f64], n: usize) -> DoublyStochasticMatrix {
        DoublyStochasticMatrix::new(RMatrix::from_row_slice(n, n, rows), 1e-12).unwrap()
    }

    #[test]
    fn single_permutation() {
        let p = Permutation(vec![2, 0, 1]);
        let d = DoublyStochasticMatrix::new(p.matrix(), 1e-12).unwrap();
        let dec = birkhoff_decompose(&d).unwrap();
        assert_eq!(dec.terms.len(), 1);
        assert_eq!(dec.terms[0].1, p);
        assert!((dec.terms[0].0 - 1.0).abs() < 1e-15);
    }

    #[test]
    fn half_identity_half_swap() {
        let dec = birkhoff_decompose(&ds(&[0.5, 0.5, 0.5, 0.5], 2)).unwrap();
        assert_eq!(dec.terms.len(), 2);
        for (w, _) in &dec.terms {
            assert!((w - 0.5).abs() < 1e-15);
        }
    }

    #[test]
    fn full_support_respects_term_bound() {
        let n = 4;
        let d = ds(&[1.0 / n as f64; 16], n);
        let dec = birkhoff_decompose(&d).unwrap();
        assert!(dec.terms.len() <= (n - 1) * (n - 1) + 1);
        let err = (dec.reconstruct(n) - d.matrix()).abs().max();
        assert!(err < 1e-12);
    }
}
