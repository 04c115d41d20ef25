//! Seeded random sampling of states, unitaries, generators and stochastic matrices.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::Result;
use crate::lindblad::GksMatrix;
use crate::linalg::{c, identity, trace, CMatrix, RMatrix};
use crate::majorization::Permutation;
use crate::operators::OperatorBasis;
use crate::state::{validate_density, DensityMatrix, Tolerances};

pub type SeededRng = ChaCha8Rng;

pub fn seeded(seed: u64) -> SeededRng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn normal<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    rng.sample(StandardNormal)
}

/// Matrix of i.i.d. standard complex Gaussians.
pub fn ginibre<R: Rng + ?Sized>(n: usize, rng: &mut R) -> CMatrix {
    CMatrix::from_fn(n, n, |_, _| c(normal(rng), normal(rng)) * std::f64::consts::FRAC_1_SQRT_2)
}

/// Haar-distributed unitary (QR of a Ginibre matrix with phase fix).
pub fn haar_unitary<R: Rng + ?Sized>(n: usize, rng: &mut R) -> CMatrix {
    let qr = ginibre(n, rng).qr();
    let (q, rm) = (qr.q(), qr.r());
    let mut u = q;
    for j in 0..n {
        let d = rm[(j, j)];
        let phase = if d.norm() > 0.0 { d / d.norm() } else { c(1.0, 0.0) };
        for i in 0..n {
            u[(i, j)] *= phase;
        }
    }
    u
}

/// Haar-uniform SU(2) element from a normalized Gaussian quaternion.
pub fn haar_su2<R: Rng + ?Sized>(rng: &mut R) -> CMatrix {
    let q: [f64; 4] = std::array::from_fn(|_| normal(rng));
    let norm = q.iter().map(|v| v * v).sum::<f64>().sqrt();
    let [a, b, cc, d] = q.map(|v| v / norm);
    CMatrix::from_row_slice(2, 2, &[c(a, b), c(cc, d), c(-cc, d), c(a, -b)])
}

/// Haar-uniform rotation in SO(n).
pub fn haar_rotation<R: Rng + ?Sized>(n: usize, rng: &mut R) -> RMatrix {
    let g = RMatrix::from_fn(n, n, |_, _| normal(rng));
    let qr = g.qr();
    let (mut q, rm) = (qr.q(), qr.r());
    for j in 0..n {
        if rm[(j, j)] < 0.0 {
            for i in 0..n {
                q[(i, j)] = -q[(i, j)];
            }
        }
    }
    if q.determinant() < 0.0 {
        for i in 0..n {
            q[(i, 0)] = -q[(i, 0)];
        }
    }
    q
}

pub fn random_hermitian<R: Rng + ?Sized>(n: usize, rng: &mut R) -> CMatrix {
    let g = ginibre(n, rng);
    (&g + g.adjoint()).scale(0.5)
}

/// Full-rank random state `G G† / Tr(G G†)`.
pub fn random_density<R: Rng + ?Sized>(n: usize, rng: &mut R) -> DensityMatrix {
    let g = ginibre(n, rng);
    let m = &g * g.adjoint();
    let tr = trace(&m).re;
    validate_density(&m.scale(1.0 / tr), &Tolerances::default()).expect("Wishart state is valid")
}

/// `c c†` for the coefficients of `op` (minus its trace part) in `basis`.
pub fn jump_gks(basis: &OperatorBasis, op: &CMatrix, rate: f64) -> CMatrix {
    let n = basis.dim();
    let traceless = op - identity(n) * (trace(op) / c(n as f64, 0.0));
    let coeffs = nalgebra::DVector::from_vec(basis.coefficients(&traceless));
    (&coeffs * coeffs.adjoint()).scale(rate)
}

/// Unital GKS matrix: a real symmetric PSD part plus jumps along normal operators.
pub fn random_unital_gks<R: Rng + ?Sized>(basis: &OperatorBasis, rng: &mut R) -> GksMatrix {
    let n = basis.dim();
    let d = basis.len();
    let b = RMatrix::from_fn(d, d, |_, _| normal(rng));
    let scale = rng.random_range(0.05..0.5) / d as f64;
    let mut a = (&b * b.transpose()).map(|v| c(v * scale, 0.0));
    for _ in 0..rng.random_range(1..=2) {
        let w = haar_unitary(n, rng);
        let z: Vec<_> = (0..n).map(|_| c(normal(rng), normal(rng))).collect();
        let normal_op = &w * CMatrix::from_diagonal(&nalgebra::DVector::from_vec(z)) * w.adjoint();
        a += jump_gks(basis, &normal_op, rng.random_range(0.05..0.5));
    }
    GksMatrix::new(a, &Tolerances::default()).expect("constructed PSD")
}

/// Non-unital GKS matrix from generic (non-normal) jump operators.
pub fn random_nonunital_gks<R: Rng + ?Sized>(basis: &OperatorBasis, rng: &mut R) -> GksMatrix {
    let n = basis.dim();
    let d = basis.len();
    let mut a = CMatrix::zeros(d, d);
    for _ in 0..rng.random_range(1..=2) {
        let op = ginibre(n, rng);
        a += jump_gks(basis, &op, rng.random_range(0.2..1.0));
    }
    GksMatrix::new(a, &Tolerances::default()).expect("constructed PSD")
}

/// Convex combination of `terms` random permutations.
pub fn random_permutation_mixture<R: Rng + ?Sized>(
    n: usize,
    terms: usize,
    rng: &mut R,
) -> (Vec<(f64, Permutation)>, RMatrix) {
    let mut weights: Vec<f64> = (0..terms).map(|_| rng.random_range(0.05..1.0)).collect();
    let total: f64 = weights.iter().sum();
    weights.iter_mut().for_each(|w| *w /= total);
    let mut m = RMatrix::zeros(n, n);
    let mut out = Vec::with_capacity(terms);
    for w in weights {
        let mut perm: Vec<usize> = (0..n).collect();
        for i in (1..n).rev() {
            let j = rng.random_range(0..=i);
            perm.swap(i, j);
        }
        for (i, &j) in perm.iter().enumerate() {
            m[(i, j)] += w;
        }
        out.push((w, Permutation(perm)));
    }
    (out, m)
}

/// Full-support doubly stochastic matrix by Sinkhorn balancing.
pub fn random_sinkhorn<R: Rng + ?Sized>(n: usize, rng: &mut R) -> RMatrix {
    let mut m = RMatrix::from_fn(n, n, |_, _| rng.random_range(0.01..1.0));
    for _ in 0..10_000 {
        for mut row in m.row_iter_mut() {
            let s = row.sum();
            row /= s;
        }
        for mut col in m.column_iter_mut() {
            let s = col.sum();
            col /= s;
        }
        let worst = m
            .row_iter()
            .map(|r| (r.sum() - 1.0).abs())
            .fold(0.0, f64::max);
        if worst < 1e-15 {
            break;
        }
    }
    m
}

/// Random point of the probability simplex.
pub fn random_simplex<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Vec<f64> {
    let v: Vec<f64> = (0..n).map(|_| -rng.random_range(1e-12_f64..1.0).ln()).collect();
    let s: f64 = v.iter().sum();
    v.into_iter().map(|x| x / s).collect()
}

/// Random valid density matrix with a prescribed spectrum.
pub fn density_with_spectrum<R: Rng + ?Sized>(spectrum: &[f64], rng: &mut R) -> Result<DensityMatrix> {
    let u = haar_unitary(spectrum.len(), rng);
    let m = &u * crate::linalg::diag(spectrum) * u.adjoint();
    validate_density(&m, &Tolerances::default())
}
