//! Small dense linear-algebra helpers shared by the numeric modules.

use nalgebra::{DMatrix, DVector, SymmetricEigen};

pub type Vector = DVector<f64>;
pub type Matrix = DMatrix<f64>;

/// Smallest eigenvalue of the symmetric part `(a + aᵀ)/2`.
pub fn min_sym_eig(a: &Matrix) -> f64 {
    let sym = (a + a.transpose()) * 0.5;
    sym_eigenvalues(&sym)
        .iter()
        .copied()
        .fold(f64::INFINITY, f64::min)
}

/// Eigenvalues of a symmetric matrix (unsorted).
pub fn sym_eigenvalues(a: &Matrix) -> Vector {
    if a.nrows() == 0 {
        return Vector::zeros(0);
    }
    SymmetricEigen::new(a.clone()).eigenvalues
}

/// Extreme eigenvalues `(min, max)` of a symmetric matrix.
pub fn sym_extreme_eigs(a: &Matrix) -> (f64, f64) {
    let ev = sym_eigenvalues(a);
    let lo = ev.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = ev.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    (lo, hi)
}

/// Spectral norm `||a||₂`, computed from the eigenvalues of `aᵀa`.
pub fn spectral_norm(a: &Matrix) -> f64 {
    if a.is_empty() {
        return 0.0;
    }
    let ata = a.transpose() * a;
    let (_, hi) = sym_extreme_eigs(&ata);
    hi.max(0.0).sqrt()
}

pub fn all_finite(v: &Vector) -> bool {
    v.iter().all(|c| c.is_finite())
}

pub fn dist_sq(a: &Vector, b: &Vector) -> f64 {
    (a - b).norm_squared()
}
