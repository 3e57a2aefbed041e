use nalgebra::SymmetricEigen;

use crate::error::{Error, Result};
use crate::linalg::{Matrix, Vector};
use crate::sdp::problem::{SampleExpr, SdpProblem};

/// Relative eigenvalue cutoff for the numerical rank.
pub const RANK_TOL: f64 = 1e-7;
/// Relative tolerance on negative eigenvalues before a Gram matrix is rejected.
pub const PSD_TOL: f64 = 1e-8;

/// Factor `G = VᵀV` with `V = diag(√λ) Qᵀ` restricted to the numerically
/// nonzero spectrum. Returns `V` with one row per retained eigenvalue.
pub fn factor_gram(g: &Matrix) -> Result<Matrix> {
    if g.nrows() != g.ncols() {
        return Err(Error::DimensionMismatch {
            expected: g.nrows(),
            got: g.ncols(),
        });
    }
    let sym = (g + g.transpose()) * 0.5;
    let eig = SymmetricEigen::new(sym);
    let lmax = eig.eigenvalues.max().max(0.0);
    let lmin = eig.eigenvalues.min();
    if lmin < -PSD_TOL * lmax.max(1.0) {
        return Err(Error::NotPsd { min_eig: lmin });
    }
    let keep: Vec<usize> = (0..eig.eigenvalues.len())
        .filter(|&i| eig.eigenvalues[i] > RANK_TOL * lmax)
        .collect();
    let m = g.nrows();
    let mut v = Matrix::zeros(keep.len().max(1), m);
    for (r, &i) in keep.iter().enumerate() {
        let s = eig.eigenvalues[i].sqrt();
        for c in 0..m {
            v[(r, c)] = s * eig.eigenvectors[(c, i)];
        }
    }
    Ok(v)
}

/// Concrete worst-case instance recovered from a PEP Gram matrix.
#[derive(Debug, Clone)]
pub struct ReconstructedInstance {
    /// Rank of the Gram matrix (dimension of the realized space).
    pub rank: usize,
    pub basis: Matrix,
    pub points: Vec<(String, Vector)>,
    pub values: Vec<(String, Vector)>,
    /// `Tr(MᵢVᵀV) − bᵢ` per constraint.
    pub residuals: Vec<f64>,
    /// `||VᵀV − G||_F`.
    pub gram_error: f64,
    pub objective: f64,
}

impl ReconstructedInstance {
    pub fn max_residual(&self) -> f64 {
        self.residuals.iter().copied().fold(0.0, f64::max)
    }
}

fn realize(v: &Matrix, e: &Vector) -> Vector {
    v * e
}

pub fn reconstruct_instance(problem: &SdpProblem, g: &Matrix) -> Result<ReconstructedInstance> {
    if g.nrows() != problem.gram_dim {
        return Err(Error::DimensionMismatch {
            expected: problem.gram_dim,
            got: g.nrows(),
        });
    }
    let v = factor_gram(g)?;
    let gv = v.transpose() * &v;
    let gram_error = (&gv - g).norm();
    let residuals = problem.constraints.iter().map(|c| c.residual(&gv)).collect();
    let named = |s: &SampleExpr, f: &dyn Fn(&SampleExpr) -> &Vector| (s.label.to_string(), realize(&v, f(s)));
    let points = problem.samples.iter().map(|s| named(s, &|s| &s.point)).collect();
    let values = problem.samples.iter().map(|s| named(s, &|s| &s.value)).collect();
    let rank = if g.norm() == 0.0 { 0 } else { v.nrows() };
    Ok(ReconstructedInstance {
        rank,
        objective: problem.objective_value(&gv),
        basis: v,
        points,
        values,
        residuals,
        gram_error,
    })
}
