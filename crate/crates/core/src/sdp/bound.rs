use crate::error::{Error, Result};
use nalgebra::SymmetricEigen;

use crate::linalg::{sym_extreme_eigs, Matrix, Vector};

use super::admm::SdpSolution;
use super::problem::{svec, SdpProblem, Sense};

/// Multipliers below this are treated as rounding noise and clipped.
pub const DUAL_CLIP: f64 = 1e-12;
/// Relative roundoff allowance on the slack's smallest eigenvalue. PEP
/// slacks always have exact null directions (translation invariance), whose
/// computed eigenvalues scatter around zero at this level.
pub const PSD_ROUNDOFF: f64 = 1e-13;

/// Upper bound on the SDP optimum obtained from dual multipliers.
#[derive(Debug, Clone, PartialEq)]
pub struct CertifiedBound {
    /// `Σλᵢ bᵢ`.
    pub value: f64,
    pub dual_used: Vec<f64>,
    /// Smallest eigenvalue of `Σλᵢ Mᵢ − M₀`.
    pub psd_margin: f64,
    /// Amount added to the normalization multiplier to restore PSD-ness.
    pub repair: f64,
}

fn slack(problem: &SdpProblem, duals: &[f64]) -> Matrix {
    let mut z = -problem.objective.to_dense();
    for (c, &l) in problem.constraints.iter().zip(duals) {
        if l != 0.0 {
            for &(i, j, v) in &c.matrix.entries {
                z[(i, j)] += l * v;
                if i != j {
                    z[(j, i)] += l * v;
                }
            }
        }
    }
    z
}

fn margin_ok(mu: f64, scale: f64) -> bool {
    mu >= -PSD_ROUNDOFF * scale.max(1.0)
}

/// Weak-duality bound from `duals`. When the slack is slightly indefinite the
/// normalization multiplier is inflated (by bisection) until it is PSD.
pub fn certify_upper_bound(problem: &SdpProblem, duals: &[f64]) -> Result<CertifiedBound> {
    if duals.len() != problem.constraints.len() {
        return Err(Error::DimensionMismatch {
            expected: problem.constraints.len(),
            got: duals.len(),
        });
    }
    let mut lam = Vec::with_capacity(duals.len());
    for (c, &l) in problem.constraints.iter().zip(duals) {
        if !l.is_finite() {
            return Err(Error::InvalidInput("dual multipliers must be finite".into()));
        }
        match c.sense {
            Sense::Eq => lam.push(l),
            Sense::Le if l >= 0.0 => lam.push(l),
            Sense::Le if l >= -DUAL_CLIP => lam.push(0.0),
            Sense::Le => {
                return Err(Error::InvalidInput(format!("negative multiplier {l:e} on an inequality")))
            }
        }
    }
    let z = slack(problem, &lam);
    let scale = z.amax();
    let (mu, _) = sym_extreme_eigs(&z);
    let value = |lam: &[f64]| problem.constraints.iter().zip(lam).map(|(c, l)| c.rhs * l).sum::<f64>();
    if margin_ok(mu, scale) {
        return Ok(CertifiedBound {
            value: value(&lam),
            psd_margin: mu,
            dual_used: lam,
            repair: 0.0,
        });
    }

    let failed = Error::CertificationFailed { psd_margin: mu };
    let k = problem.normalization_index().ok_or(failed.clone())?;
    let norm = problem.constraints[k].matrix.to_dense();
    let (nmin, nmax) = sym_extreme_eigs(&norm);
    if nmin < -PSD_ROUNDOFF * nmax.abs().max(1.0) || nmax <= 0.0 {
        return Err(failed);
    }
    let check = |t: f64| {
        let zt = &z + &norm * t;
        let (m, _) = sym_extreme_eigs(&zt);
        (margin_ok(m, zt.amax()), m)
    };
    let mut hi = -mu / nmax;
    let mut found = None;
    for _ in 0..64 {
        let (ok, m) = check(hi);
        if ok {
            found = Some(m);
            break;
        }
        hi *= 2.0;
    }
    let mut margin = found.ok_or(failed)?;
    let mut lo = 0.0;
    for _ in 0..60 {
        let mid = 0.5 * (lo + hi);
        match check(mid) {
            (true, m) => {
                hi = mid;
                margin = m;
            }
            (false, _) => lo = mid,
        }
    }
    lam[k] += hi;
    Ok(CertifiedBound {
        value: value(&lam),
        dual_used: lam,
        psd_margin: margin,
        repair: hi,
    })
}

/// Removes the dual residual of an approximate solution before certifying.
///
/// With `Q₀` spanning the numerical null space of the solver's slack `Z`,
/// solves `Q₀ᵀ(Σ δᵢ Mᵢ)Q₀ = Q₀ᵀ(Z − Z(λ))Q₀` in least squares over
/// corrections on the active multipliers. The corrected slack then agrees
/// with `Z` on its null block up to second-order terms, and the range block
/// absorbs the rest. Multipliers driven negative leave the active set and
/// the system is solved again.
pub fn polish_duals(problem: &SdpProblem, duals: &[f64], z: &Matrix, g: Option<&Matrix>) -> Vec<f64> {
    polish_with_cutoff(problem, duals, z, g, 1e-12)
}

/// Singular-value cutoffs tried by [`certify_solution`]; larger cutoffs trade
/// exactness for smaller, better-conditioned corrections.
pub const POLISH_CUTOFFS: [f64; 4] = [1e-12, 1e-10, 1e-8, 1e-6];

fn polish_with_cutoff(problem: &SdpProblem, duals: &[f64], z: &Matrix, g: Option<&Matrix>, cutoff: f64) -> Vec<f64> {
    let m = problem.gram_dim;
    let lam_max = duals.iter().fold(0.0f64, |a, &b| a.max(b.abs()));
    let mut lam: Vec<f64> = duals
        .iter()
        .zip(&problem.constraints)
        .map(|(&l, c)| if c.sense == Sense::Le && l <= 1e-10 * lam_max { 0.0 } else { l })
        .collect();
    let eig = SymmetricEigen::new((z + z.transpose()) * 0.5);
    let zmax = eig.eigenvalues.max().max(0.0);
    let null: Vec<usize> = (0..m).filter(|&i| eig.eigenvalues[i] <= 1e-8 * zmax.max(1e-300)).collect();
    if null.is_empty() {
        return lam;
    }
    let q0 = Matrix::from_fn(m, null.len(), |r, c| eig.eigenvectors[(r, null[c])]);
    let block = |a: &Matrix| svec(&(q0.transpose() * a * &q0));
    let blocks: Vec<Vector> = problem.constraints.iter().map(|c| block(&c.matrix.to_dense())).collect();
    let mut tight: Vec<bool> = problem
        .constraints
        .iter()
        .map(|c| match g {
            Some(g) => c.residual(g).abs() <= 1e-7 * (1.0 + c.matrix.max_abs() * g.amax()),
            None => false,
        })
        .collect();
    for _ in 0..40 {
        let active: Vec<usize> = (0..lam.len())
            .filter(|&i| problem.constraints[i].sense == Sense::Eq || lam[i] > 0.0 || tight[i])
            .collect();
        let target = block(&(z - slack(problem, &lam)));
        let Some(step) = least_squares(&active.iter().map(|&i| &blocks[i]).collect::<Vec<_>>(), &target, cutoff) else {
            return lam;
        };
        let mut next = lam.clone();
        let mut dropped = Vec::new();
        for (c, &i) in active.iter().enumerate() {
            next[i] += step[c];
            if problem.constraints[i].sense == Sense::Le && next[i] < 0.0 {
                dropped.push(i);
            }
        }
        if dropped.is_empty() {
            return next;
        }
        for i in dropped {
            lam[i] = 0.0;
            tight[i] = false;
        }
    }
    lam
}

/// Least-squares coefficients expressing `target` in the given columns.
fn least_squares(cols: &[&Vector], target: &Vector, cutoff: f64) -> Option<Vec<f64>> {
    let k = cols.len();
    if k == 0 {
        return None;
    }
    let mut jac = Matrix::zeros(target.len(), k);
    for (c, v) in cols.iter().enumerate() {
        jac.set_column(c, v);
    }
    let scales: Vec<f64> = (0..k).map(|c| jac.column(c).norm().max(1e-300)).collect();
    for (c, s) in scales.iter().enumerate() {
        jac.column_mut(c).scale_mut(1.0 / s);
    }
    let svd = jac.svd(true, true);
    let sol = svd.solve(target, cutoff * svd.singular_values.max()).ok()?;
    Some((0..k).map(|c| sol[c] / scales[c]).collect())
}

/// Certifies a solver output: the raw multipliers and several polished
/// variants are each certified and the smallest valid bound is kept.
pub fn certify_solution(problem: &SdpProblem, sol: &SdpSolution) -> Result<CertifiedBound> {
    let mut best = certify_upper_bound(problem, &sol.duals);
    for cutoff in POLISH_CUTOFFS {
        let lam = polish_with_cutoff(problem, &sol.duals, &sol.dual_slack, Some(&sol.g), cutoff);
        if let Ok(b) = certify_upper_bound(problem, &lam) {
            if best.as_ref().map_or(true, |a| b.value < a.value) {
                best = Ok(b);
            }
        }
    }
    best
}
