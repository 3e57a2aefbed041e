//! Embedded SDP solver, dual certification and SDPA I/O.

mod admm;
mod bound;
mod dense;
pub mod problem;
mod sdpa;

pub use admm::{solve, SdpSolution, SolveStatus, SolverSettings};
pub use bound::{certify_solution, certify_upper_bound, polish_duals, CertifiedBound, DUAL_CLIP, PSD_ROUNDOFF};
pub use problem::{
    smat, svec, svec_index, svec_len, svec_sparse, BasisSymbol, Constraint, ConstraintTag, InterpKind,
    SampleExpr, SdpProblem, Sense, SymSparse,
};
pub use sdpa::{parse_sdpa, to_sdpa};

use crate::error::{Error, Result};
use crate::pep::{build_pep, reconstruct_instance, PepObjective, PepSpec, ReconstructedInstance, SampleLabel};

/// Outcome of a sign study of a Δ-type PEP.
#[derive(Debug, Clone)]
pub enum DeltaSign {
    /// The certified upper bound is at most the tolerance.
    NonpositiveCertified { bound: f64 },
    /// A reconstructed instance shows a strict increase.
    PositiveWitnessed {
        objective: f64,
        /// `||g_new||² − ||g_old||²` recomputed from the realized vectors.
        increase: f64,
        witness: Box<ReconstructedInstance>,
    },
}

/// Constraint residual allowed on a reconstructed witness, relative to the
/// normalization.
pub const WITNESS_TOL: f64 = 1e-6;

/// Labels whose operator values the Δ objective compares, newest first.
fn delta_labels(spec: &PepSpec) -> Result<(SampleLabel, SampleLabel)> {
    let n = spec.n;
    match spec.objective {
        PepObjective::DeltaNormSq => Ok((SampleLabel::X(n + 1), SampleLabel::X(n))),
        PepObjective::DeltaNormSqTilde => Ok((SampleLabel::Xt(n), SampleLabel::Xt(n - 1))),
        other => Err(Error::WrongSetting(format!(
            "sign study needs a delta objective, got {}",
            other.name()
        ))),
    }
}

/// Decides the sign of a Δ-type PEP: nonpositive via a certified dual bound
/// below `tol`, or positive via a replayed witness whose increase exceeds
/// `tol`.
pub fn delta_sign(spec: &PepSpec, settings: &SolverSettings, tol: f64) -> Result<DeltaSign> {
    let (new, old) = delta_labels(spec)?;
    let problem = build_pep(spec)?;
    let sol = solve(&problem, settings)?;
    if matches!(sol.status, SolveStatus::Unbounded | SolveStatus::Infeasible) {
        return Err(Error::Inconclusive(format!("solver reported {}", sol.status)));
    }
    if sol.objective > tol {
        let inst = reconstruct_instance(&problem, &sol.g)?;
        let value = |label| {
            inst.values
                .iter()
                .find(|(name, _)| *name == SampleLabel::to_string(&label))
                .map(|(_, v)| v.norm_squared())
                .ok_or(Error::NotSampled)
        };
        let increase = value(new)? - value(old)?;
        if increase > tol && inst.max_residual() <= WITNESS_TOL {
            return Ok(DeltaSign::PositiveWitnessed {
                objective: sol.objective,
                increase,
                witness: Box::new(inst),
            });
        }
    }
    match certify_solution(&problem, &sol) {
        Ok(b) if b.value <= tol => Ok(DeltaSign::NonpositiveCertified { bound: b.value }),
        Ok(b) => Err(Error::Inconclusive(format!(
            "objective {:.3e}, certified bound {:.3e}",
            sol.objective, b.value
        ))),
        Err(e) => Err(Error::Inconclusive(format!("objective {:.3e}; {e}", sol.objective))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::Matrix;
    use crate::methods::MethodId;

    fn toy(obj: Matrix) -> SdpProblem {
        let tr = SymSparse::from_dense(&Matrix::identity(2, 2));
        SdpProblem::new(
            2,
            SymSparse::from_dense(&obj),
            vec![Constraint::le(tr, 1.0, ConstraintTag::Normalization)],
        )
    }

    #[test]
    fn eigenvalue_toys() {
        let s = SolverSettings::default();
        let p = toy(Matrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, 0.0]));
        let sol = solve(&p, &s).unwrap();
        assert_eq!(sol.status, SolveStatus::Solved);
        assert!((sol.objective - 1.0).abs() < 1e-6);
        assert!((sol.g[(0, 0)] - 1.0).abs() < 1e-5 && sol.g[(1, 1)].abs() < 1e-5);

        let p = toy(Matrix::from_row_slice(2, 2, &[0.0, 0.5, 0.5, 0.0]));
        let sol = solve(&p, &s).unwrap();
        assert!((sol.objective - 0.5).abs() < 1e-6);
    }

    #[test]
    fn toy_certificates() {
        let p = toy(Matrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, 0.0]));
        let b = certify_upper_bound(&p, &[1.0]).unwrap();
        assert_eq!(b.value, 1.0);
        assert!(b.psd_margin.abs() < 1e-15);
        // zero duals: slack −M₀ is repaired through the trace row
        let b = certify_upper_bound(&p, &[0.0]).unwrap();
        assert!(b.value >= 1.0 - 1e-12);
        assert!(certify_upper_bound(&p, &[-1.0]).is_err());
    }

    #[test]
    fn zero_duals_fail_without_normalization() {
        let obj = SymSparse::from_dense(&Matrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, 0.0]));
        let c = Constraint::le(SymSparse::from_dense(&Matrix::identity(2, 2)), 1.0, ConstraintTag::Generic);
        let p = SdpProblem::new(2, obj, vec![c]);
        assert!(matches!(
            certify_upper_bound(&p, &[0.0]),
            Err(Error::CertificationFailed { .. })
        ));
    }

    #[test]
    fn unbounded_detected() {
        // maximize G₀₀ subject only to G₁₁ ≤ 1
        let obj = SymSparse::from_triplets(2, [(0, 0, 1.0)]);
        let c = Constraint::le(SymSparse::from_triplets(2, [(1, 1, 1.0)]), 1.0, ConstraintTag::Generic);
        let sol = solve(&SdpProblem::new(2, obj, vec![c]), &SolverSettings::default()).unwrap();
        assert_eq!(sol.status, SolveStatus::Unbounded);
    }

    #[test]
    fn infeasible_detected() {
        // Tr(G) ≤ −1 with G ⪰ 0
        let obj = SymSparse::from_triplets(2, [(0, 0, 1.0)]);
        let c = Constraint::le(SymSparse::from_dense(&Matrix::identity(2, 2)), -1.0, ConstraintTag::Generic);
        let sol = solve(&SdpProblem::new(2, obj, vec![c]), &SolverSettings::default()).unwrap();
        assert_eq!(sol.status, SolveStatus::Infeasible);
    }

    #[test]
    fn sdpa_round_trip() {
        let p = build_pep(&PepSpec::new(MethodId::PEG, 0.3, 1.0, 2)).unwrap();
        let q = parse_sdpa(&to_sdpa(&p)).unwrap();
        assert_eq!(q.gram_dim, p.gram_dim);
        assert_eq!(q.objective, p.objective);
        for (a, b) in p.constraints.iter().zip(&q.constraints) {
            assert_eq!(a.matrix, b.matrix);
            assert_eq!(a.rhs, b.rhs);
            assert_eq!(a.sense, b.sense);
        }
        assert!(parse_sdpa("1\n1\n2\n").is_err());
    }

    #[test]
    fn small_peg_pep_is_certified() {
        let p = build_pep(&PepSpec::new(MethodId::PEG, 1.0 / 3.0, 1.0, 1)).unwrap();
        let sol = solve(&p, &SolverSettings::default()).unwrap();
        assert_eq!(sol.status, SolveStatus::Solved);
        let b = certify_solution(&p, &sol).unwrap();
        assert!(b.value >= sol.objective - 1e-8, "{} vs {}", b.value, sol.objective);
        assert!(b.value <= sol.objective + 1e-5, "{b:?} {sol:?}");
    }

    #[test]
    fn delta_sign_outcomes() {
        let s = SolverSettings::default();
        // one PEG step can increase the operator norm: the optimum is 1/72
        let spec = PepSpec::new(MethodId::PEG, 1.0 / 3.0, 1.0, 1).with_objective(PepObjective::DeltaNormSq);
        match delta_sign(&spec, &s, 1e-5).unwrap() {
            DeltaSign::PositiveWitnessed { objective, increase, witness } => {
                assert!((objective - 1.0 / 72.0).abs() < 1e-5);
                assert!((increase - objective).abs() < 1e-5);
                assert!(witness.max_residual() <= WITNESS_TOL);
            }
            other => panic!("{other:?}"),
        }
        let spec = PepSpec::new(MethodId::Gradient, 0.5, 1.0, 1).with_objective(PepObjective::DeltaNormSq);
        assert!(matches!(delta_sign(&spec, &s, 1e-5), Err(Error::WrongSetting(_))));
        assert!(delta_sign(&PepSpec::new(MethodId::PEG, 0.3, 1.0, 1), &s, 1e-5).is_err());
    }
}
