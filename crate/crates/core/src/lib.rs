//! Last-iterate analysis toolkit for monotone variational inequalities.
//!
//! Runs extragradient-type methods, compiles performance-estimation SDPs,
//! solves them with an embedded ADMM solver, and verifies potential-function
//! proofs numerically and exactly.

pub mod certify;
pub mod error;
pub mod linalg;
pub mod methods;
pub mod metrics;
pub mod operators;
pub mod pep;
pub mod potentials;
pub mod sdp;

pub use error::{Error, Result};
pub use linalg::{Matrix, Vector};
pub use methods::{run, AnchorSchedule, MethodId, RunConfig, Trajectory};
pub use operators::{evaluate, project, random_monotone, FeasibleSet, OperatorKind, OperatorSpec};
pub use pep::{build_pep, InterpolationClass, PepObjective, PepSpec, SampleLabel};
pub use potentials::PotentialKind;
pub use sdp::{certify_solution, solve, CertifiedBound, SdpProblem, SdpSolution, SolveStatus, SolverSettings};
pub use certify::{default_report, verify_certificate, Certificate, Verdict};
