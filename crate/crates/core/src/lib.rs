//! Numerical laboratory for the fractional g-Laplacian of Orlicz type.
//!
//! The numerical core is generic over the scalar type (`f32` or `f64`); the
//! aliases at the bottom of this file fix it to `f64`.

pub mod error;
pub mod field;
pub mod operator;
pub mod qualitative;
pub mod quadrature;
pub mod real;
pub mod sampling;
pub mod solver;
pub mod young;

pub use error::{Error, Result};
pub use field::{
    check_tail_membership, AnalyticField, ExteriorModel, GridField, GridSpec, Isometry,
    ScalarField, SupportBall, TailProfile, TailReport,
};
pub use operator::{
    eval_at_points, eval_fracg, eval_on_grid, holder_quotient, perturbation_gap, FracGOperator,
    GridEvaluation, KernelModel, KernelShape, OperatorParams, OperatorValue, PerturbationGap,
    TailMode,
};
pub use qualitative::{
    boundary_estimate_probe, check_antisymmetric_mp, check_max_principle, liouville_probe,
    moving_planes_audit, whole_space_symmetry_probe, AntisymmetricField, HalfSpace, MPReport,
    ProbeSet, ReflectionFrame, SymmetryReport, Verdict,
};
pub use real::Real;
pub use sampling::SampleRange;
pub use solver::{
    refine_study, residual, solve_dirichlet, solve_dirichlet_from, ConvergenceReport, Domain,
    Method, Nonlinearity, NonlinearityKind, Problem, Rhs, Solution, SolverConfig,
};
pub use young::{
    certify_all, certify_delta2, certify_desig, certify_lemita, certify_lemma22,
    certify_scaling, estimate_indices, make_builtin, Family, FamilyKind, InequalityReport,
    LemmaId,
};

pub type YoungFunction64 = young::YoungFunction<f64>;
pub type YoungFunction32 = young::YoungFunction<f32>;
pub type ScalarField64 = field::ScalarField<f64>;
pub type GridField64 = field::GridField<f64>;
pub type OperatorParams64 = operator::OperatorParams<f64>;
pub type Problem64 = solver::Problem<f64>;
pub type Solution64 = solver::Solution<f64>;
