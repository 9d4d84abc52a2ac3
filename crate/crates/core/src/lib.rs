//! Reduction of invariant semilinear elliptic problems on rotationally
//! symmetric spaces to one-dimensional two-point problems.
//!
//! The pipeline: a [`measures::GeodesicMeasure`] `phi` describes the volume of
//! geodesic spheres; [`reduction`] changes variables `s = J(r)` so that the
//! radial equation becomes `z'' + q(s) f(z) = 0` with `q = b phi^2`;
//! [`solve`] produces solutions of the reduced problem on truncated domains;
//! [`hypotheses`] runs the numerical checks behind the existence theorem; and
//! [`laplacian`] applies the radial operator directly to lifted solutions as
//! an independent verification.

pub mod error;
pub mod hypotheses;
pub mod interp;
pub mod interval;
pub mod laplacian;
pub mod measures;
pub mod output;
pub mod quad;
pub mod reduction;
pub mod rk;
pub mod solve;

pub use error::{Error, Result};
pub use hypotheses::{
    check_hypotheses, CheckOutcome, EvidenceTable, HypothesisConfig, HypothesisReport, Verdict,
};
pub use interval::{Bound, EndSide, Interval};
pub use laplacian::{
    divergence_residual, radial_apply, RadialFunction, ResidualRow, ResidualTable, SmoothRadial,
};
pub use measures::{
    builtin_measure, measure_from_profile, reparametrize_arc_length, scalar_map, BuiltinMeasure,
    GeodesicMeasure, ProfileCurve, ScalarMap,
};
pub use reduction::{
    assemble_reduced, build_change_of_variables, probe_image, ChangeOfVariables, Coefficient,
    ImageProbe, Nonlinearity, ProbeOptions, ReducedProblem,
};
pub use solve::{
    csv_in_both_variables, lift_profile, solve_collocation, solve_linear, solve_shooting,
    solve_shooting_symmetric, CollocationInit, Method, SolutionProfile, TruncatedDomain, Variable,
};
