//! Solver library for the radially symmetric Monge-Ampere Dirichlet problem
//! via a fourth-order singular perturbation (the vanishing moment method).
//!
//! The perturbed problem is solved through the reduced second-order equation
//! for w = r^{n-1} u_r, discretized with Hermite cubic finite elements and a
//! lagged-coefficient fixed-point iteration; the profile u, its derivatives,
//! and the Laplacian are reconstructed from w. Closed-form solutions of the
//! unperturbed problem serve as oracles for convergence-rate studies in the
//! perturbation parameter.

pub mod analysis;
pub mod assembly;
pub mod banded;
pub mod basis;
pub mod error;
pub mod field;
pub mod mesh;
pub mod problem;
pub mod quadrature;
pub mod reconstruction;
pub mod solver;

pub use analysis::{
    compute_errors, convexity_report, estimate_probe, fit_rate, layer_resolving_samples,
    ConvexityReport, ErrorReport, EstimateProbes, RateFit, ThetaWeight,
};
pub use assembly::{assemble_picard, singular_weight, BandedSystem};
pub use banded::{BandedLu, BandedMatrix};
pub use error::{Error, Result};
pub use field::HermiteField;
pub use mesh::RadialMesh;
pub use problem::{
    benchmark, validate_manufactured, AnalyticSolution, Benchmark, Branch, CumulativeSource,
    ExactSolution, ProblemSpec, RadialSolution, SourceFn, BENCHMARK_NAMES,
};
pub use quadrature::QuadratureRule;
pub use reconstruction::{
    eval_derivatives, reconstruct, solve_concave, solve_convex, SolutionField,
};
pub use solver::{
    initial_iterate, newton_step, solve, solve_continued, solve_from, strong_residual, Scheme,
    SolveConfig, SolveReport,
};
