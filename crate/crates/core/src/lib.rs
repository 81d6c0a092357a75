//! Extreme-physical-information treatment of EPR-Bohm spin correlations.
//!
//! * [`model`]: closed-form joint probabilities, amplitudes, Fisher
//!   information in its three forms, channel capacities.
//! * [`solver`]: the generating equation `q″ = q/A²`, the determination of
//!   the amplitude constants, and the information-principle residuals.
//! * [`geometry`]: Rao-Fisher metric on the probability simplex and its
//!   pullback to θ-curves.
//! * [`estimation`]: outer-sample simulation, angle estimators and
//!   Rao-Cramér checks.
//! * [`rng`]: the counter-based generator behind every simulated sample.
//!
//! ```
//! use epi_core::{fisher_information_numeric, Angle, FisherForm, SpinModel};
//!
//! let photons = SpinModel::new(2).unwrap();
//! let i = fisher_information_numeric(Angle::new(0.3), photons, FisherForm::Epi, 1e-4).unwrap();
//! assert!((i - 4.0).abs() < 1e-6);
//! ```

pub mod error;
pub mod estimation;
pub mod geometry;
pub mod model;
pub mod numerics;
pub mod rng;
pub mod solver;

/// Crate version, recorded in CLI reports.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

pub use error::{EpiError, Result};
pub use estimation::{
    delta_variance_cell, estimate_cell, estimate_mle, estimation_report, frequencies, lrcb, rcf_inequality_report,
    sample, unbiasedness_experiment, unbiasedness_experiment_all, EstimationReport, EstimatorKind, ExperimentSummary,
    FrequencyVector, OuterSample, RcfReport,
};
pub use geometry::{
    induced_metric, lambda_metric_on_curve, metric_constancy_scan, metric_on_lambda_space, scan_grid, simplex_metric,
    to_amplitudes, AmplitudePoint, ConstancyScan, CurveOnSimplex, DerivativeMode, DiagonalMetric, MetricForm,
    SimplexPoint,
};
pub use model::{
    amplitude, amplitude_norm_integral, averaged_joint, channel_capacity, conditional_given_other, dependence_gap,
    fisher_information_closed, fisher_information_numeric, information_budget, joint_distribution, marginal_single,
    probability, shift_symmetry_residual, superadditivity_check, AmplitudeSet, Angle, FisherForm, Handedness,
    InformationBudget, JointDistribution, Outcome, PerOutcome, Sign, SpinLabel, SpinModel, Superadditivity,
};
pub use solver::{
    admissible_a, boundary_constant, classify_coefficient, classify_family, euler_lagrange_residual,
    euler_lagrange_residual_of, orthogonality_integral, regularity_scan, residual_maxima, scaled_metric_ratio,
    solve_amplitude_constants, solve_generating_ode, structural_principle_residual, structural_residual_of,
    ConstantSolveResult, EliminationStep, GeneratingEquation, OdeSolution, ResidualMaxima, SolutionFamily,
};
