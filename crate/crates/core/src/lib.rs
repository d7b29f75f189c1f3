//! Quasi-likelihood estimation and testing for discretely observed
//! ergodic jump-diffusion processes.
//!
//! The crate is organised bottom-up:
//!
//! - [`model`]: parameter vectors, bounds, and model coefficient functions
//!   (with the Lévy-driven Ornstein–Uhlenbeck model built in),
//! - [`simulate`]: exact and Euler path simulation with reproducible seeding,
//! - [`filters`]: threshold classification of increments,
//! - [`likelihood`]: the adaptive and joint quasi-log likelihoods,
//! - [`estimate`]: closed-form and optimizer-based estimators,
//! - [`inference`]: asymptotic covariance, the quasi-likelihood ratio
//!   statistic and its χ² calibration,
//! - [`montecarlo`]: the replication harness and its CSV/JSON export.

pub mod error;
pub mod estimate;
pub mod filters;
pub mod inference;
pub mod io;
pub mod likelihood;
pub mod model;
pub mod montecarlo;
pub mod numeric;
pub mod optimize;
pub mod rng;
pub mod simulate;
pub mod stats;

pub use error::{Error, Result};
pub use estimate::{
    estimate_adaptive, estimate_adaptive_generic, estimate_adaptive_levy_ou, estimate_constrained,
    estimate_joint, estimate_joint_levy_ou, Constraint, EstimateResult, EstimationConfig, EstimatorKind, LoglikParts,
    Method,
};
pub use filters::{classify, cutoff, IncrementClassification, Threshold, ThresholdConfig};
pub use inference::{
    asymptotic_covariance_levy_ou, chi2_cdf, chi2_quantile, decide_test, estimate_mu2,
    qlr_statistic, standardize, AsymptoticInfo, TestResult,
};
pub use likelihood::{qll_diffusion, qll_drift, qll_joint, qll_joint_continuous, qll_jump, QllContext};
pub use model::{levy_ou_model, LevyOuParams, ModelSpec, ParamBounds, ParamLayout, ParamVector};
pub use optimize::{nelder_mead, OptimizerSettings};
pub use simulate::{simulate_generic, simulate_levy_ou, stationary_start, InitialState, Path, PathConfig};
pub use montecarlo::{
    export_report, run_estimation_study, run_study, run_test_study, HRule, SlotValues, StudyConfig, StudyKind,
    StudyReport, ThresholdGrid,
};
