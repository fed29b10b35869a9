//! Monte Carlo laboratory for the iterated Lévy transformation of Brownian motion.
//!
//! The crate is organised bottom-up:
//!
//! - [`grid`]: uniform time grids and reproducible Brownian path streams,
//! - [`transform`]: the Lévy transform (Itô sum and Tanaka forms), its iterates and sign products,
//! - [`hitting`]: grid detection of the stopping time `τ_{r,C}` at finite iteration depth,
//! - [`estimators`]: closed-form oracles, Monte Carlo estimators and the KS test,
//! - [`harness`]: config parsing, experiment pipelines and CSV persistence,
//! - [`exec`]: the chunked map-reduce used by every estimator (rayon behind the `parallel` feature).

pub mod error;
pub mod estimators;
pub mod exec;
pub mod grid;
pub mod harness;
pub mod hitting;
pub mod transform;

pub use error::{LabError, Result};
pub use estimators::{
    estimate_sign_covariance, estimate_tau_scan, ks_test, mixing_bound_check, sign_cov_closed_form,
    sup_abs_tail_analytic, BoundReport, CovarianceSeries, EstimateWithCI, KsResult, TauCell,
    TauScan,
};
pub use exec::Execution;
pub use grid::{make_grid, sample_path, Path, SeedSpec, TimeGrid};
pub use harness::{
    load_config, run_experiment, write_results, ExperimentConfig, ExperimentKind, ResultRow,
    ResultSet,
};
pub use hitting::{tau_estimate, zero_crossing_intervals, TauResult};
pub use transform::{
    iterate_transforms, levy_transform_integral, levy_transform_tanaka, local_time_occupation,
    sign_conv, sign_product, LocalTimeSeries, PathStack, SignConvention, SignSeries,
};
