//! Canonical correlation analysis under a spiked covariance model, in the
//! high-dimension low-sample-size regime.
//!
//! The library builds the population covariance structure (one spiked
//! eigenvalue per block, a single correlated canonical pair), samples
//! Gaussian data through a structured covariance square root, estimates
//! canonical components with pseudoinverse whitening, evaluates the
//! closed-form limits the components converge to as the dimension grows
//! with the sample size fixed, and drives Monte-Carlo grids that compare
//! the two.
//!
//! Numerical code is generic over the scalar type through [`Real`];
//! concrete `f64` aliases for the main types live at the crate root.

pub mod error;
pub mod estimator;
pub mod harness;
pub mod io;
pub mod limits;
pub mod linalg;
pub mod model;
pub mod sample;
pub mod scalar;

pub use error::{Error, Result};
pub use estimator::{
    alignment, cca_fit, cca_fit_from_moments, sample_moments, whitened_correlation_core,
    Alignment, CcaEstimate, FitDiagnostics, FitOptions, SampleMoments,
};
pub use harness::{
    load_grid_config, run_grid, run_grid_to_dir, run_rep, summarize, CellContext, CellSummary,
    ComponentMetrics, GridConfig, GridOutput, MetricStats, RepRecord,
};
pub use limits::{
    limit_rho1, predicted_limits, theorem1_constants, LimitPrediction, PcEigvalLaw, Regime,
    Theorem1Constants,
};
pub use model::{PopulationModel, SpikedParams, StructuredSqrt};
pub use sample::{gaussian_matrix, generate_dataset, DataSet, SeedRecord};
pub use scalar::Real;

/// Double-precision aliases for the generic core types.
pub type SpikedParams64 = model::SpikedParams<f64>;
pub type PopulationModel64 = model::PopulationModel<f64>;
pub type StructuredSqrt64 = model::StructuredSqrt<f64>;
pub type DataSet64 = sample::DataSet<f64>;
pub type SampleMoments64 = estimator::SampleMoments<f64>;
pub type CcaEstimate64 = estimator::CcaEstimate<f64>;
pub type FitOptions64 = estimator::FitOptions<f64>;
pub type Theorem1Constants64 = limits::Theorem1Constants<f64>;
pub type LimitPrediction64 = limits::LimitPrediction<f64>;
