//! Synthetic experiments: seeded sampling, Fisher information and Monte
//! Carlo ensembles.

pub mod ensemble;
pub mod fisher;
pub mod plan;
pub mod rng;

pub use ensemble::{
    run_ensemble, run_ensemble_with, EnsembleOptions, EnsembleReport, EstimatorKind, EstimatorStats,
};
pub use fisher::{crb_variance, fisher_information, Parametrization};
pub use plan::{expected_dataset, sample_dataset, MeasurementPlan, Observable};
