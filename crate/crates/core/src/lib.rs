//! Maximum-likelihood reconstruction of density matrices from the counts of
//! sequential, mutually incompatible projective measurements, together with
//! least-squares and linear-inversion baselines and a Monte Carlo harness
//! for bias, variance and the Cramér–Rao bound.

pub mod alternatives;
pub mod data;
pub mod error;
pub mod likelihood;
pub mod linalg;
pub mod measurement;
pub mod sim;
pub mod state;

pub use data::{Dataset, Record};
pub use error::{Error, Result};
pub use likelihood::{EstimationResult, EstimatorConfig, InitialState};
pub use linalg::{CVector, ComplexMatrix};
pub use measurement::{Effect, ObservableBasis};
pub use state::DensityMatrix;
