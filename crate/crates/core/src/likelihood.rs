//! Log-likelihood of a state given pooled frequencies and the fixed-point
//! solver for its maximum.
//!
//! The maximum-likelihood state satisfies the extremal operator equation
//!
//! ```text
//!     R(ρ) ρ = ρ,     R(ρ) = Σ_i (f_i / ⟨y_i|ρ|y_i⟩) |y_i⟩⟨y_i|
//! ```
//!
//! with the Lagrange multiplier of the trace constraint normalized to one.
//! [`estimate_ml`] iterates the symmetric map `ρ → R_μ ρ R_μ / Tr(·)` with
//! `R_μ = (1 − μ) I + μ R`, which keeps every iterate Hermitian and positive.
//! `μ` starts at the configured dilution and is halved whenever a step
//! would lower the likelihood, or, when the change in likelihood is below
//! rounding noise, whenever it would fail to reduce the fixed-point residual.
//!
//! Probabilities of observed outcomes are floored at `floor` inside both the
//! logarithm and the ratio `f_i / ρ_ii`; records with `f_i = 0` never enter.
//!
//! On the support of a solution the weighted effects `(f_i/ρ_ii)|y_i⟩⟨y_i|`
//! resolve the identity. This crate takes "support" to mean the span of the
//! estimate's eigenvectors with eigenvalue above a rank tolerance, see
//! [`check_subspace_completeness`].

use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::linalg::ComplexMatrix;
use crate::state::{raw_probability, DensityMatrix};

/// Default probability floor.
pub const DEFAULT_FLOOR: f64 = 1e-12;

/// How many times the mixing weight is halved before a step is abandoned.
pub const MAX_HALVINGS: u32 = 30;

/// Likelihood changes smaller than this many nats are rounding noise in the
/// sum of logarithms.
const LIKELIHOOD_NOISE: f64 = 1e-13;

#[derive(Debug, Clone, PartialEq)]
pub enum InitialState {
    MaximallyMixed,
    Provided(DensityMatrix),
}

#[derive(Debug, Clone, PartialEq)]
pub struct EstimatorConfig {
    /// Threshold on the max-entry norm of `Rρ − ρ`.
    pub tolerance: f64,
    pub max_iterations: usize,
    /// Initial mixing weight `μ ∈ (0, 1]` of `R` against the identity.
    pub dilution: f64,
    /// Lower bound applied to `⟨y_i|ρ|y_i⟩` of observed outcomes.
    pub floor: f64,
    pub initial_state: InitialState,
}

impl Default for EstimatorConfig {
    fn default() -> Self {
        Self {
            tolerance: 1e-8,
            max_iterations: 10_000,
            dilution: 1.0,
            floor: DEFAULT_FLOOR,
            initial_state: InitialState::MaximallyMixed,
        }
    }
}

impl EstimatorConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.tolerance > 0.0 && self.tolerance.is_finite()) {
            return Err(Error::InvalidConfig(format!(
                "tolerance {} must be > 0",
                self.tolerance
            )));
        }
        if !(self.dilution > 0.0 && self.dilution <= 1.0) {
            return Err(Error::InvalidConfig(format!(
                "dilution {} must lie in (0, 1]",
                self.dilution
            )));
        }
        if !(self.floor > 0.0 && self.floor < 1e-6) {
            return Err(Error::InvalidConfig(format!(
                "floor {} must lie in (0, 1e-6)",
                self.floor
            )));
        }
        if self.max_iterations == 0 {
            return Err(Error::InvalidConfig(
                "max_iterations must be positive".into(),
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct EstimationResult {
    pub estimate: DensityMatrix,
    /// Log-likelihood per shot of the initial state and of every accepted iterate.
    pub log_likelihood_trace: Vec<f64>,
    pub iterations: usize,
    /// Max-entry norm of `Rρ − ρ` at the returned estimate.
    pub fixed_point_residual: f64,
    pub converged: bool,
}

impl EstimationResult {
    pub fn log_likelihood(&self) -> f64 {
        *self
            .log_likelihood_trace
            .last()
            .expect("trace holds the initial value")
    }
}

fn check_dims(state: &DensityMatrix, data: &Dataset) -> Result<()> {
    if state.dim() != data.dim() {
        return Err(Error::DimensionMismatch {
            expected: data.dim(),
            found: state.dim(),
        });
    }
    Ok(())
}

fn probabilities(state: &DensityMatrix, data: &Dataset) -> Vec<f64> {
    data.records()
        .iter()
        .map(|r| raw_probability(state, &r.effect))
        .collect()
}

fn likelihood_from(freqs: &[f64], probs: &[f64], floor: f64) -> f64 {
    freqs
        .iter()
        .zip(probs)
        .filter(|(f, _)| **f > 0.0)
        .map(|(f, p)| f * p.max(floor).ln())
        .sum()
}

fn r_from(data: &Dataset, freqs: &[f64], probs: &[f64], floor: f64) -> ComplexMatrix {
    let mut r = ComplexMatrix::zeros(data.dim());
    for ((record, f), p) in data.records().iter().zip(freqs).zip(probs) {
        if *f > 0.0 {
            r = &r + &record.effect.projector().scale(f / p.max(floor));
        }
    }
    r
}

/// `F = Σ_i f_i ln ⟨y_i|ρ|y_i⟩` in nats per shot, with the default floor.
pub fn log_likelihood(state: &DensityMatrix, data: &Dataset) -> Result<f64> {
    log_likelihood_with_floor(state, data, DEFAULT_FLOOR)
}

pub fn log_likelihood_with_floor(state: &DensityMatrix, data: &Dataset, floor: f64) -> Result<f64> {
    check_dims(state, data)?;
    Ok(likelihood_from(
        &data.frequencies(),
        &probabilities(state, data),
        floor,
    ))
}

/// `R = Σ_i (f_i / max(ρ_ii, floor)) |y_i⟩⟨y_i|` over records with `f_i > 0`.
pub fn build_r(state: &DensityMatrix, data: &Dataset, floor: f64) -> Result<ComplexMatrix> {
    check_dims(state, data)?;
    Ok(r_from(
        data,
        &data.frequencies(),
        &probabilities(state, data),
        floor,
    ))
}

/// Max-entry norm of `Rρ − ρ`; zero exactly at a solution of the extremal equation.
pub fn extremal_residual(state: &DensityMatrix, data: &Dataset) -> Result<f64> {
    let r = build_r(state, data, DEFAULT_FLOOR)?;
    Ok(fixed_point_gap(&r, state))
}

fn fixed_point_gap(r: &ComplexMatrix, state: &DensityMatrix) -> f64 {
    (&(r * state.matrix()) - state.matrix()).max_abs()
}

/// Solves `R(ρ)ρ = ρ` by the diluted symmetric iteration.
///
/// Running out of iterations, or failing to find an ascending step after
/// [`MAX_HALVINGS`] halvings, is not an error: the last iterate is returned
/// with `converged = false`.
pub fn estimate_ml(data: &Dataset, config: &EstimatorConfig) -> Result<EstimationResult> {
    config.validate()?;
    let dim = data.dim();
    let mut state = match &config.initial_state {
        InitialState::MaximallyMixed => DensityMatrix::maximally_mixed(dim),
        InitialState::Provided(s) => {
            check_dims(s, data)?;
            s.clone()
        }
    };
    let freqs = data.frequencies();
    let identity = ComplexMatrix::identity(dim);
    let floor = config.floor;

    let probs = probabilities(&state, data);
    let mut likelihood = likelihood_from(&freqs, &probs, floor);
    let mut trace = vec![likelihood];
    let mut iterations = 0;
    let mut r = r_from(data, &freqs, &probs, floor);
    let mut residual = fixed_point_gap(&r, &state);

    while residual > config.tolerance && iterations < config.max_iterations {
        let mut mu = config.dilution;
        let mut step = None;
        for _ in 0..=MAX_HALVINGS {
            let mixed = &identity.scale(1.0 - mu) + &r.scale(mu);
            let unnormalized = &(&mixed * state.matrix()) * &mixed;
            let norm = unnormalized.trace().re;
            if norm > 0.0 && norm.is_finite() {
                let candidate = DensityMatrix::new(unnormalized.scale(1.0 / norm))?;
                let candidate_probs = probabilities(&candidate, data);
                let candidate_likelihood = likelihood_from(&freqs, &candidate_probs, floor);
                let candidate_r = r_from(data, &freqs, &candidate_probs, floor);
                let candidate_residual = fixed_point_gap(&candidate_r, &candidate);
                let gain = candidate_likelihood - likelihood;
                // Inside the noise band the likelihood cannot rank the two
                // states, so the step must shrink the residual instead.
                if gain > LIKELIHOOD_NOISE
                    || (gain >= -LIKELIHOOD_NOISE && candidate_residual < residual)
                {
                    step = Some((
                        candidate,
                        candidate_likelihood,
                        candidate_r,
                        candidate_residual,
                    ));
                    break;
                }
            }
            mu *= 0.5;
        }
        let Some((next, next_likelihood, next_r, next_residual)) = step else {
            break;
        };
        state = next;
        likelihood = next_likelihood;
        r = next_r;
        residual = next_residual;
        trace.push(likelihood);
        iterations += 1;
    }

    Ok(EstimationResult {
        estimate: state,
        log_likelihood_trace: trace,
        iterations,
        fixed_point_residual: residual,
        converged: residual <= config.tolerance,
    })
}

/// Per-record check of `Tr((f_i/ρ_ii)|y_i⟩⟨y_i|ρ) = f_i`.
#[derive(Debug, Clone, PartialEq)]
pub struct ExpectationCheck {
    pub label: String,
    pub lhs: f64,
    pub frequency: f64,
    pub gap: f64,
    /// `ρ_ii` fell below the floor for an observed outcome.
    pub floored: bool,
}

pub fn check_expectation_condition(
    state: &DensityMatrix,
    data: &Dataset,
) -> Result<Vec<ExpectationCheck>> {
    check_dims(state, data)?;
    let freqs = data.frequencies();
    Ok(data
        .records()
        .iter()
        .zip(freqs)
        .map(|(record, f)| {
            let projector = record.effect.projector();
            let p = raw_probability(state, &record.effect);
            let floored = f > 0.0 && p < DEFAULT_FLOOR;
            let lhs = if f > 0.0 {
                let weighted = projector.scale(f / p.max(DEFAULT_FLOOR));
                (&weighted * state.matrix()).trace().re
            } else {
                0.0
            };
            ExpectationCheck {
                label: record.effect.label().to_string(),
                lhs,
                frequency: f,
                gap: (lhs - f).abs(),
                floored,
            }
        })
        .collect())
}

/// Max-entry norm of `P R P − P`, with `P` the projector onto the
/// eigenvectors of `state` whose eigenvalue exceeds `rank_tol`.
pub fn check_subspace_completeness(
    state: &DensityMatrix,
    data: &Dataset,
    rank_tol: f64,
) -> Result<f64> {
    let r = build_r(state, data, DEFAULT_FLOOR)?;
    let p = state.support_projector(rank_tol);
    Ok((&(&(&p * &r) * &p) - &p).max_abs())
}
