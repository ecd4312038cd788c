//! Least-squares and linear-inversion estimators.
//!
//! Both baselines fit the Born probabilities directly to the per-setting
//! frequencies `g_i = N_i / N_j` (`N_j` the shots spent on the record's
//! observable), the usual "probability equals frequency" reconstruction.

use nalgebra::{DMatrix, DVector};

use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::likelihood::EstimatorConfig;
use crate::linalg::{c, ComplexMatrix};
use crate::state::{project_to_physical, raw_probability, DensityMatrix};

/// Singular values below this are treated as zero by the inversion.
pub const PSEUDO_INVERSE_CUTOFF: f64 = 1e-10;

/// `|λ|` below this leaves the least-squares POVM undefined.
pub const LAMBDA_EPS: f64 = 1e-12;

/// A converged run only pins `λ` to about its extremal residual; below this
/// multiple of the residual `λ` is treated as zero. That is the case for
/// exact fits and for interior optima of plans made of complete bases,
/// where the trace constraint is inactive.
pub const LAMBDA_RESOLUTION: f64 = 1e3;

const OBJECTIVE_NOISE: f64 = 1e-15;
const MAX_HALVINGS: u32 = 30;
const MAX_STEP: f64 = 1e6;

#[derive(Debug, Clone)]
pub struct LsResult {
    pub estimate: DensityMatrix,
    /// `Σ_i (ρ_ii − g_i)²`
    pub objective: f64,
    /// Max-entry norm of `2 Σ_i (ρ_ii − g_i)|y_i⟩⟨y_i|ρ − λρ`.
    pub extremal_residual: f64,
    /// `λ = 2 Σ_i (ρ_ii − g_i) ρ_ii`
    pub lambda: f64,
    pub iterations: usize,
    pub converged: bool,
}

/// Objective, multiplier and stationarity residual of the least-squares
/// problem at `state`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LsStationarity {
    pub objective: f64,
    pub lambda: f64,
    pub residual: f64,
}

struct LsPoint {
    gradient: ComplexMatrix,
    stationarity: LsStationarity,
}

fn evaluate(state: &DensityMatrix, data: &Dataset, targets: &[f64]) -> LsPoint {
    let probs: Vec<f64> = data
        .records()
        .iter()
        .map(|r| raw_probability(state, &r.effect))
        .collect();
    let mut gradient = ComplexMatrix::zeros(data.dim());
    let mut objective = 0.0;
    let mut lambda = 0.0;
    for ((record, p), g) in data.records().iter().zip(&probs).zip(targets) {
        let diff = p - g;
        objective += diff * diff;
        lambda += 2.0 * diff * p;
        gradient = &gradient + &record.effect.projector().scale(2.0 * diff);
    }
    let rho = state.matrix();
    let residual = (&(&gradient * rho) - &rho.scale(lambda)).max_abs();
    LsPoint {
        gradient,
        stationarity: LsStationarity {
            objective,
            lambda,
            residual,
        },
    }
}

/// Evaluates the least-squares extremal equation at an arbitrary state.
pub fn ls_stationarity(state: &DensityMatrix, data: &Dataset) -> Result<LsStationarity> {
    if state.dim() != data.dim() {
        return Err(Error::DimensionMismatch {
            expected: data.dim(),
            found: state.dim(),
        });
    }
    Ok(evaluate(state, data, &data.setting_frequencies()).stationarity)
}

fn state_from_factor(t: &ComplexMatrix) -> Result<DensityMatrix> {
    let gram = &t.adjoint() * t;
    let norm = gram.trace().re;
    DensityMatrix::new(gram.scale(1.0 / norm))
}

/// Minimizes `Σ_i (⟨y_i|ρ|y_i⟩ − g_i)²` over states `ρ = T†T / Tr(T†T)`.
///
/// Gradient descent on `T` with a step that doubles after every accepted
/// move and halves on rejection. Uses `tolerance`, `max_iterations` and the
/// initial state from `config`.
pub fn estimate_ls(data: &Dataset, config: &EstimatorConfig) -> Result<LsResult> {
    config.validate()?;
    let dim = data.dim();
    let targets = data.setting_frequencies();
    let mut factor = match &config.initial_state {
        crate::likelihood::InitialState::MaximallyMixed => {
            ComplexMatrix::identity(dim).scale(1.0 / (dim as f64).sqrt())
        }
        crate::likelihood::InitialState::Provided(s) => {
            if s.dim() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    found: s.dim(),
                });
            }
            let eigen = crate::linalg::Eigen {
                values: s.eigenvalues().to_vec(),
                vectors: s.eigenvectors().to_vec(),
            };
            // Keep a little weight everywhere so the factor can move off the boundary.
            ComplexMatrix::from_spectrum(&eigen, |r| (r.max(0.0) + 1e-6).sqrt())
        }
    };
    let mut state = state_from_factor(&factor)?;
    let mut point = evaluate(&state, data, &targets);
    let mut step = 1.0;
    let mut iterations = 0;
    let identity = ComplexMatrix::identity(dim);

    while point.stationarity.residual > config.tolerance && iterations < config.max_iterations {
        // d objective / dT for the normalized factor (Tr T†T = 1)
        let shifted = &point.gradient - &identity.scale(point.stationarity.lambda);
        let direction = (&factor * &shifted).scale(2.0);
        let slope: f64 = direction.as_matrix().iter().map(|z| z.norm_sqr()).sum();
        if slope == 0.0 {
            break;
        }
        let mut accepted = None;
        for _ in 0..=MAX_HALVINGS {
            let trial = &factor - &direction.scale(step);
            let trial_norm = (&trial.adjoint() * &trial).trace().re;
            if trial_norm > 0.0 && trial_norm.is_finite() {
                let trial = trial.scale(1.0 / trial_norm.sqrt());
                let trial_state = state_from_factor(&trial)?;
                let trial_point = evaluate(&trial_state, data, &targets);
                let decrease = point.stationarity.objective - trial_point.stationarity.objective;
                let sufficient = decrease >= 1e-4 * step * slope;
                let noise_level = decrease.abs() <= OBJECTIVE_NOISE
                    && trial_point.stationarity.residual < point.stationarity.residual;
                if (sufficient && decrease > 0.0) || noise_level {
                    accepted = Some((trial, trial_state, trial_point));
                    break;
                }
            }
            step *= 0.5;
        }
        let Some((next_factor, next_state, next_point)) = accepted else {
            break;
        };
        factor = next_factor;
        state = next_state;
        point = next_point;
        step = (step * 2.0).min(MAX_STEP);
        iterations += 1;
    }

    Ok(LsResult {
        estimate: state,
        objective: point.stationarity.objective,
        extremal_residual: point.stationarity.residual,
        lambda: point.stationarity.lambda,
        iterations,
        converged: point.stationarity.residual <= config.tolerance,
    })
}

/// Expectation of the least-squares POVM element `Ê_i` for one record.
#[derive(Debug, Clone, PartialEq)]
pub struct LsPovmCheck {
    pub label: String,
    /// `Tr(ρ Ê_i)` computed from the operator.
    pub expectation: f64,
    /// `2 (ρ_ii − g_i) ρ_ii / λ`
    pub closed_form: f64,
    pub identity_gap: f64,
    /// Pooled frequency `f_i` of the record.
    pub frequency: f64,
    /// `|Tr(ρ Ê_i) − f_i|`
    pub frequency_gap: f64,
}

/// Builds `Ê_i = 2 (ρ_ii − g_i) |y_i⟩⟨y_i| / λ` at the least-squares
/// estimate and compares its expectation with the closed form and with the
/// observed frequency.
pub fn check_ls_povm(result: &LsResult, data: &Dataset) -> Result<Vec<LsPovmCheck>> {
    let state = &result.estimate;
    if state.dim() != data.dim() {
        return Err(Error::DimensionMismatch {
            expected: data.dim(),
            found: state.dim(),
        });
    }
    let lambda = result.lambda;
    if lambda.abs() < LAMBDA_EPS.max(LAMBDA_RESOLUTION * result.extremal_residual) {
        return Err(Error::DegenerateLambda(lambda));
    }
    let targets = data.setting_frequencies();
    let freqs = data.frequencies();
    Ok(data
        .records()
        .iter()
        .zip(targets.iter().zip(&freqs))
        .map(|(record, (g, f))| {
            let p = raw_probability(state, &record.effect);
            let element = record.effect.projector().scale(2.0 * (p - g) / lambda);
            let expectation = (state.matrix() * &element).trace().re;
            let closed_form = 2.0 * (p - g) * p / lambda;
            LsPovmCheck {
                label: record.effect.label().to_string(),
                expectation,
                closed_form,
                identity_gap: (expectation - closed_form).abs(),
                frequency: *f,
                frequency_gap: (expectation - f).abs(),
            }
        })
        .collect())
}

/// Orthonormal (Hilbert–Schmidt) basis of the real space of `dim × dim`
/// Hermitian matrices.
fn hermitian_basis(dim: usize) -> Vec<ComplexMatrix> {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let mut basis = Vec::with_capacity(dim * dim);
    for k in 0..dim {
        basis.push(ComplexMatrix::from_fn(dim, |i, j| {
            if i == k && j == k {
                c(1.0, 0.0)
            } else {
                c(0.0, 0.0)
            }
        }));
    }
    for j in 0..dim {
        for k in j + 1..dim {
            basis.push(ComplexMatrix::from_fn(dim, |a, b| {
                if (a, b) == (j, k) || (a, b) == (k, j) {
                    c(s, 0.0)
                } else {
                    c(0.0, 0.0)
                }
            }));
            basis.push(ComplexMatrix::from_fn(dim, |a, b| {
                if (a, b) == (j, k) {
                    c(0.0, -s)
                } else if (a, b) == (k, j) {
                    c(0.0, s)
                } else {
                    c(0.0, 0.0)
                }
            }));
        }
    }
    basis
}

/// Least-norm least-squares solution of `⟨y_i|ρ|y_i⟩ = g_i`, `Tr ρ = 1`
/// over Hermitian `ρ`, before any positivity correction.
pub fn linear_inversion_unprojected(data: &Dataset) -> Result<ComplexMatrix> {
    let dim = data.dim();
    let basis = hermitian_basis(dim);
    let rows = data.len() + 1;
    let mut system = DMatrix::<f64>::zeros(rows, basis.len());
    for (i, record) in data.records().iter().enumerate() {
        let v = record.effect.vector();
        for (m, b) in basis.iter().enumerate() {
            system[(i, m)] = b.sandwich(v, v).re;
        }
    }
    for (m, b) in basis.iter().enumerate() {
        system[(rows - 1, m)] = b.trace().re;
    }
    let mut rhs = DVector::<f64>::zeros(rows);
    for (i, g) in data.setting_frequencies().into_iter().enumerate() {
        rhs[i] = g;
    }
    rhs[rows - 1] = 1.0;
    let svd = system.svd(true, true);
    let coords = svd
        .solve(&rhs, PSEUDO_INVERSE_CUTOFF)
        .map_err(|e| Error::InvalidConfig(format!("pseudo-inverse failed: {e}")))?;
    let m = basis
        .iter()
        .zip(coords.iter())
        .fold(ComplexMatrix::zeros(dim), |acc, (b, h)| &acc + &b.scale(*h));
    Ok(m.hermitian_part())
}

/// Linear inversion followed by [`project_to_physical`].
pub fn estimate_linear_inversion(data: &Dataset) -> Result<DensityMatrix> {
    project_to_physical(&linear_inversion_unprojected(data)?)
}
