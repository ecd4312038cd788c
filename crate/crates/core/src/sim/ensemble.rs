//! Monte Carlo ensembles of reconstructions from one true state.

use rayon::prelude::*;

use crate::alternatives::{estimate_linear_inversion, estimate_ls};
use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::likelihood::{estimate_ml, EstimatorConfig};
use crate::sim::fisher::{crb_variance, fisher_information, Parametrization};
use crate::sim::plan::{expected_dataset, sample_dataset, MeasurementPlan};
use crate::sim::rng::trial_seed;
use crate::state::{fidelity, trace_distance, DensityMatrix};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum EstimatorKind {
    MaximumLikelihood,
    LeastSquares,
    LinearInversion,
}

impl EstimatorKind {
    pub const ALL: [EstimatorKind; 3] = [
        EstimatorKind::MaximumLikelihood,
        EstimatorKind::LeastSquares,
        EstimatorKind::LinearInversion,
    ];

    pub fn name(self) -> &'static str {
        match self {
            EstimatorKind::MaximumLikelihood => "ml",
            EstimatorKind::LeastSquares => "ls",
            EstimatorKind::LinearInversion => "linear",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|k| k.name() == name)
    }
}

/// Runs one estimator; the flag is `false` when an iterative solver stopped
/// before convergence.
pub fn run_estimator(
    kind: EstimatorKind,
    data: &Dataset,
    config: &EstimatorConfig,
) -> Result<(DensityMatrix, bool)> {
    Ok(match kind {
        EstimatorKind::MaximumLikelihood => {
            let r = estimate_ml(data, config)?;
            (r.estimate, r.converged)
        }
        EstimatorKind::LeastSquares => {
            let r = estimate_ls(data, config)?;
            (r.estimate, r.converged)
        }
        EstimatorKind::LinearInversion => (estimate_linear_inversion(data)?, true),
    })
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct EnsembleOptions {
    pub config: EstimatorConfig,
    /// Replace sampling by the noise-free Born counts of [`expected_dataset`].
    pub exact_frequencies: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EstimatorStats {
    pub estimator: EstimatorKind,
    /// Trials entering the statistics.
    pub included: usize,
    /// Trials dropped because the solver did not converge.
    pub excluded: usize,
    pub mean_fidelity: f64,
    pub mean_trace_distance: f64,
    /// Mean Bloch-vector error, qubits only.
    pub bias: Option<[f64; 3]>,
    /// Sample variance (`n − 1` denominator) of each Bloch component, qubits only.
    pub variance: Option<[f64; 3]>,
}

impl EstimatorStats {
    pub fn bias_norm(&self) -> Option<f64> {
        self.bias
            .map(|b| b.iter().map(|x| x * x).sum::<f64>().sqrt())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EnsembleReport {
    pub trials: usize,
    pub n_total: u64,
    pub estimators: Vec<EstimatorStats>,
    /// `diag(I⁻¹)/N` in Bloch coordinates, qubits with a regular Fisher matrix only.
    pub crb_variance: Option<[f64; 3]>,
}

impl EnsembleReport {
    pub fn stats(&self, kind: EstimatorKind) -> Option<&EstimatorStats> {
        self.estimators.iter().find(|s| s.estimator == kind)
    }
}

/// Per-trial estimates, in the order of the requested estimators.
#[derive(Debug, Clone)]
pub struct TrialOutcome {
    pub seed: u64,
    pub estimates: Vec<(DensityMatrix, bool)>,
}

/// Dataset of trial `trial`: the plan reseeded with `trial_seed(seed, trial)`.
pub fn trial_dataset(
    true_state: &DensityMatrix,
    plan: &MeasurementPlan,
    trial: u64,
    exact_frequencies: bool,
) -> Result<Dataset> {
    if exact_frequencies {
        expected_dataset(true_state, plan)
    } else {
        sample_dataset(true_state, &plan.reseeded(trial_seed(plan.seed(), trial)))
    }
}

pub fn run_trials(
    true_state: &DensityMatrix,
    plan: &MeasurementPlan,
    trials: usize,
    estimators: &[EstimatorKind],
    options: &EnsembleOptions,
) -> Result<Vec<TrialOutcome>> {
    (0..trials as u64)
        .into_par_iter()
        .map(|trial| {
            let data = trial_dataset(true_state, plan, trial, options.exact_frequencies)?;
            let estimates = estimators
                .iter()
                .map(|&kind| run_estimator(kind, &data, &options.config))
                .collect::<Result<Vec<_>>>()?;
            Ok(TrialOutcome {
                seed: trial_seed(plan.seed(), trial),
                estimates,
            })
        })
        .collect()
}

pub fn run_ensemble(
    true_state: &DensityMatrix,
    plan: &MeasurementPlan,
    trials: usize,
    estimators: &[EstimatorKind],
) -> Result<EnsembleReport> {
    run_ensemble_with(
        true_state,
        plan,
        trials,
        estimators,
        &EnsembleOptions::default(),
    )
}

/// Samples `trials` datasets (trial `t` seeded with `trial_seed(seed, t)`),
/// runs every requested estimator and accumulates statistics in trial order.
pub fn run_ensemble_with(
    true_state: &DensityMatrix,
    plan: &MeasurementPlan,
    trials: usize,
    estimators: &[EstimatorKind],
    options: &EnsembleOptions,
) -> Result<EnsembleReport> {
    if trials == 0 {
        return Err(Error::InvalidPlan(
            "an ensemble needs at least one trial".into(),
        ));
    }
    if true_state.dim() != plan.dim() {
        return Err(Error::DimensionMismatch {
            expected: plan.dim(),
            found: true_state.dim(),
        });
    }
    let outcomes = run_trials(true_state, plan, trials, estimators, options)?;
    let qubit = true_state.dim() == 2;
    let truth_bloch = if qubit {
        Some(true_state.bloch_vector()?)
    } else {
        None
    };

    let mut stats = Vec::with_capacity(estimators.len());
    for (slot, &kind) in estimators.iter().enumerate() {
        let accepted: Vec<&DensityMatrix> = outcomes
            .iter()
            .map(|o| &o.estimates[slot])
            .filter(|(_, converged)| *converged)
            .map(|(state, _)| state)
            .collect();
        let included = accepted.len();
        let excluded = trials - included;
        let mut fid_sum = 0.0;
        let mut dist_sum = 0.0;
        let mut blochs = Vec::with_capacity(included);
        for state in &accepted {
            fid_sum += fidelity(true_state, state)?;
            dist_sum += trace_distance(true_state, state)?;
            if qubit {
                blochs.push(state.bloch_vector()?);
            }
        }
        let n = included as f64;
        let (bias, variance) = match truth_bloch {
            Some(truth) if included > 0 => {
                let mut mean = [0.0; 3];
                for b in &blochs {
                    for k in 0..3 {
                        mean[k] += b[k];
                    }
                }
                mean = mean.map(|m| m / n);
                let mut var = [0.0; 3];
                if included > 1 {
                    for b in &blochs {
                        for k in 0..3 {
                            var[k] += (b[k] - mean[k]).powi(2);
                        }
                    }
                    var = var.map(|v| v / (n - 1.0));
                }
                let bias = [mean[0] - truth[0], mean[1] - truth[1], mean[2] - truth[2]];
                (Some(bias), Some(var))
            }
            _ => (None, None),
        };
        stats.push(EstimatorStats {
            estimator: kind,
            included,
            excluded,
            mean_fidelity: if included > 0 { fid_sum / n } else { f64::NAN },
            mean_trace_distance: if included > 0 { dist_sum / n } else { f64::NAN },
            bias,
            variance,
        });
    }

    let crb = if qubit {
        fisher_information(true_state, plan, Parametrization::BlochCoordinates)
            .ok()
            .and_then(|info| crb_variance(&info, plan.total_shots()))
    } else {
        None
    };

    Ok(EnsembleReport {
        trials,
        n_total: plan.total_shots(),
        estimators: stats,
        crb_variance: crb,
    })
}
