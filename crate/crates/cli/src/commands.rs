use std::collections::BTreeMap;
use std::path::Path;

use mlq_core::alternatives::{
    check_ls_povm, estimate_linear_inversion, estimate_ls, ls_stationarity, LsResult,
};
use mlq_core::likelihood::{
    check_expectation_condition, check_subspace_completeness, estimate_ml, extremal_residual,
    log_likelihood,
};
use mlq_core::measurement::{mutually_unbiased_bases, overcomplete8, pauli6, pauli_axis};
use mlq_core::sim::{
    expected_dataset, run_ensemble_with, sample_dataset, EnsembleOptions, EstimatorKind,
    MeasurementPlan, Observable,
};
use mlq_core::{Dataset, DensityMatrix, EstimatorConfig, ObservableBasis};

use crate::files::{load_dataset, load_state, to_json, write_text, DatasetFile, StateFile};
use crate::report::{num, Report};
use crate::{
    CliError, EstimateArgs, GenerateArgs, Method, PlanArgs, SweepArgs, TruthArgs, VerifyArgs,
    EXIT_NO_CONVERGENCE, EXIT_OK,
};

/// Eigenvalues above this count as support in the subspace check.
pub const RANK_TOL: f64 = 1e-9;

fn usage(msg: impl Into<String>) -> CliError {
    CliError::Usage(msg.into())
}

fn emit(path: Option<&Path>, text: &str) -> Result<(), CliError> {
    match path {
        Some(p) => write_text(p, text),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

pub fn load_truth(truth: &TruthArgs) -> Result<(DensityMatrix, String), CliError> {
    if let Some(path) = &truth.state {
        return Ok((load_state(path)?, "state file".to_string()));
    }
    let v = truth.bloch.as_deref().unwrap_or_default();
    if v.len() != 3 {
        return Err(usage("--bloch takes three comma-separated numbers"));
    }
    let state = DensityMatrix::from_bloch([v[0], v[1], v[2]])
        .map_err(|e| usage(format!("--bloch: {e}")))?;
    Ok((state, format!("bloch {},{},{}", v[0], v[1], v[2])))
}

fn named_basis(name: &str, dim: usize) -> Result<ObservableBasis, CliError> {
    match name {
        "computational" => Ok(ObservableBasis::computational(dim)),
        "x" | "y" | "z" if dim == 2 => Ok(pauli_axis(name).expect("known axis")),
        "x" | "y" | "z" => Err(usage(format!(
            "basis {name:?} needs a qubit, state has dim {dim}"
        ))),
        _ => Err(usage(format!("unknown basis {name:?}"))),
    }
}

fn preset_bases(name: &str, dim: usize) -> Result<Vec<ObservableBasis>, CliError> {
    let bases = match name {
        "pauli6" => pauli6(),
        "overcomplete8" => overcomplete8(),
        _ => {
            let d = name
                .strip_prefix("mub-")
                .and_then(|d| d.parse::<usize>().ok())
                .ok_or_else(|| usage(format!("unknown preset {name:?}")))?;
            mutually_unbiased_bases(d).map_err(|e| usage(format!("preset {name}: {e}")))?
        }
    };
    if bases[0].dim() != dim {
        return Err(usage(format!(
            "preset {name} has dim {}, state has dim {dim}",
            bases[0].dim()
        )));
    }
    Ok(bases)
}

/// Settings of the plan before shots are attached, plus a description.
pub fn plan_observables(
    plan: &PlanArgs,
    dim: usize,
) -> Result<(Vec<Observable>, String), CliError> {
    let (bases, mut description) = match (&plan.preset, &plan.basis) {
        (Some(p), _) => (preset_bases(p, dim)?, p.clone()),
        (None, Some(names)) => {
            let bases = names
                .iter()
                .map(|n| named_basis(n, dim))
                .collect::<Result<Vec<_>, _>>()?;
            (bases, format!("basis {}", names.join(",")))
        }
        (None, None) if dim == 2 => (pauli6(), "pauli6".to_string()),
        (None, None) => {
            let bases = mutually_unbiased_bases(dim)
                .map_err(|_| usage(format!("no default plan for dim {dim}; pass --basis")))?;
            (bases, format!("mub-{dim}"))
        }
    };
    let observables = if plan.bare {
        description.push_str(if plan.include_complement {
            " bare+complement"
        } else {
            " bare"
        });
        bases
            .iter()
            .flat_map(|b| {
                b.effects()
                    .iter()
                    .map(|e| Observable::Effects(vec![e.clone()]))
            })
            .collect()
    } else {
        bases.into_iter().map(Observable::Basis).collect()
    };
    Ok((observables, description))
}

fn broadcast_shots(shots: &[u64], settings: usize) -> Result<Vec<u64>, CliError> {
    match shots.len() {
        1 => Ok(vec![shots[0]; settings]),
        n if n == settings => Ok(shots.to_vec()),
        n => Err(usage(format!("{n} shot counts for {settings} settings"))),
    }
}

/// Splits `total` as evenly as possible, the remainder going to the first settings.
pub fn split_shots(total: u64, settings: usize) -> Result<Vec<u64>, CliError> {
    let k = settings as u64;
    if total < k {
        return Err(usage(format!(
            "N = {total} is smaller than the {settings} settings"
        )));
    }
    Ok((0..k)
        .map(|i| total / k + u64::from(i < total % k))
        .collect())
}

fn build_plan(
    observables: Vec<Observable>,
    shots: Vec<u64>,
    seed: u64,
    include_complement: bool,
) -> Result<MeasurementPlan, CliError> {
    MeasurementPlan::with_complement(observables, shots, seed, include_complement)
        .map_err(|e| usage(e.to_string()))
}

pub fn generate(args: GenerateArgs, seed_override: Option<u64>) -> Result<i32, CliError> {
    let seed = seed_override.unwrap_or(args.seed);
    let (truth, source) = load_truth(&args.truth)?;
    let (observables, description) = plan_observables(&args.plan, truth.dim())?;
    let shots = broadcast_shots(&args.shots, observables.len())?;
    let plan = build_plan(observables, shots, seed, args.plan.include_complement)?;
    let data = if args.exact {
        expected_dataset(&truth, &plan)?
    } else {
        sample_dataset(&truth, &plan)?
    };
    let mut metadata = BTreeMap::new();
    metadata.insert("plan".to_string(), description);
    metadata.insert(
        "sampling".to_string(),
        if args.exact { "exact" } else { "multinomial" }.to_string(),
    );
    metadata.insert("seed".to_string(), seed.to_string());
    metadata.insert("source".to_string(), source);
    let file = DatasetFile::from_dataset(&data, metadata);
    emit(args.output.as_deref(), &to_json(&file))?;
    Ok(EXIT_OK)
}

fn ml_checks(report: &mut Report, state: &DensityMatrix, data: &Dataset) -> Result<(), CliError> {
    report.number("extremal_residual", extremal_residual(state, data)?);
    let checks = check_expectation_condition(state, data)?;
    let max_gap = checks.iter().map(|c| c.gap).fold(0.0, f64::max);
    report.number("max_expectation_gap", max_gap);
    report.number(
        "subspace_completeness",
        check_subspace_completeness(state, data, RANK_TOL)?,
    );
    for check in &checks {
        report.line(&format!(
            "expectation {}: lhs {} frequency {} gap {}{}",
            check.label,
            num(check.lhs),
            num(check.frequency),
            num(check.gap),
            if check.floored { " floored" } else { "" }
        ));
    }
    Ok(())
}

fn ls_checks(report: &mut Report, ls: &LsResult, data: &Dataset) {
    match check_ls_povm(ls, data) {
        Ok(checks) => {
            for check in &checks {
                report.line(&format!(
                    "ls_povm {}: expectation {} closed_form {} identity_gap {} frequency {} frequency_gap {}",
                    check.label,
                    num(check.expectation),
                    num(check.closed_form),
                    num(check.identity_gap),
                    num(check.frequency),
                    num(check.frequency_gap)
                ));
            }
        }
        Err(e) => {
            report.field("ls_povm", format!("unavailable ({e})"));
        }
    }
}

pub fn estimate(args: EstimateArgs) -> Result<i32, CliError> {
    let data = load_dataset(&args.data)?;
    let config = EstimatorConfig {
        tolerance: args.tol,
        max_iterations: args.max_iter,
        dilution: args.dilution,
        ..Default::default()
    };
    config.validate().map_err(|e| usage(e.to_string()))?;
    let mut report = Report::new();
    report
        .field("dim", data.dim())
        .field("records", data.len())
        .field("total", data.total());
    let (state, converged) = match args.method {
        Method::Ml => {
            let result = estimate_ml(&data, &config)?;
            report
                .field("method", "ml")
                .field("converged", result.converged)
                .field("iterations", result.iterations)
                .number("log_likelihood", result.log_likelihood())
                .number("fixed_point_residual", result.fixed_point_residual);
            ml_checks(&mut report, &result.estimate, &data)?;
            (result.estimate, result.converged)
        }
        Method::Ls => {
            let result = estimate_ls(&data, &config)?;
            report
                .field("method", "ls")
                .field("converged", result.converged)
                .field("iterations", result.iterations)
                .number("log_likelihood", log_likelihood(&result.estimate, &data)?)
                .number("objective", result.objective)
                .number("lambda", result.lambda)
                .number("ls_residual", result.extremal_residual);
            ls_checks(&mut report, &result, &data);
            let converged = result.converged;
            (result.estimate, converged)
        }
        Method::Linear => {
            let state = estimate_linear_inversion(&data)?;
            report
                .field("method", "linear")
                .field("converged", true)
                .number("log_likelihood", log_likelihood(&state, &data)?);
            (state, true)
        }
    };
    emit(
        args.output.as_deref(),
        &to_json(&StateFile::from_state(&state)),
    )?;
    if args.output.is_some() {
        print!("{}", report.as_str());
    }
    if let Some(path) = &args.report {
        write_text(path, report.as_str())?;
    }
    if converged {
        Ok(EXIT_OK)
    } else {
        eprintln!(
            "warning: estimator did not converge within {} iterations",
            args.max_iter
        );
        Ok(EXIT_NO_CONVERGENCE)
    }
}

pub fn verify(args: VerifyArgs) -> Result<i32, CliError> {
    let state = load_state(&args.state)?;
    let data = load_dataset(&args.data)?;
    if state.dim() != data.dim() {
        return Err(CliError::Schema(format!(
            "state has dim {} but dataset has dim {}",
            state.dim(),
            data.dim()
        )));
    }
    let mut report = Report::new();
    report.number("log_likelihood", log_likelihood(&state, &data)?);
    ml_checks(&mut report, &state, &data)?;
    let stationarity = ls_stationarity(&state, &data)?;
    report
        .number("ls_objective", stationarity.objective)
        .number("ls_lambda", stationarity.lambda)
        .number("ls_residual", stationarity.residual);
    let ls = LsResult {
        estimate: state,
        objective: stationarity.objective,
        extremal_residual: stationarity.residual,
        lambda: stationarity.lambda,
        iterations: 0,
        converged: true,
    };
    ls_checks(&mut report, &ls, &data);
    print!("{}", report.as_str());
    if let Some(path) = &args.report {
        write_text(path, report.as_str())?;
    }
    Ok(EXIT_OK)
}

pub fn sweep(args: SweepArgs, seed_override: Option<u64>) -> Result<i32, CliError> {
    let seed = seed_override.unwrap_or(args.seed);
    if args.trials == 0 {
        return Err(usage("--trials must be at least 1"));
    }
    let kinds = args
        .estimators
        .iter()
        .map(|n| {
            EstimatorKind::from_name(n).ok_or_else(|| usage(format!("unknown estimator {n:?}")))
        })
        .collect::<Result<Vec<_>, _>>()?;
    let (truth, _) = load_truth(&args.truth)?;
    let (observables, _) = plan_observables(&args.plan, truth.dim())?;
    let options = EnsembleOptions {
        config: EstimatorConfig {
            tolerance: args.tol,
            max_iterations: args.max_iter,
            ..Default::default()
        },
        exact_frequencies: args.exact,
    };
    options
        .config
        .validate()
        .map_err(|e| usage(e.to_string()))?;

    let mut csv = String::from("n_total,estimator,metric,value,crb\n");
    for &n in &args.n_list {
        let shots = split_shots(n, observables.len())?;
        let plan = build_plan(
            observables.clone(),
            shots,
            seed,
            args.plan.include_complement,
        )?;
        let report = run_ensemble_with(&truth, &plan, args.trials, &kinds, &options)?;
        for stats in &report.estimators {
            let mut row = |metric: &str, value: f64, crb: Option<f64>| {
                csv.push_str(&format!(
                    "{},{},{},{},{}\n",
                    report.n_total,
                    stats.estimator.name(),
                    metric,
                    num(value),
                    crb.map(num).unwrap_or_default()
                ));
            };
            row("included", stats.included as f64, None);
            row("excluded", stats.excluded as f64, None);
            row("mean_fidelity", stats.mean_fidelity, None);
            row("mean_trace_distance", stats.mean_trace_distance, None);
            if let (Some(bias), Some(variance)) = (stats.bias, stats.variance) {
                for (k, axis) in ["x", "y", "z"].iter().enumerate() {
                    row(&format!("bias_{axis}"), bias[k], None);
                }
                row("bias_norm", stats.bias_norm().unwrap_or(f64::NAN), None);
                for (k, axis) in ["x", "y", "z"].iter().enumerate() {
                    row(
                        &format!("variance_{axis}"),
                        variance[k],
                        report.crb_variance.map(|c| c[k]),
                    );
                }
            }
        }
    }
    emit(args.output.as_deref(), &csv)?;
    Ok(EXIT_OK)
}
