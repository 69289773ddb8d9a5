use rayon::prelude::*;

use super::{MetricsReport, RmseAccumulator, RunConfig};
use crate::chain::ChainParameters;
use crate::error::{Error, Result};
use crate::estimators::{estimate_run, EstimateRun, EstimatorKind, InitialCondition};
use crate::sim::{perturb_parameters, sensor_stream, simulate_truth, substream, SensorSample, Stream, TruthRecord};

/// Truth, sensor frames and applied torques of one simulated flight.
#[derive(Clone, Debug)]
pub struct Scenario {
    pub truth: Vec<TruthRecord>,
    pub sensors: Vec<SensorSample>,
    pub torques: Vec<Vec<f64>>,
}

impl Scenario {
    pub fn initial(&self) -> InitialCondition {
        InitialCondition::from(&self.truth[0])
    }
}

/// Simulates the flight of `params` and draws the sensor noise of `trial`.
pub fn synthesize(config: &RunConfig, params: &ChainParameters, trial: u64) -> Result<Scenario> {
    let truth = simulate_truth(params, &config.trajectory, &config.world)?;
    let mut rng = substream(config.world.seed, trial, Stream::SensorNoise);
    let sensors = sensor_stream(params, &truth, &config.world.noise, &mut rng)?;
    let torques = truth.iter().map(|r| r.torques.clone()).collect();
    Ok(Scenario {
        truth,
        sensors,
        torques,
    })
}

/// Runs every selected estimator on one scenario with `params` as their model.
fn run_all(config: &RunConfig, scenario: &Scenario, params: &ChainParameters) -> Result<Vec<EstimateRun>> {
    let est_config = config.estimator_config()?;
    let initial = scenario.initial();
    config
        .run
        .kinds
        .iter()
        .map(|&kind| {
            estimate_run(
                kind,
                &scenario.sensors,
                &scenario.torques,
                params,
                &est_config,
                &initial,
            )
        })
        .collect()
}

fn accumulate(runs: &[EstimateRun], truth: &[TruthRecord], n: usize) -> Result<Vec<RmseAccumulator>> {
    runs.iter()
        .map(|run| {
            let mut acc = RmseAccumulator::new(2 * n + 4);
            acc.add_run(&run.estimates, truth)?;
            Ok(acc)
        })
        .collect()
}

fn report_from(config: &RunConfig, totals: &[RmseAccumulator], trials: usize) -> MetricsReport {
    let mut report = MetricsReport::new(config.chain.n_links(), config.world.seed, trials, config.digest());
    report.kinds = config.run.kinds.clone();
    report.rmse = totals.iter().map(RmseAccumulator::rmse).collect();
    report
}

/// One flight with the nominal parameters; every estimator sees the same
/// sensor stream (noise substream of trial 0).
pub fn run_known_params(config: &RunConfig) -> Result<MetricsReport> {
    config.validate()?;
    let scenario = synthesize(config, &config.chain, 0)?;
    let runs = run_all(config, &scenario, &config.chain)?;
    let totals = accumulate(&runs, &scenario.truth, config.chain.n_links())?;
    Ok(report_from(config, &totals, 1))
}

fn monte_carlo_trial(config: &RunConfig, trial: u64) -> Result<Vec<RmseAccumulator>> {
    let mut rng = substream(config.world.seed, trial, Stream::Parameters);
    let actual = perturb_parameters(&config.chain, &config.uncertainty, &mut rng)?;
    let scenario = synthesize(config, &actual, trial)?;
    let runs = run_all(config, &scenario, &config.chain)?;
    accumulate(&runs, &scenario.truth, config.chain.n_links())
}

/// `run.trials` flights, each with freshly perturbed true parameters and
/// fresh sensor noise, while the estimators keep the nominal parameters.
///
/// Trials run on `workers` threads. Per-trial results are merged in trial
/// order, so the report does not depend on the worker count. The first
/// failing trial aborts the run.
pub fn run_monte_carlo(config: &RunConfig, workers: usize) -> Result<MetricsReport> {
    config.validate()?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers.max(1))
        .build()
        .map_err(|e| Error::Config(format!("worker pool: {e}")))?;
    let seed = config.world.seed;
    let per_trial: Vec<Vec<RmseAccumulator>> = pool.install(|| {
        (0..config.run.trials as u64)
            .into_par_iter()
            .map(|trial| {
                monte_carlo_trial(config, trial).map_err(|e| Error::Trial {
                    trial,
                    seed,
                    source: Box::new(e),
                })
            })
            .collect::<Result<_>>()
    })?;

    let n = config.chain.n_links();
    let mut totals = vec![RmseAccumulator::new(2 * n + 4); config.run.kinds.len()];
    for trial in &per_trial {
        for (total, acc) in totals.iter_mut().zip(trial) {
            total.merge(acc);
        }
    }
    Ok(report_from(config, &totals, config.run.trials))
}

/// Mean per-step wall time of each selected estimator on the nominal flight,
/// on the calling thread. Each repetition runs every estimator once, in
/// turn; the median over repetitions is reported.
pub fn time_estimators(config: &RunConfig) -> Result<MetricsReport> {
    config.validate()?;
    let scenario = synthesize(config, &config.chain, 0)?;
    let est_config = config.estimator_config()?;
    let initial = scenario.initial();
    let kinds = &config.run.kinds;
    let mut samples = vec![Vec::with_capacity(config.run.timing_repeats); kinds.len()];
    let mut last_runs = Vec::new();
    for _ in 0..config.run.timing_repeats {
        last_runs.clear();
        for (k, &kind) in kinds.iter().enumerate() {
            let run = estimate_run(
                kind,
                &scenario.sensors,
                &scenario.torques,
                &config.chain,
                &est_config,
                &initial,
            )?;
            samples[k].push(run.mean_step_time_us());
            last_runs.push(run);
        }
    }
    let totals = accumulate(&last_runs, &scenario.truth, config.chain.n_links())?;
    let mut report = report_from(config, &totals, 1);
    report.step_time_us = Some(samples.into_iter().map(median).collect());
    Ok(report)
}

fn median(mut v: Vec<f64>) -> f64 {
    v.sort_by(f64::total_cmp);
    let m = v.len() / 2;
    if v.len().is_multiple_of(2) {
        0.5 * (v[m - 1] + v[m])
    } else {
        v[m]
    }
}

/// Convenience for callers that want a single kind's run on the nominal flight.
pub fn run_single(config: &RunConfig, kind: EstimatorKind) -> Result<(Scenario, EstimateRun)> {
    let scenario = synthesize(config, &config.chain, 0)?;
    let est_config = config.estimator_config()?;
    let run = estimate_run(
        kind,
        &scenario.sensors,
        &scenario.torques,
        &config.chain,
        &est_config,
        &scenario.initial(),
    )?;
    Ok((scenario, run))
}
