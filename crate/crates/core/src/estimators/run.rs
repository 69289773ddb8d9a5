use std::path::Path;
use std::time::Instant;

use super::{
    Bme, DecoupledEstimator, Estimator, EstimatorConfig, EstimatorKind, FullEstimate, FullEstimator, InitialCondition,
    Linearization,
};
use crate::chain::ChainParameters;
use crate::error::{Error, Result};
use crate::sim::SensorSample;

/// Number of leading steps left out of timing statistics.
pub const WARMUP_STEPS: usize = 10;

pub fn build_estimator(
    kind: EstimatorKind,
    params: &ChainParameters,
    config: &EstimatorConfig,
    initial: &InitialCondition,
) -> Result<Box<dyn Estimator>> {
    Ok(match kind {
        EstimatorKind::FullEkf => Box::new(FullEstimator::new(params, config, initial, Linearization::Ekf)?),
        EstimatorKind::FullUkf => Box::new(FullEstimator::new(params, config, initial, Linearization::Ukf)?),
        EstimatorKind::DeEkf => Box::new(DecoupledEstimator::new(params, config, initial, Linearization::Ekf)?),
        EstimatorKind::DeUkf => Box::new(DecoupledEstimator::new(params, config, initial, Linearization::Ukf)?),
        EstimatorKind::Bme => Box::new(Bme::new(params, config, initial)?),
    })
}

/// Output of one estimator over one stream.
#[derive(Clone, Debug)]
pub struct EstimateRun {
    pub kind: EstimatorKind,
    /// One estimate per sensor sample; the first is the initial condition.
    pub estimates: Vec<FullEstimate>,
    /// µs, wall-clock duration of each step after the first sample.
    pub step_durations_us: Vec<f64>,
}

impl EstimateRun {
    /// Mean step duration with the first [`WARMUP_STEPS`] steps discarded.
    pub fn mean_step_time_us(&self) -> f64 {
        let kept = if self.step_durations_us.len() > WARMUP_STEPS {
            &self.step_durations_us[WARMUP_STEPS..]
        } else {
            &self.step_durations_us[..]
        };
        kept.iter().sum::<f64>() / kept.len().max(1) as f64
    }
}

/// Runs one estimator over an aligned sensor/torque stream. The estimator
/// starts from `initial` at the first sample and steps through the rest.
pub fn estimate_run(
    kind: EstimatorKind,
    sensors: &[SensorSample],
    torques: &[Vec<f64>],
    params: &ChainParameters,
    config: &EstimatorConfig,
    initial: &InitialCondition,
) -> Result<EstimateRun> {
    if sensors.len() != torques.len() {
        return Err(Error::Misaligned(format!(
            "{} sensor samples but {} torque samples",
            sensors.len(),
            torques.len()
        )));
    }
    let first = sensors
        .first()
        .ok_or_else(|| Error::Misaligned("empty sensor stream".into()))?;
    if let Some(k) = sensors.windows(2).position(|w| {
        let gap = w[1].t - w[0].t;
        (gap - config.dt).abs() > 1e-9 * config.dt.max(1.0)
    }) {
        return Err(Error::Misaligned(format!(
            "samples {k} and {} are not one estimator step ({} s) apart",
            k + 1,
            config.dt
        )));
    }

    let mut estimator = build_estimator(kind, params, config, initial)?;
    let mut estimates = Vec::with_capacity(sensors.len());
    let mut durations = Vec::with_capacity(sensors.len() - 1);
    estimates.push(FullEstimate {
        t: first.t,
        q: initial.state.q.clone(),
        qdot: initial.state.qdot.clone(),
    });
    for (k, (sample, tau)) in sensors.iter().zip(torques).enumerate().skip(1) {
        let start = Instant::now();
        let result = estimator.step(tau, sample);
        durations.push(start.elapsed().as_secs_f64() * 1e6);
        let estimate = result.map_err(|e| Error::EstimatorStep {
            step: k,
            source: Box::new(e),
        })?;
        if !estimate.is_finite() {
            return Err(Error::EstimatorStep {
                step: k,
                source: Box::new(Error::Diverged { step: k }),
            });
        }
        estimates.push(estimate);
    }
    Ok(EstimateRun {
        kind,
        estimates,
        step_durations_us: durations,
    })
}

/// Writes estimate sequences, one row per sample and estimator. The initial
/// row of each run has no step duration and is written as `NA`.
pub fn write_estimates_csv(path: &Path, runs: &[EstimateRun]) -> Result<()> {
    let csv_err = |source| Error::Csv {
        path: path.to_path_buf(),
        source,
    };
    let n = runs
        .first()
        .and_then(|r| r.estimates.first())
        .map_or(1, |e| e.q.len() - 2);
    let mut w = csv::Writer::from_path(path).map_err(csv_err)?;
    let mut header = vec!["t".to_string(), "kind".to_string()];
    header.extend((0..n).map(|i| format!("alpha_{i}")));
    header.extend((0..n).map(|i| format!("alpha_{i}_dot")));
    header.extend(["d", "h", "d_dot", "h_dot", "step_duration_us"].map(String::from));
    w.write_record(&header).map_err(csv_err)?;
    for run in runs {
        for (k, e) in run.estimates.iter().enumerate() {
            let mut row = vec![e.t.to_string(), run.kind.to_string()];
            row.extend(e.components().iter().map(|v| v.to_string()));
            row.push(match k {
                0 => "NA".to_string(),
                _ => format!("{:.3}", run.step_durations_us[k - 1]),
            });
            w.write_record(&row).map_err(csv_err)?;
        }
    }
    w.flush().map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}
