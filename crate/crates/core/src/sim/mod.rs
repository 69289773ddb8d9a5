//! Ground truth, sensor synthesis and parameter perturbation.

mod integrate;
mod rng;
mod sensors;
mod stream;
mod truth;
mod uncertainty;

pub use integrate::rk4_step;
pub use rng::{substream, Stream};
pub use sensors::{sample_sensors, sensor_stream, specific_force, SensorSample};
pub use stream::{read_stream_csv, write_stream_csv};
pub use truth::{simulate_truth, JointMotion, TrackingGains, TrajectorySpec, TruthRecord};
pub use uncertainty::{parse_uncertain, perturb_parameters, ParamId, ParameterUncertainty, UncertainValue};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Standard deviations of the additive white sensor noise.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct NoiseSpec {
    /// rad/s
    pub sigma_gyro: f64,
    /// m/s²
    pub sigma_accel: f64,
    /// rad
    pub sigma_enc_pos: f64,
    /// rad/s
    pub sigma_enc_vel: f64,
}

impl NoiseSpec {
    pub const NOISELESS: NoiseSpec = NoiseSpec {
        sigma_gyro: 0.0,
        sigma_accel: 0.0,
        sigma_enc_pos: 0.0,
        sigma_enc_vel: 0.0,
    };

    pub fn validate(&self) -> Result<()> {
        let all = [
            self.sigma_gyro,
            self.sigma_accel,
            self.sigma_enc_pos,
            self.sigma_enc_vel,
        ];
        if all.iter().all(|s| s.is_finite() && *s >= 0.0) {
            Ok(())
        } else {
            Err(Error::Config(format!(
                "noise deviations must be finite and non-negative: {self:?}"
            )))
        }
    }
}

impl Default for NoiseSpec {
    fn default() -> Self {
        Self {
            sigma_gyro: 5e-3,
            sigma_accel: 5e-2,
            sigma_enc_pos: 1e-3,
            sigma_enc_vel: 1e-2,
        }
    }
}

/// Time base, run length, seed and sensor noise of a simulated experiment.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct WorldConfig {
    /// s, ground-truth integrator step
    pub truth_step: f64,
    /// s, sensor and estimator period
    pub estimator_step: f64,
    /// s
    pub duration: f64,
    pub seed: u64,
    pub noise: NoiseSpec,
}

impl Default for WorldConfig {
    fn default() -> Self {
        Self {
            truth_step: 1e-4,
            estimator_step: 1e-3,
            duration: 1.0,
            seed: 42,
            noise: NoiseSpec::default(),
        }
    }
}

impl WorldConfig {
    /// Number of truth steps per estimator step.
    pub fn record_stride(&self) -> Result<usize> {
        if !(self.truth_step > 0.0 && self.estimator_step > 0.0 && self.duration > 0.0) {
            return Err(Error::Config("time steps and duration must be positive".into()));
        }
        let ratio = self.estimator_step / self.truth_step;
        let stride = ratio.round();
        if stride < 1.0 || (ratio - stride).abs() > 1e-9 * ratio {
            return Err(Error::Config(format!(
                "estimator step {} is not an integer multiple of truth step {}",
                self.estimator_step, self.truth_step
            )));
        }
        Ok(stride as usize)
    }

    /// Number of estimator steps after the initial instant.
    pub fn estimator_steps(&self) -> Result<usize> {
        self.record_stride()?;
        Ok((self.duration / self.estimator_step).round() as usize)
    }

    pub fn validate(&self) -> Result<()> {
        self.record_stride()?;
        self.noise.validate()
    }
}
