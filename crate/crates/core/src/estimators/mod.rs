//! The five estimator architectures.
//!
//! * full EKF / UKF: one filter over `(q, q̇)` driven by the full dynamics and
//!   every sensor;
//! * DE-EKF / DE-UKF: a posture filter over `(q̄, q̇̄, q̈̄)` driven by the
//!   reduced dynamics, cascaded into the linear CoM filter;
//! * BME: a bank of independent constant-jerk filters, one per posture axis,
//!   cascaded into the same CoM filter.
//!
//! Cascade estimators recover `(d, h, ḋ, ḣ)` from the CoM estimate and the
//! posture estimate.

mod ballistic;
mod com;
mod decoupled;
mod full;
mod run;

pub use ballistic::{axis_model, bme_posture_step, Bme};
pub use com::{com_measurement, com_model, com_predict, com_tvkf_step, recover_reference_point};
pub use decoupled::{de_posture_step, posture_measurement, posture_observation, DecoupledEstimator};
pub use full::{full_ekf_step, full_measurement, full_transition, full_ukf_step, FullEstimator};
pub use run::{build_estimator, estimate_run, write_estimates_csv, EstimateRun};

use std::fmt;
use std::str::FromStr;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::chain::{ComState, FullState};
use crate::error::{Error, Result};
use crate::filter::UkfScaling;
use crate::sim::{NoiseSpec, SensorSample, TruthRecord, WorldConfig};

/// Estimator architecture.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum EstimatorKind {
    FullEkf,
    FullUkf,
    DeEkf,
    DeUkf,
    Bme,
}

impl EstimatorKind {
    pub const ALL: [EstimatorKind; 5] = [
        EstimatorKind::Bme,
        EstimatorKind::DeEkf,
        EstimatorKind::DeUkf,
        EstimatorKind::FullEkf,
        EstimatorKind::FullUkf,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            EstimatorKind::FullEkf => "ekf",
            EstimatorKind::FullUkf => "ukf",
            EstimatorKind::DeEkf => "de-ekf",
            EstimatorKind::DeUkf => "de-ukf",
            EstimatorKind::Bme => "bme",
        }
    }

    pub fn is_cascade(self) -> bool {
        matches!(self, EstimatorKind::DeEkf | EstimatorKind::DeUkf | EstimatorKind::Bme)
    }
}

impl fmt::Display for EstimatorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for EstimatorKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "ekf" | "full-ekf" => Ok(EstimatorKind::FullEkf),
            "ukf" | "full-ukf" => Ok(EstimatorKind::FullUkf),
            "de-ekf" => Ok(EstimatorKind::DeEkf),
            "de-ukf" => Ok(EstimatorKind::DeUkf),
            "bme" => Ok(EstimatorKind::Bme),
            _ => Err(Error::Config(format!(
                "unknown estimator {s:?} (expected ekf, ukf, de-ekf, de-ukf or bme)"
            ))),
        }
    }
}

impl TryFrom<String> for EstimatorKind {
    type Error = Error;

    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl From<EstimatorKind> for String {
    fn from(k: EstimatorKind) -> String {
        k.as_str().to_string()
    }
}

/// EKF or UKF flavour of a nonlinear filter.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Linearization {
    Ekf,
    Ukf,
}

/// Noise intensities and filter settings. Measurement noise is not listed
/// here: every estimator uses the sensor deviations of the world.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EstimatorTuning {
    /// Per-step process variance on angles and positions (full and DE filters).
    pub q_position: f64,
    /// Per-step process variance on rates.
    pub q_rate: f64,
    /// Per-step process variance on the DE acceleration block.
    pub q_acceleration: f64,
    /// rad/s³, white angular jerk of each posture axis (BME). The default
    /// is about the RMS jerk of the default joint motion.
    pub sigma_axis_jerk: f64,
    /// m/s³, white jerk of the CoM.
    pub sigma_com_jerk: f64,
    /// Initial covariance `initial_variance · I` of every filter.
    pub initial_variance: f64,
    pub ukf: UkfScaling,
}

impl Default for EstimatorTuning {
    fn default() -> Self {
        Self {
            q_position: 1e-8,
            q_rate: 1e-6,
            q_acceleration: 1e-2,
            sigma_axis_jerk: 1000.0,
            sigma_com_jerk: 5.0,
            initial_variance: 1e-9,
            ukf: UkfScaling::default(),
        }
    }
}

impl EstimatorTuning {
    pub fn validate(&self) -> Result<()> {
        let all = [
            self.q_position,
            self.q_rate,
            self.q_acceleration,
            self.sigma_axis_jerk,
            self.sigma_com_jerk,
            self.initial_variance,
        ];
        if all.iter().any(|v| !v.is_finite() || *v < 0.0) {
            return Err(Error::Config(format!(
                "estimator noise settings must be non-negative: {self:?}"
            )));
        }
        self.ukf.weights(1)?;
        Ok(())
    }
}

/// Everything an estimator needs besides the chain parameters.
#[derive(Clone, Debug, PartialEq)]
pub struct EstimatorConfig {
    /// s
    pub dt: f64,
    pub noise: NoiseSpec,
    pub tuning: EstimatorTuning,
}

impl EstimatorConfig {
    pub fn new(world: &WorldConfig, tuning: EstimatorTuning) -> Result<Self> {
        world.validate()?;
        tuning.validate()?;
        Ok(Self {
            dt: world.estimator_step,
            noise: world.noise,
            tuning,
        })
    }

    pub(crate) fn full_process_noise(&self, n: usize) -> DMatrix<f64> {
        let dim = n + 2;
        let diag = DVector::from_fn(2 * dim, |i, _| {
            if i < dim {
                self.tuning.q_position
            } else {
                self.tuning.q_rate
            }
        });
        DMatrix::from_diagonal(&diag)
    }

    pub(crate) fn posture_process_noise(&self, n: usize) -> DMatrix<f64> {
        let t = &self.tuning;
        let diag = DVector::from_fn(3 * n, |i, _| [t.q_position, t.q_rate, t.q_acceleration][i / n]);
        DMatrix::from_diagonal(&diag)
    }

    /// Noise of the stacked `(z_g[, z_a], z_e,1, …)` measurement.
    pub(crate) fn measurement_noise(&self, n: usize, with_accel: bool) -> DMatrix<f64> {
        let s = &self.noise;
        let mut diag = vec![s.sigma_gyro.powi(2)];
        if with_accel {
            diag.extend([s.sigma_accel.powi(2); 2]);
        }
        for _ in 1..n {
            diag.extend([s.sigma_enc_pos.powi(2), s.sigma_enc_vel.powi(2)]);
        }
        DMatrix::from_diagonal(&DVector::from_vec(diag))
    }
}

/// Stacks a sensor frame as `(z_g[, z_ax, z_ay], α_1, α̇_1, …)`.
pub fn measurement_vector(sample: &SensorSample, with_accel: bool) -> DVector<f64> {
    let mut z = vec![sample.gyro];
    if with_accel {
        z.extend(sample.accel);
    }
    z.extend(sample.encoders.iter().flatten());
    DVector::from_vec(z)
}

/// Known initial condition every estimator starts from.
#[derive(Clone, Debug, PartialEq)]
pub struct InitialCondition {
    pub state: FullState,
    pub qddot: Vec<f64>,
    pub com: ComState,
}

impl From<&TruthRecord> for InitialCondition {
    fn from(r: &TruthRecord) -> Self {
        Self {
            state: r.state.clone(),
            qddot: r.qddot.clone(),
            com: r.com,
        }
    }
}

/// Generalized coordinates and rates reported by any estimator.
#[derive(Clone, Debug, PartialEq)]
pub struct FullEstimate {
    pub t: f64,
    pub q: Vec<f64>,
    pub qdot: Vec<f64>,
}

impl FullEstimate {
    /// Components in report order `(α…, α̇…, d, h, ḋ, ḣ)`.
    pub fn components(&self) -> Vec<f64> {
        let n = self.q.len() - 2;
        let mut out = Vec::with_capacity(2 * n + 4);
        out.extend(&self.q[..n]);
        out.extend(&self.qdot[..n]);
        out.extend(&self.q[n..]);
        out.extend(&self.qdot[n..]);
        out
    }

    pub fn is_finite(&self) -> bool {
        self.q.iter().chain(&self.qdot).all(|v| v.is_finite())
    }
}

/// Names of [`FullEstimate::components`] for an `n`-link chain, with units.
pub fn component_names(n: usize) -> Vec<(String, &'static str)> {
    let mut out = Vec::with_capacity(2 * n + 4);
    out.extend((0..n).map(|i| (format!("alpha_{i}"), "rad")));
    out.extend((0..n).map(|i| (format!("alpha_{i}_dot"), "rad/s")));
    out.extend([
        ("d".to_string(), "m"),
        ("h".to_string(), "m"),
        ("d_dot".to_string(), "m/s"),
        ("h_dot".to_string(), "m/s"),
    ]);
    out
}

/// A running estimator. Each call consumes the joint torques and the sensor
/// frame of the current instant and returns the new estimate.
pub trait Estimator: Send {
    fn kind(&self) -> EstimatorKind;
    fn step(&mut self, torques: &[f64], sample: &SensorSample) -> Result<FullEstimate>;
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn kind_names_round_trip() {
        for k in EstimatorKind::ALL {
            assert_eq!(k.to_string().parse::<EstimatorKind>().unwrap(), k);
        }
        assert_eq!("full-ekf".parse::<EstimatorKind>().unwrap(), EstimatorKind::FullEkf);
        assert!("kf".parse::<EstimatorKind>().unwrap_err().is_config());
    }

    #[test]
    fn measurement_dimensions() {
        let config = EstimatorConfig::new(&WorldConfig::default(), EstimatorTuning::default()).unwrap();
        assert_eq!(config.measurement_noise(2, true).nrows(), 5);
        assert_eq!(config.measurement_noise(2, false).nrows(), 3);
        assert_eq!(config.measurement_noise(4, true).nrows(), 3 + 2 * 3);
        let sample = SensorSample {
            t: 0.0,
            gyro: 1.0,
            accel: [2.0, 3.0],
            encoders: vec![[4.0, 5.0]],
        };
        assert_eq!(measurement_vector(&sample, true).as_slice(), &[1.0, 2.0, 3.0, 4.0, 5.0]);
        assert_eq!(measurement_vector(&sample, false).as_slice(), &[1.0, 4.0, 5.0]);
    }

    #[test]
    fn tuning_defaults_and_validation() {
        let t: EstimatorTuning = serde_json::from_str(r#"{"sigma_axis_jerk": 10}"#).unwrap();
        assert_eq!(t.sigma_axis_jerk, 10.0);
        assert_eq!(t.sigma_com_jerk, 5.0);
        assert!(serde_json::from_str::<EstimatorTuning>(r#"{"sigma": 1}"#).is_err());
        let bad = EstimatorTuning {
            q_rate: -1.0,
            ..EstimatorTuning::default()
        };
        assert!(bad.validate().is_err());
    }
}
