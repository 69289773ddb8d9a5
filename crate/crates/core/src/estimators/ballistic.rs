//! Ballistic multibody estimator: independent constant-jerk filters for each
//! posture axis, cascaded into the CoM filter. No dynamics model and no
//! torque input are used.

use nalgebra::{DMatrix, DVector};

use super::com::com_tvkf_step;
use super::decoupled::cascade_estimate;
use super::{Estimator, EstimatorConfig, EstimatorKind, FullEstimate, InitialCondition};
use crate::chain::{ChainParameters, PostureState};
use crate::error::{check_len, Result};
use crate::filter::{kf_predict, kf_update, GaussianBelief};
use crate::sim::SensorSample;

/// `(F_α, Q_α)` for one axis state `(α, α̇, α̈)` driven by white angular jerk.
pub fn axis_model(dt: f64, sigma_jerk: f64) -> (DMatrix<f64>, DMatrix<f64>) {
    let f = DMatrix::from_row_slice(3, 3, &[1.0, dt, dt * dt / 2.0, 0.0, 1.0, dt, 0.0, 0.0, 1.0]);
    let g = DVector::from_row_slice(&[dt.powi(3) / 6.0, dt * dt / 2.0, dt]);
    let q = &g * g.transpose() * sigma_jerk.powi(2);
    (f, q)
}

/// Predict and update axis `axis`: the base (axis 0) sees the gyro, every
/// joint sees its encoder pair.
pub fn bme_axis_step(
    belief: &GaussianBelief,
    axis: usize,
    sample: &SensorSample,
    config: &EstimatorConfig,
) -> Result<GaussianBelief> {
    check_len("axis belief", 3, belief.dim())?;
    let (f, q) = axis_model(config.dt, config.tuning.sigma_axis_jerk);
    let predicted = kf_predict(belief, &f, &q, &DVector::zeros(3))?;
    let noise = &config.noise;
    if axis == 0 {
        let h = DMatrix::from_row_slice(1, 3, &[0.0, 1.0, 0.0]);
        let r = DMatrix::from_element(1, 1, noise.sigma_gyro.powi(2));
        kf_update(&predicted, &DVector::from_element(1, sample.gyro), &h, &r)
    } else {
        let h = DMatrix::from_row_slice(2, 3, &[1.0, 0.0, 0.0, 0.0, 1.0, 0.0]);
        let r = DMatrix::from_diagonal(&DVector::from_row_slice(&[
            noise.sigma_enc_pos.powi(2),
            noise.sigma_enc_vel.powi(2),
        ]));
        let z = DVector::from_row_slice(&sample.encoders[axis - 1]);
        kf_update(&predicted, &z, &h, &r)
    }
}

pub fn bme_posture_step(
    bank: &[GaussianBelief],
    sample: &SensorSample,
    config: &EstimatorConfig,
) -> Result<Vec<GaussianBelief>> {
    check_len("encoder pairs", bank.len().saturating_sub(1), sample.encoders.len())?;
    bank.iter()
        .enumerate()
        .map(|(axis, b)| bme_axis_step(b, axis, sample, config))
        .collect()
}

fn posture_from_bank(bank: &[GaussianBelief]) -> PostureState {
    PostureState {
        qbar: bank.iter().map(|b| b.mean[0]).collect(),
        qbardot: bank.iter().map(|b| b.mean[1]).collect(),
        qbarddot: bank.iter().map(|b| b.mean[2]).collect(),
    }
}

pub struct Bme {
    params: ChainParameters,
    config: EstimatorConfig,
    bank: Vec<GaussianBelief>,
    com: GaussianBelief,
}

impl Bme {
    pub fn new(params: &ChainParameters, config: &EstimatorConfig, initial: &InitialCondition) -> Result<Self> {
        params.validate()?;
        let n = params.n_links();
        check_len("initial accelerations", n + 2, initial.qddot.len())?;
        let var = config.tuning.initial_variance;
        let bank = (0..n)
            .map(|i| {
                let mean = DVector::from_row_slice(&[initial.state.q[i], initial.state.qdot[i], initial.qddot[i]]);
                GaussianBelief::isotropic(mean, var)
            })
            .collect();
        Ok(Self {
            params: params.clone(),
            config: config.clone(),
            bank,
            com: GaussianBelief::isotropic(initial.com.to_vector(), var),
        })
    }

    pub fn bank(&self) -> &[GaussianBelief] {
        &self.bank
    }

    pub fn com_belief(&self) -> &GaussianBelief {
        &self.com
    }
}

impl Estimator for Bme {
    fn kind(&self) -> EstimatorKind {
        EstimatorKind::Bme
    }

    fn step(&mut self, _torques: &[f64], sample: &SensorSample) -> Result<FullEstimate> {
        self.bank = bme_posture_step(&self.bank, sample, &self.config)?;
        let posture = posture_from_bank(&self.bank);
        self.com = com_tvkf_step(&self.com, &posture, sample.accel, &self.params, &self.config)?;
        cascade_estimate(sample.t, &posture, &self.com, &self.params)
    }
}
