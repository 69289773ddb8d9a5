//! Filters over the full state `x = (q, q̇)` driven by the full dynamics.

use nalgebra::{DMatrix, DVector, Vector2};

use super::{
    measurement_vector, Estimator, EstimatorConfig, EstimatorKind, FullEstimate, InitialCondition, Linearization,
};
use crate::chain::{rotation, ChainParameters, Coordinates};
use crate::error::{check_len, Result};
use crate::filter::{
    kf_update_innovation, numerical_jacobian_columns, ukf_step, GaussianBelief, DEFAULT_RELATIVE_STEP,
};
use crate::sim::{specific_force, SensorSample};

/// Euler step `x + Δt (q̇, a(q, q̇, u))`.
pub fn full_transition<'a>(
    params: &'a ChainParameters,
    dt: f64,
    torques: &'a [f64],
) -> impl FnMut(&DVector<f64>) -> Result<DVector<f64>> + 'a {
    move |x| {
        let dim = params.n_links() + 2;
        let (q, qdot) = x.as_slice().split_at(dim);
        let qddot = params.forward_dynamics(q, qdot, torques, Coordinates::Full)?;
        let mut next = x.clone();
        for i in 0..dim {
            next[i] += dt * qdot[i];
            next[dim + i] += dt * qddot[i];
        }
        Ok(next)
    }
}

/// Predicted `(z_g, z_a, z_e,1, …)`. The accelerometer needs `q̈`, so the
/// dynamics are evaluated inside the measurement model.
pub fn full_measurement<'a>(
    params: &'a ChainParameters,
    torques: &'a [f64],
) -> impl FnMut(&DVector<f64>) -> Result<DVector<f64>> + 'a {
    move |x| {
        let n = params.n_links();
        let dim = n + 2;
        let (q, qdot) = x.as_slice().split_at(dim);
        let qddot = params.forward_dynamics(q, qdot, torques, Coordinates::Full)?;
        let lever = params.imu_lever_acceleration(qdot[0], qddot[0]);
        let imu = Vector2::new(qddot[n], qddot[n + 1]) + rotation(q[0]) * lever;
        let force = specific_force(q[0], imu, params.gravity);
        let mut z = DVector::zeros(3 + 2 * (n - 1));
        z[0] = qdot[0];
        z[1] = force.x;
        z[2] = force.y;
        for i in 1..n {
            z[1 + 2 * i] = q[i];
            z[2 + 2 * i] = qdot[i];
        }
        Ok(z)
    }
}

/// Coordinates the dynamics and the sensors depend on: posture angles and
/// all rates. Nothing depends on the position `(d, h)` itself.
fn active_columns(n: usize) -> Vec<usize> {
    (0..n).chain(n + 2..2 * (n + 2)).collect()
}

/// EKF cycle with the Jacobians taken only over the active columns. The
/// kinematic rows of `F` are written down directly.
fn full_ekf_cycle(
    belief: &GaussianBelief,
    torques: &[f64],
    z: &DVector<f64>,
    params: &ChainParameters,
    config: &EstimatorConfig,
    q: &DMatrix<f64>,
    r: &DMatrix<f64>,
) -> Result<GaussianBelief> {
    let n = params.n_links();
    let dim = n + 2;
    let dt = config.dt;
    let active = active_columns(n);
    let accel = |x: &DVector<f64>| {
        let (q, qdot) = x.as_slice().split_at(dim);
        params.forward_dynamics(q, qdot, torques, Coordinates::Full)
    };

    let x = &belief.mean;
    let a = accel(x)?;
    let jac_a = numerical_jacobian_columns(accel, x, &active, DEFAULT_RELATIVE_STEP)?;
    let mut f = DMatrix::identity(2 * dim, 2 * dim);
    for i in 0..dim {
        f[(i, dim + i)] = dt;
    }
    let mut rate_rows = f.rows_mut(dim, dim);
    rate_rows += &jac_a * dt;
    let mut mean = x.clone();
    for i in 0..dim {
        mean[i] += dt * x[dim + i];
        mean[dim + i] += dt * a[i];
    }
    let predicted = GaussianBelief::new(mean, &f * &belief.cov * f.transpose() + q)?;

    let mut h = full_measurement(params, torques);
    let expected = h(&predicted.mean)?;
    let jac_h = numerical_jacobian_columns(&mut h, &predicted.mean, &active, DEFAULT_RELATIVE_STEP)?;
    kf_update_innovation(&predicted, &(z - expected), &jac_h, r)
}

fn full_step(
    belief: &GaussianBelief,
    torques: &[f64],
    sample: &SensorSample,
    params: &ChainParameters,
    config: &EstimatorConfig,
    variant: Linearization,
) -> Result<GaussianBelief> {
    let n = params.n_links();
    check_len("full belief", 2 * (n + 2), belief.dim())?;
    check_len("encoder pairs", n - 1, sample.encoders.len())?;
    let q = config.full_process_noise(n);
    let r = config.measurement_noise(n, true);
    let z = measurement_vector(sample, true);
    match variant {
        Linearization::Ekf => full_ekf_cycle(belief, torques, &z, params, config, &q, &r),
        Linearization::Ukf => {
            let f = full_transition(params, config.dt, torques);
            let h = full_measurement(params, torques);
            ukf_step(belief, f, h, &q, &r, &z, config.tuning.ukf)
        }
    }
}

pub fn full_ekf_step(
    belief: &GaussianBelief,
    torques: &[f64],
    sample: &SensorSample,
    params: &ChainParameters,
    config: &EstimatorConfig,
) -> Result<GaussianBelief> {
    full_step(belief, torques, sample, params, config, Linearization::Ekf)
}

pub fn full_ukf_step(
    belief: &GaussianBelief,
    torques: &[f64],
    sample: &SensorSample,
    params: &ChainParameters,
    config: &EstimatorConfig,
) -> Result<GaussianBelief> {
    full_step(belief, torques, sample, params, config, Linearization::Ukf)
}

/// Full-dynamics EKF or UKF.
pub struct FullEstimator {
    params: ChainParameters,
    config: EstimatorConfig,
    variant: Linearization,
    belief: GaussianBelief,
}

impl FullEstimator {
    pub fn new(
        params: &ChainParameters,
        config: &EstimatorConfig,
        initial: &InitialCondition,
        variant: Linearization,
    ) -> Result<Self> {
        params.validate()?;
        let mean = initial.state.to_vector();
        check_len("initial state", 2 * (params.n_links() + 2), mean.len())?;
        Ok(Self {
            params: params.clone(),
            config: config.clone(),
            variant,
            belief: GaussianBelief::isotropic(mean, config.tuning.initial_variance),
        })
    }

    pub fn belief(&self) -> &GaussianBelief {
        &self.belief
    }
}

impl Estimator for FullEstimator {
    fn kind(&self) -> EstimatorKind {
        match self.variant {
            Linearization::Ekf => EstimatorKind::FullEkf,
            Linearization::Ukf => EstimatorKind::FullUkf,
        }
    }

    fn step(&mut self, torques: &[f64], sample: &SensorSample) -> Result<FullEstimate> {
        self.belief = full_step(&self.belief, torques, sample, &self.params, &self.config, self.variant)?;
        let dim = self.params.n_links() + 2;
        let x = self.belief.mean.as_slice();
        Ok(FullEstimate {
            t: sample.t,
            q: x[..dim].to_vec(),
            qdot: x[dim..].to_vec(),
        })
    }
}
