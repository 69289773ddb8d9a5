//! Decoupled estimator: nonlinear posture filter on the reduced dynamics,
//! cascaded into the CoM filter.

use nalgebra::{DMatrix, DVector};

use super::com::{com_tvkf_step, recover_reference_point};
use super::{
    measurement_vector, Estimator, EstimatorConfig, EstimatorKind, FullEstimate, InitialCondition, Linearization,
};
use crate::chain::{ChainParameters, ComState, Coordinates, PostureState};
use crate::error::{check_len, Result};
use crate::filter::{
    kf_update_innovation, numerical_jacobian_columns, ukf_step, GaussianBelief, DEFAULT_RELATIVE_STEP,
};
use crate::sim::SensorSample;

/// `(q̄ + Δt q̇̄, q̇̄ + Δt ā, ā)` with `ā = ā(q̄, q̇̄, ū)`; the acceleration
/// block is replaced by the model, not integrated.
fn posture_transition<'a>(
    params: &'a ChainParameters,
    dt: f64,
    torques: &'a [f64],
) -> impl FnMut(&DVector<f64>) -> Result<DVector<f64>> + 'a {
    move |x| {
        let n = params.n_links();
        let (qbar, rest) = x.as_slice().split_at(n);
        let rates = &rest[..n];
        let accel = params.forward_dynamics(qbar, rates, torques, Coordinates::Reduced)?;
        let mut next = DVector::zeros(3 * n);
        for i in 0..n {
            next[i] = qbar[i] + dt * rates[i];
            next[n + i] = rates[i] + dt * accel[i];
            next[2 * n + i] = accel[i];
        }
        Ok(next)
    }
}

/// `(α̇_0, α_1, α̇_1, …)` read off a posture state `(q̄, q̇̄, q̈̄)`.
pub fn posture_measurement(n: usize) -> impl FnMut(&DVector<f64>) -> Result<DVector<f64>> {
    move |x| {
        let mut z = DVector::zeros(1 + 2 * (n - 1));
        z[0] = x[n];
        for i in 1..n {
            z[2 * i - 1] = x[i];
            z[2 * i] = x[n + i];
        }
        Ok(z)
    }
}

/// Selection matrix of [`posture_measurement`].
pub fn posture_observation(n: usize) -> DMatrix<f64> {
    let mut h = DMatrix::zeros(1 + 2 * (n - 1), 3 * n);
    h[(0, n)] = 1.0;
    for i in 1..n {
        h[(2 * i - 1, i)] = 1.0;
        h[(2 * i, n + i)] = 1.0;
    }
    h
}

/// EKF cycle exploiting the structure of the posture model: only `ā` is
/// differentiated numerically (and not along `q̈̄`, which it ignores), and
/// the measurement is a fixed selection.
fn posture_ekf_cycle(
    belief: &GaussianBelief,
    torques: &[f64],
    z: &DVector<f64>,
    params: &ChainParameters,
    config: &EstimatorConfig,
    q: &DMatrix<f64>,
    r: &DMatrix<f64>,
) -> Result<GaussianBelief> {
    let n = params.n_links();
    let dt = config.dt;
    let accel = |x: &DVector<f64>| {
        let x = x.as_slice();
        params.forward_dynamics(&x[..n], &x[n..2 * n], torques, Coordinates::Reduced)
    };
    let active: Vec<usize> = (0..2 * n).collect();
    let jac_a = numerical_jacobian_columns(accel, &belief.mean, &active, DEFAULT_RELATIVE_STEP)?;
    let mean = posture_transition(params, dt, torques)(&belief.mean)?;

    let mut f = DMatrix::zeros(3 * n, 3 * n);
    for i in 0..n {
        f[(i, i)] = 1.0;
        f[(i, n + i)] = dt;
        f[(n + i, n + i)] = 1.0;
    }
    let mut rate_rows = f.rows_mut(n, n);
    rate_rows += &jac_a * dt;
    f.rows_mut(2 * n, n).copy_from(&jac_a);
    let predicted = GaussianBelief::new(mean, &f * &belief.cov * f.transpose() + q)?;

    let h = posture_observation(n);
    let innovation = z - &h * &predicted.mean;
    kf_update_innovation(&predicted, &innovation, &h, r)
}

pub fn de_posture_step(
    belief: &GaussianBelief,
    torques: &[f64],
    sample: &SensorSample,
    params: &ChainParameters,
    config: &EstimatorConfig,
    variant: Linearization,
) -> Result<GaussianBelief> {
    let n = params.n_links();
    check_len("posture belief", 3 * n, belief.dim())?;
    check_len("encoder pairs", n - 1, sample.encoders.len())?;
    let q = config.posture_process_noise(n);
    let r = config.measurement_noise(n, false);
    let z = measurement_vector(sample, false);
    match variant {
        Linearization::Ekf => posture_ekf_cycle(belief, torques, &z, params, config, &q, &r),
        Linearization::Ukf => {
            let f = posture_transition(params, config.dt, torques);
            ukf_step(belief, f, posture_measurement(n), &q, &r, &z, config.tuning.ukf)
        }
    }
}

pub(crate) fn posture_from_mean(mean: &DVector<f64>, n: usize) -> PostureState {
    let x = mean.as_slice();
    PostureState {
        qbar: x[..n].to_vec(),
        qbardot: x[n..2 * n].to_vec(),
        qbarddot: x[2 * n..3 * n].to_vec(),
    }
}

/// Assembles a [`FullEstimate`] from the cascade outputs.
pub(crate) fn cascade_estimate(
    t: f64,
    posture: &PostureState,
    com: &GaussianBelief,
    params: &ChainParameters,
) -> Result<FullEstimate> {
    let [d, h, dd, hd] = recover_reference_point(&ComState::from_vector(&com.mean), posture, params)?;
    let mut q = posture.qbar.clone();
    q.extend([d, h]);
    let mut qdot = posture.qbardot.clone();
    qdot.extend([dd, hd]);
    Ok(FullEstimate { t, q, qdot })
}

pub struct DecoupledEstimator {
    params: ChainParameters,
    config: EstimatorConfig,
    variant: Linearization,
    posture: GaussianBelief,
    com: GaussianBelief,
}

impl DecoupledEstimator {
    pub fn new(
        params: &ChainParameters,
        config: &EstimatorConfig,
        initial: &InitialCondition,
        variant: Linearization,
    ) -> Result<Self> {
        params.validate()?;
        let n = params.n_links();
        check_len("initial accelerations", n + 2, initial.qddot.len())?;
        let mut mean = Vec::with_capacity(3 * n);
        mean.extend(initial.state.posture());
        mean.extend(initial.state.posture_rates());
        mean.extend(&initial.qddot[..n]);
        let var = config.tuning.initial_variance;
        Ok(Self {
            params: params.clone(),
            config: config.clone(),
            variant,
            posture: GaussianBelief::isotropic(DVector::from_vec(mean), var),
            com: GaussianBelief::isotropic(initial.com.to_vector(), var),
        })
    }

    pub fn posture_belief(&self) -> &GaussianBelief {
        &self.posture
    }

    pub fn com_belief(&self) -> &GaussianBelief {
        &self.com
    }
}

impl Estimator for DecoupledEstimator {
    fn kind(&self) -> EstimatorKind {
        match self.variant {
            Linearization::Ekf => EstimatorKind::DeEkf,
            Linearization::Ukf => EstimatorKind::DeUkf,
        }
    }

    fn step(&mut self, torques: &[f64], sample: &SensorSample) -> Result<FullEstimate> {
        let n = self.params.n_links();
        self.posture = de_posture_step(&self.posture, torques, sample, &self.params, &self.config, self.variant)?;
        let posture = posture_from_mean(&self.posture.mean, n);
        self.com = com_tvkf_step(&self.com, &posture, sample.accel, &self.params, &self.config)?;
        cascade_estimate(sample.t, &posture, &self.com, &self.params)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::estimators::EstimatorTuning;
    use crate::filter::{ekf_step, numerical_jacobian};
    use crate::sim::WorldConfig;

    #[test]
    fn measurement_is_a_selection() {
        for n in 1..5 {
            let x = DVector::from_fn(3 * n, |i, _| i as f64 * 0.37 - 1.0);
            let jac = numerical_jacobian(posture_measurement(n), &x, 1e-6).unwrap();
            assert_eq!(jac.nrows(), 1 + 2 * (n - 1));
            assert!((jac - posture_observation(n)).amax() < 1e-12);
        }
    }

    #[test]
    fn structured_ekf_matches_generic() {
        let params = ChainParameters::two_link_default();
        let config = EstimatorConfig::new(&WorldConfig::default(), EstimatorTuning::default()).unwrap();
        let mean = DVector::from_row_slice(&[0.4, -0.7, -3.0, 2.0, 1.0, -5.0]);
        let mut cov = DMatrix::identity(6, 6) * 1e-4;
        cov[(1, 4)] = 3e-5;
        cov[(4, 1)] = 3e-5;
        let belief = GaussianBelief::new(mean, cov).unwrap();
        let torques = [0.8];
        let z = DVector::from_row_slice(&[-2.9, -0.69, 2.1]);
        let q = config.posture_process_noise(2);
        let r = config.measurement_noise(2, false);
        let fast = posture_ekf_cycle(&belief, &torques, &z, &params, &config, &q, &r).unwrap();
        let f = posture_transition(&params, config.dt, &torques);
        let generic = ekf_step(&belief, f, posture_measurement(2), &q, &r, &z).unwrap();
        assert!((&fast.mean - &generic.mean).amax() < 1e-9);
        assert!((&fast.cov - &generic.cov).amax() < 1e-12);
    }

    #[test]
    fn equilibrium_prediction_has_zero_acceleration() {
        let mut params = ChainParameters::two_link_default();
        params.damping = vec![0.0];
        let x = DVector::from_row_slice(&[0.3, -0.2, 0.0, 0.0, 5.0, 5.0]);
        let next = posture_transition(&params, 1e-3, &[0.0])(&x).unwrap();
        assert!(next.rows(4, 2).amax() < 1e-12);
        assert!((next[0] - 0.3).abs() < 1e-15);

        // A single body keeps spinning at a constant rate.
        let single = ChainParameters {
            masses: vec![2.0],
            inertias: vec![0.1],
            com_offsets: vec![[0.5, 0.1]],
            link_lengths: vec![],
            damping: vec![],
            imu_offset: [0.0, 0.0],
            gravity: 9.81,
        };
        let x = DVector::from_row_slice(&[0.3, -4.0, 1.0]);
        let next = posture_transition(&single, 1e-3, &[])(&x).unwrap();
        assert!(next[2].abs() < 1e-12);
        assert!((next[1] + 4.0).abs() < 1e-12);
    }
}
