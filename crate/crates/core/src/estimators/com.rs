//! Linear CoM filter shared by the cascade estimators.
//!
//! The state is `x_c = (p_x, ṗ_x, p̈_x, p_y, ṗ_y, p̈_y)` in the world frame.
//! In flight the CoM only feels gravity, so the prediction is a fixed linear
//! map; the accelerometer enters through a measurement matrix that depends
//! on the current posture estimate.

use nalgebra::{DMatrix, DVector, Vector2};

use super::EstimatorConfig;
use crate::chain::{rotation, ChainParameters, ComState, PostureState};
use crate::error::{check_len, Result};
use crate::filter::{kf_predict, kf_update_innovation, GaussianBelief};

/// `(F_c, u_c, Q_c)` of the constant-gravity, white-jerk CoM model.
pub fn com_model(dt: f64, gravity: f64, sigma_jerk: f64) -> (DMatrix<f64>, DVector<f64>, DMatrix<f64>) {
    let mut f = DMatrix::zeros(6, 6);
    let mut g = DMatrix::zeros(6, 2);
    for axis in 0..2 {
        let o = 3 * axis;
        f[(o, o)] = 1.0;
        f[(o, o + 1)] = dt;
        f[(o + 1, o + 1)] = 1.0;
        g[(o, axis)] = dt.powi(3) / 6.0;
        g[(o + 1, axis)] = dt * dt / 2.0;
        g[(o + 2, axis)] = dt;
    }
    let u = DVector::from_row_slice(&[0.0, 0.0, 0.0, -gravity * dt * dt / 2.0, -gravity * dt, -gravity]);
    let q = &g * g.transpose() * sigma_jerk.powi(2);
    (f, u, q)
}

pub fn com_predict(
    belief: &GaussianBelief,
    params: &ChainParameters,
    config: &EstimatorConfig,
) -> Result<GaussianBelief> {
    let (f, u, q) = com_model(config.dt, params.gravity, config.tuning.sigma_com_jerk);
    kf_predict(belief, &f, &q, &u)
}

/// Accelerometer model `z_a = H_c x_c + offset` for a given posture.
///
/// Only the two acceleration columns of `H_c` are non-zero; they hold the
/// columns of `R(α_0)ᵀ`.
pub fn com_measurement(posture: &PostureState, params: &ChainParameters) -> Result<(DMatrix<f64>, DVector<f64>)> {
    check_len("posture", params.n_links(), posture.qbar.len())?;
    let rt = rotation(posture.qbar[0]).transpose();
    let mut h = DMatrix::zeros(2, 6);
    h.fixed_view_mut::<2, 1>(0, 2).copy_from(&rt.column(0));
    h.fixed_view_mut::<2, 1>(0, 5).copy_from(&rt.column(1));

    let (_, local_accel) = params.chain_com_derivatives(&posture.qbar, &posture.qbardot, &posture.qbarddot)?;
    let lever = params.imu_lever_acceleration(posture.qbardot[0], posture.qbarddot[0]);
    let offset = rt * (Vector2::new(0.0, params.gravity) - local_accel) + lever;
    Ok((h, DVector::from_column_slice(offset.as_slice())))
}

/// One predict/update cycle of the CoM filter given the posture estimate of
/// the same instant.
pub fn com_tvkf_step(
    belief: &GaussianBelief,
    posture: &PostureState,
    accel: [f64; 2],
    params: &ChainParameters,
    config: &EstimatorConfig,
) -> Result<GaussianBelief> {
    check_len("CoM belief", 6, belief.dim())?;
    let predicted = com_predict(belief, params, config)?;
    let (h, offset) = com_measurement(posture, params)?;
    let innovation = DVector::from_row_slice(&accel) - &h * &predicted.mean - offset;
    let r = DMatrix::identity(2, 2) * config.noise.sigma_accel.powi(2);
    kf_update_innovation(&predicted, &innovation, &h, &r)
}

/// `(d, h, ḋ, ḣ)` of the first link frame from the CoM state and the posture.
pub fn recover_reference_point(com: &ComState, posture: &PostureState, params: &ChainParameters) -> Result<[f64; 4]> {
    let local = params.chain_com(&posture.qbar)?;
    let (local_vel, _) = params.chain_com_derivatives(&posture.qbar, &posture.qbardot, &posture.qbarddot)?;
    Ok([
        com.position[0] - local.x,
        com.position[1] - local.y,
        com.velocity[0] - local_vel.x,
        com.velocity[1] - local_vel.y,
    ])
}
