use nalgebra::Vector2;
use rand::Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use super::{NoiseSpec, TruthRecord};
use crate::chain::{rotation, ChainParameters};
use crate::error::{Error, Result};

/// One measurement frame: base gyro, base accelerometer and joint encoders.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SensorSample {
    /// s
    pub t: f64,
    /// rad/s
    pub gyro: f64,
    /// m/s², specific force in the IMU frame
    pub accel: [f64; 2],
    /// `(α_i, α̇_i)` for joints `1 … n-1`
    pub encoders: Vec<[f64; 2]>,
}

/// Specific force sensed by an accelerometer rotated by `alpha0` whose
/// origin accelerates at `imu_accel` in the world frame.
pub fn specific_force(alpha0: f64, imu_accel: Vector2<f64>, gravity: f64) -> Vector2<f64> {
    rotation(alpha0).transpose() * (imu_accel - Vector2::new(0.0, -gravity))
}

fn normal(sigma: f64) -> Result<Normal<f64>> {
    Normal::new(0.0, sigma).map_err(|e| Error::Config(format!("noise deviation {sigma}: {e}")))
}

/// Draws one noisy measurement frame from a truth record.
///
/// Noise is drawn in a fixed order (gyro, accelerometer x then y, then the
/// position and rate of each joint) so a seed fixes the whole stream.
pub fn sample_sensors<R: Rng + ?Sized>(
    params: &ChainParameters,
    record: &TruthRecord,
    noise: &NoiseSpec,
    rng: &mut R,
) -> Result<SensorSample> {
    let n = params.n_links();
    let posture = record.posture();
    let imu = params.imu_point_acceleration(&posture, Vector2::from(record.com.acceleration))?;
    let force = specific_force(posture.qbar[0], imu, params.gravity);

    let gyro = normal(noise.sigma_gyro)?;
    let accel = normal(noise.sigma_accel)?;
    let enc_pos = normal(noise.sigma_enc_pos)?;
    let enc_vel = normal(noise.sigma_enc_vel)?;

    let z_g = posture.qbardot[0] + gyro.sample(rng);
    let z_ax = force.x + accel.sample(rng);
    let z_ay = force.y + accel.sample(rng);
    let encoders = (1..n)
        .map(|i| {
            let pos = posture.qbar[i] + enc_pos.sample(rng);
            let vel = posture.qbardot[i] + enc_vel.sample(rng);
            [pos, vel]
        })
        .collect();
    Ok(SensorSample {
        t: record.t,
        gyro: z_g,
        accel: [z_ax, z_ay],
        encoders,
    })
}

/// Samples every record of a truth run with one generator.
pub fn sensor_stream<R: Rng + ?Sized>(
    params: &ChainParameters,
    truth: &[TruthRecord],
    noise: &NoiseSpec,
    rng: &mut R,
) -> Result<Vec<SensorSample>> {
    truth.iter().map(|r| sample_sensors(params, r, noise, rng)).collect()
}
