//! The three filter primitives on a constant-velocity target observed in
//! position: KF, EKF (numerical Jacobians) and UKF give the same answer on a
//! linear model.

use flying_chain::filter::{ekf_step, kf_predict, kf_update, ukf_step, GaussianBelief, UkfScaling};
use nalgebra::{dmatrix, dvector, DVector};

fn main() -> flying_chain::Result<()> {
    let dt = 0.1;
    let f = dmatrix![1.0, dt; 0.0, 1.0];
    let h = dmatrix![1.0, 0.0];
    let q = dmatrix![1e-4, 0.0; 0.0, 1e-3];
    let r = dmatrix![0.05];
    let zero = dvector![0.0, 0.0];

    let start = GaussianBelief::isotropic(dvector![0.0, 1.0], 0.5);
    let (mut kf, mut ekf, mut ukf) = (start.clone(), start.clone(), start);
    for k in 1..=20 {
        let z = dvector![k as f64 * dt * 1.2 + 0.02 * (k as f64).sin()];
        kf = kf_update(&kf_predict(&kf, &f, &q, &zero)?, &z, &h, &r)?;
        let transition = |x: &DVector<f64>| Ok(&f * x);
        let measure = |x: &DVector<f64>| Ok(&h * x);
        ekf = ekf_step(&ekf, transition, measure, &q, &r, &z)?;
        ukf = ukf_step(&ukf, transition, measure, &q, &r, &z, UkfScaling::default())?;
    }

    println!("KF  mean {:.6?}", kf.mean.as_slice());
    println!("EKF mean {:.6?}", ekf.mean.as_slice());
    println!("UKF mean {:.6?}", ukf.mean.as_slice());
    println!("EKF - KF  {:.1e}", (&ekf.mean - &kf.mean).amax());
    println!("UKF - KF  {:.1e}", (&ukf.mean - &kf.mean).amax());
    Ok(())
}
