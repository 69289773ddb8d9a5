use nalgebra::{DMatrix, DVector};

use super::{kf_update_innovation, numerical_jacobian, symmetrized, GaussianBelief, DEFAULT_RELATIVE_STEP};
use crate::error::{check_len, Result};

/// One extended Kalman filter cycle.
///
/// `F` is the numerical Jacobian of `f` at the previous mean and `H` the one
/// of `h` at the predicted mean; the innovation is `z - h(x*)`.
pub fn ekf_step<F, H>(
    belief: &GaussianBelief,
    mut f: F,
    mut h: H,
    process_noise: &DMatrix<f64>,
    measurement_noise: &DMatrix<f64>,
    z: &DVector<f64>,
) -> Result<GaussianBelief>
where
    F: FnMut(&DVector<f64>) -> Result<DVector<f64>>,
    H: FnMut(&DVector<f64>) -> Result<DVector<f64>>,
{
    let transition = numerical_jacobian(&mut f, &belief.mean, DEFAULT_RELATIVE_STEP)?;
    let mean = f(&belief.mean)?;
    check_len("predicted state", belief.dim(), mean.len())?;
    let cov = &transition * &belief.cov * transition.transpose() + process_noise;
    let predicted = GaussianBelief {
        mean,
        cov: symmetrized(cov),
    };

    let observation = numerical_jacobian(&mut h, &predicted.mean, DEFAULT_RELATIVE_STEP)?;
    let expected = h(&predicted.mean)?;
    check_len("measurement", expected.len(), z.len())?;
    kf_update_innovation(&predicted, &(z - expected), &observation, measurement_noise)
}
