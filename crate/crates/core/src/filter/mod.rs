//! Gaussian filtering primitives shared by every estimator.
//!
//! Beliefs are plain values; every step consumes a belief and returns a new
//! one whose covariance has been re-symmetrized.

mod ekf;
mod jacobian;
mod linear;
mod ukf;

pub use ekf::ekf_step;
pub use jacobian::{numerical_jacobian, numerical_jacobian_columns, DEFAULT_RELATIVE_STEP};
pub use linear::{kf_predict, kf_update, kf_update_innovation};
pub use ukf::{ukf_step, SigmaSet, UkfScaling};

use nalgebra::{Cholesky, DMatrix, DVector};

use crate::error::{check_len, Error, Result};

/// Mean and covariance of a Gaussian state estimate.
#[derive(Clone, Debug, PartialEq)]
pub struct GaussianBelief {
    pub mean: DVector<f64>,
    pub cov: DMatrix<f64>,
}

impl GaussianBelief {
    pub fn new(mean: DVector<f64>, cov: DMatrix<f64>) -> Result<Self> {
        check_len("covariance rows", mean.len(), cov.nrows())?;
        check_len("covariance columns", mean.len(), cov.ncols())?;
        Ok(Self {
            mean,
            cov: symmetrized(cov),
        })
    }

    /// Belief with an isotropic covariance `variance · I`.
    pub fn isotropic(mean: DVector<f64>, variance: f64) -> Self {
        let dim = mean.len();
        Self {
            mean,
            cov: DMatrix::identity(dim, dim) * variance,
        }
    }

    pub fn dim(&self) -> usize {
        self.mean.len()
    }
}

pub(crate) fn symmetrized(m: DMatrix<f64>) -> DMatrix<f64> {
    let t = m.transpose();
    (m + t) * 0.5
}

/// Lower Cholesky factor of a PSD matrix, escalating diagonal jitter
/// `1e-12 → 1e-6` (×10 each attempt) before giving up.
pub(crate) fn psd_factor(m: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    if let Some(chol) = Cholesky::new(m.clone()) {
        return Ok(chol.l());
    }
    let dim = m.nrows();
    let mut jitter = 1e-12;
    while jitter <= 1e-6 * (1.0 + 1e-9) {
        let shifted = m + DMatrix::identity(dim, dim) * jitter;
        if let Some(chol) = Cholesky::new(shifted) {
            return Ok(chol.l());
        }
        jitter *= 10.0;
    }
    Err(Error::SquareRoot)
}

#[cfg(test)]
pub(crate) mod testing {
    use nalgebra::{DMatrix, DVector};
    use rand::Rng;

    pub fn random_matrix(rng: &mut impl Rng, rows: usize, cols: usize) -> DMatrix<f64> {
        DMatrix::from_fn(rows, cols, |_, _| rng.random_range(-1.0..1.0))
    }

    pub fn random_vector(rng: &mut impl Rng, dim: usize) -> DVector<f64> {
        DVector::from_fn(dim, |_, _| rng.random_range(-1.0..1.0))
    }

    pub fn random_spd(rng: &mut impl Rng, dim: usize, floor: f64) -> DMatrix<f64> {
        let a = random_matrix(rng, dim, dim);
        &a * a.transpose() + DMatrix::identity(dim, dim) * floor
    }

    pub fn min_eigenvalue(m: &DMatrix<f64>) -> f64 {
        m.clone().symmetric_eigenvalues().min()
    }

    pub fn asymmetry(m: &DMatrix<f64>) -> f64 {
        (m - m.transpose()).amax()
    }
}
