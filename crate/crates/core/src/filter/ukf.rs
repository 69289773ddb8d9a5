use nalgebra::{Cholesky, DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::{psd_factor, symmetrized, GaussianBelief};
use crate::error::{check_len, Error, Result};

/// Scaled unscented transform parameters.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct UkfScaling {
    pub alpha: f64,
    pub beta: f64,
    pub kappa: f64,
}

impl Default for UkfScaling {
    fn default() -> Self {
        Self {
            alpha: 1e-3,
            beta: 2.0,
            kappa: 0.0,
        }
    }
}

impl UkfScaling {
    pub fn lambda(&self, dim: usize) -> f64 {
        let l = dim as f64;
        self.alpha * self.alpha * (l + self.kappa) - l
    }

    /// Mean and covariance weights for `2 · dim + 1` points.
    pub fn weights(&self, dim: usize) -> Result<(Vec<f64>, Vec<f64>)> {
        let spread = dim as f64 + self.lambda(dim);
        if dim == 0 || spread == 0.0 || !spread.is_finite() {
            return Err(Error::Config(format!(
                "unscented scaling {self:?} is degenerate for dimension {dim}"
            )));
        }
        let w0 = self.lambda(dim) / spread;
        let wi = 0.5 / spread;
        let mut mean_weights = vec![wi; 2 * dim + 1];
        let mut cov_weights = mean_weights.clone();
        mean_weights[0] = w0;
        cov_weights[0] = w0 + 1.0 - self.alpha * self.alpha + self.beta;
        Ok((mean_weights, cov_weights))
    }
}

/// Deterministic sample set `x̄, x̄ ± columns of √((L + λ) P)`.
#[derive(Clone, Debug)]
pub struct SigmaSet {
    pub points: Vec<DVector<f64>>,
    pub mean_weights: Vec<f64>,
    pub cov_weights: Vec<f64>,
    pub scaling: UkfScaling,
}

impl SigmaSet {
    pub fn new(belief: &GaussianBelief, scaling: UkfScaling) -> Result<Self> {
        let dim = belief.dim();
        let (mean_weights, cov_weights) = scaling.weights(dim)?;
        let spread = dim as f64 + scaling.lambda(dim);
        if spread < 0.0 {
            return Err(Error::SquareRoot);
        }
        let root = psd_factor(&(&belief.cov * spread))?;
        let mut points = Vec::with_capacity(2 * dim + 1);
        points.push(belief.mean.clone());
        for j in 0..dim {
            points.push(&belief.mean + root.column(j));
        }
        for j in 0..dim {
            points.push(&belief.mean - root.column(j));
        }
        Ok(Self {
            points,
            mean_weights,
            cov_weights,
            scaling,
        })
    }

    pub fn propagate<F>(&self, f: F) -> Result<Vec<DVector<f64>>>
    where
        F: FnMut(&DVector<f64>) -> Result<DVector<f64>>,
    {
        self.points.iter().map(f).collect()
    }

    /// `Σ wᵢ yᵢ`, accumulated relative to the central image so the large
    /// opposite-signed weights of small `α` do not cancel catastrophically.
    pub fn weighted_mean(&self, images: &[DVector<f64>]) -> DVector<f64> {
        let centre = &images[0];
        let mut mean = centre.clone();
        for (w, y) in self.mean_weights.iter().zip(images).skip(1) {
            mean += (y - centre) * *w;
        }
        mean
    }

    /// `Σ wᶜᵢ (aᵢ - ā)(bᵢ - b̄)ᵀ`.
    pub fn weighted_cross(
        &self,
        a: &[DVector<f64>],
        a_mean: &DVector<f64>,
        b: &[DVector<f64>],
        b_mean: &DVector<f64>,
    ) -> DMatrix<f64> {
        let mut out = DMatrix::zeros(a_mean.len(), b_mean.len());
        for ((w, ai), bi) in self.cov_weights.iter().zip(a).zip(b) {
            out.ger(*w, &(ai - a_mean), &(bi - b_mean), 1.0);
        }
        out
    }
}

/// One unscented Kalman filter cycle with additive process and measurement
/// noise. Sigma points are redrawn from the predicted belief before the
/// measurement transform.
pub fn ukf_step<F, H>(
    belief: &GaussianBelief,
    f: F,
    h: H,
    process_noise: &DMatrix<f64>,
    measurement_noise: &DMatrix<f64>,
    z: &DVector<f64>,
    scaling: UkfScaling,
) -> Result<GaussianBelief>
where
    F: FnMut(&DVector<f64>) -> Result<DVector<f64>>,
    H: FnMut(&DVector<f64>) -> Result<DVector<f64>>,
{
    let sigma = SigmaSet::new(belief, scaling)?;
    let images = sigma.propagate(f)?;
    let mean = sigma.weighted_mean(&images);
    check_len("predicted state", belief.dim(), mean.len())?;
    let cov = sigma.weighted_cross(&images, &mean, &images, &mean) + process_noise;
    let predicted = GaussianBelief {
        mean,
        cov: symmetrized(cov),
    };

    let sigma = SigmaSet::new(&predicted, scaling)?;
    let outputs = sigma.propagate(h)?;
    let expected = sigma.weighted_mean(&outputs);
    check_len("measurement", expected.len(), z.len())?;
    let innovation_cov =
        symmetrized(sigma.weighted_cross(&outputs, &expected, &outputs, &expected) + measurement_noise);
    let cross = sigma.weighted_cross(&sigma.points, &predicted.mean, &outputs, &expected);

    let chol = Cholesky::new(innovation_cov.clone()).ok_or(Error::InnovationSolve)?;
    let gain = chol.solve(&cross.transpose()).transpose();
    let mean = &predicted.mean + &gain * (z - expected);
    let cov = &predicted.cov - &gain * innovation_cov * gain.transpose();
    Ok(GaussianBelief {
        mean,
        cov: symmetrized(cov),
    })
}
