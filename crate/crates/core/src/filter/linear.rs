use nalgebra::{Cholesky, DMatrix, DVector};

use super::{symmetrized, GaussianBelief};
use crate::error::{check_len, Error, Result};

/// Linear prediction `x ← F x + u`, `P ← F P Fᵀ + Q`.
pub fn kf_predict(
    belief: &GaussianBelief,
    transition: &DMatrix<f64>,
    process_noise: &DMatrix<f64>,
    additive: &DVector<f64>,
) -> Result<GaussianBelief> {
    let dim = belief.dim();
    check_len("transition columns", dim, transition.ncols())?;
    check_len("process noise rows", transition.nrows(), process_noise.nrows())?;
    check_len("process noise columns", transition.nrows(), process_noise.ncols())?;
    check_len("additive input", transition.nrows(), additive.len())?;

    let mean = transition * &belief.mean + additive;
    let cov = transition * &belief.cov * transition.transpose() + process_noise;
    Ok(GaussianBelief {
        mean,
        cov: symmetrized(cov),
    })
}

/// Joseph-form measurement update for a linear measurement `z = H x + v`.
pub fn kf_update(
    belief: &GaussianBelief,
    z: &DVector<f64>,
    observation: &DMatrix<f64>,
    noise: &DMatrix<f64>,
) -> Result<GaussianBelief> {
    check_len("observation columns", belief.dim(), observation.ncols())?;
    check_len("measurement", observation.nrows(), z.len())?;
    let innovation = z - observation * &belief.mean;
    kf_update_innovation(belief, &innovation, observation, noise)
}

/// Joseph-form update given a precomputed innovation `z - h(x)`.
///
/// `K = P Hᵀ S⁻¹`, `P ← (I - K H) P (I - K H)ᵀ + K R Kᵀ`.
pub fn kf_update_innovation(
    belief: &GaussianBelief,
    innovation: &DVector<f64>,
    observation: &DMatrix<f64>,
    noise: &DMatrix<f64>,
) -> Result<GaussianBelief> {
    let dim = belief.dim();
    let meas = innovation.len();
    check_len("observation rows", meas, observation.nrows())?;
    check_len("observation columns", dim, observation.ncols())?;
    check_len("measurement noise rows", meas, noise.nrows())?;
    check_len("measurement noise columns", meas, noise.ncols())?;

    let ph_t = &belief.cov * observation.transpose();
    let innovation_cov = symmetrized(observation * &ph_t + noise);
    let chol = Cholesky::new(innovation_cov).ok_or(Error::InnovationSolve)?;
    // S Kᵀ = H P  →  Kᵀ = S⁻¹ (P Hᵀ)ᵀ
    let gain = chol.solve(&ph_t.transpose()).transpose();

    let mean = &belief.mean + &gain * innovation;
    let i_kh = DMatrix::identity(dim, dim) - &gain * observation;
    let cov = &i_kh * &belief.cov * i_kh.transpose() + &gain * noise * gain.transpose();
    Ok(GaussianBelief {
        mean,
        cov: symmetrized(cov),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::filter::testing::*;
    use approx::assert_relative_eq;
    use nalgebra::{dmatrix, dvector};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn scalar(mean: f64, var: f64) -> GaussianBelief {
        GaussianBelief::new(dvector![mean], dmatrix![var]).unwrap()
    }

    #[test]
    fn predict_identity_and_additive_noise() {
        let b = GaussianBelief::new(dvector![1.0, -2.0], dmatrix![2.0, 0.1; 0.1, 1.0]).unwrap();
        let same = kf_predict(&b, &DMatrix::identity(2, 2), &DMatrix::zeros(2, 2), &DVector::zeros(2)).unwrap();
        assert_eq!(same, b);

        let p = kf_predict(&scalar(0.0, 1.0), &dmatrix![1.0], &dmatrix![0.5], &dvector![0.0]).unwrap();
        assert_eq!(p.cov[(0, 0)], 1.5);
    }

    #[test]
    fn predict_dimension_mismatch() {
        let b = scalar(0.0, 1.0);
        assert!(matches!(
            kf_predict(&b, &DMatrix::identity(2, 2), &DMatrix::zeros(2, 2), &DVector::zeros(2)),
            Err(Error::Dimension { .. })
        ));
    }

    #[test]
    fn scalar_update_examples() {
        let post = kf_update(&scalar(0.0, 1.0), &dvector![1.0], &dmatrix![1.0], &dmatrix![1.0]).unwrap();
        assert_relative_eq!(post.mean[0], 0.5, epsilon = 1e-15);
        assert_relative_eq!(post.cov[(0, 0)], 0.5, epsilon = 1e-15);

        let prior = scalar(0.3, 2.0);
        let post = kf_update(&prior, &dvector![100.0], &dmatrix![1.0], &dmatrix![1e12]).unwrap();
        assert_relative_eq!(post.mean[0], prior.mean[0], epsilon = 1e-6);
        assert_relative_eq!(post.cov[(0, 0)], prior.cov[(0, 0)], epsilon = 1e-6);
    }

    #[test]
    fn singular_innovation_is_an_error() {
        let b = GaussianBelief::new(dvector![0.0], dmatrix![0.0]).unwrap();
        assert!(matches!(
            kf_update(&b, &dvector![1.0], &dmatrix![1.0], &dmatrix![0.0]),
            Err(Error::InnovationSolve)
        ));
    }

    #[test]
    fn sequential_equals_batch() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..200 {
            let dim = 4;
            let prior = GaussianBelief::new(random_vector(&mut rng, dim), random_spd(&mut rng, dim, 0.1)).unwrap();
            let h = random_matrix(&mut rng, 2, dim);
            let z = random_vector(&mut rng, 2);
            let r1 = rng.random_range(0.1..2.0);
            let r2 = rng.random_range(0.1..2.0);

            let batch = kf_update(&prior, &z, &h, &DMatrix::from_diagonal(&dvector![r1, r2])).unwrap();
            let first = kf_update(&prior, &dvector![z[0]], &h.rows(0, 1).into_owned(), &dmatrix![r1]).unwrap();
            let second = kf_update(&first, &dvector![z[1]], &h.rows(1, 1).into_owned(), &dmatrix![r2]).unwrap();

            assert_relative_eq!(batch.mean, second.mean, epsilon = 1e-10);
            assert_relative_eq!(batch.cov, second.cov, epsilon = 1e-10);
        }
    }

    #[test]
    fn update_never_inflates_the_diagonal() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..500 {
            let dim = rng.random_range(1..6);
            let meas = rng.random_range(1..4);
            let prior = GaussianBelief::new(random_vector(&mut rng, dim), random_spd(&mut rng, dim, 1e-3)).unwrap();
            let h = random_matrix(&mut rng, meas, dim);
            let r = random_spd(&mut rng, meas, 1e-2);
            let post = kf_update(&prior, &random_vector(&mut rng, meas), &h, &r).unwrap();
            for i in 0..dim {
                assert!(post.cov[(i, i)] <= prior.cov[(i, i)] * (1.0 + 1e-12) + 1e-15);
            }
            assert!(asymmetry(&post.cov) < 1e-10);
            assert!(min_eigenvalue(&post.cov) >= -1e-10);
        }
    }
}
