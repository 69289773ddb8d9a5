mod common;

use flying_chain::filter::{
    ekf_step, kf_predict, kf_update, numerical_jacobian, ukf_step, GaussianBelief, SigmaSet, UkfScaling,
    DEFAULT_RELATIVE_STEP,
};
use nalgebra::{dmatrix, dvector, DMatrix, DVector};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use common::{dyadic_matrix, dyadic_vector, min_eigenvalue, random_spd, random_vec};

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn ekf_matches_kf_on_dyadic_linear_systems(seed in any::<u64>(), dim in 1usize..=6, meas in 1usize..=4) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let f = dyadic_matrix(&mut rng, dim, dim);
        let h = dyadic_matrix(&mut rng, meas, dim);
        let q = random_spd(&mut rng, dim, 1e-3);
        let r = random_spd(&mut rng, meas, 1e-2);
        let prior = GaussianBelief::new(dyadic_vector(&mut rng, dim), random_spd(&mut rng, dim, 1e-2)).unwrap();
        let z = dyadic_vector(&mut rng, meas);
        let kf = kf_update(&kf_predict(&prior, &f, &q, &DVector::zeros(dim)).unwrap(), &z, &h, &r).unwrap();
        let ekf = ekf_step(&prior, |x: &DVector<f64>| Ok(&f * x), |x: &DVector<f64>| Ok(&h * x), &q, &r, &z).unwrap();
        prop_assert!((&ekf.mean - &kf.mean).amax() <= 1e-12);
        prop_assert!((&ekf.cov - &kf.cov).amax() <= 1e-12);
    }

    #[test]
    fn ukf_matches_kf_on_linear_systems(seed in any::<u64>(), dim in 1usize..=6, meas in 1usize..=4) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let f = DMatrix::from_fn(dim, dim, |_, _| rng.random_range(-0.4..0.4));
        let h = DMatrix::from_fn(meas, dim, |_, _| rng.random_range(-1.0..1.0));
        let q = random_spd(&mut rng, dim, 1e-3) * 0.1;
        let r = random_spd(&mut rng, meas, 1e-2) * 0.1;
        let prior = GaussianBelief::new(DVector::from_vec(random_vec(&mut rng, dim, 1.0)), random_spd(&mut rng, dim, 1e-2)).unwrap();
        let z = DVector::from_vec(random_vec(&mut rng, meas, 1.0));
        let kf = kf_update(&kf_predict(&prior, &f, &q, &DVector::zeros(dim)).unwrap(), &z, &h, &r).unwrap();
        let ukf = ukf_step(&prior, |x: &DVector<f64>| Ok(&f * x), |x: &DVector<f64>| Ok(&h * x), &q, &r, &z, UkfScaling::default()).unwrap();
        prop_assert!((&ukf.mean - &kf.mean).amax() <= 1e-9);
        prop_assert!((&ukf.cov - &kf.cov).amax() <= 1e-9);
    }

    #[test]
    fn joseph_update_keeps_covariance_psd(seed in any::<u64>(), dim in 1usize..=6, meas in 1usize..=3, log_r in -12.0..0.0f64) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let prior = GaussianBelief::new(DVector::zeros(dim), random_spd(&mut rng, dim, 1e-9)).unwrap();
        let h = DMatrix::from_fn(meas, dim, |_, _| rng.random_range(-1.0..1.0));
        let r = DMatrix::identity(meas, meas) * 10f64.powf(log_r);
        let z = DVector::from_vec(random_vec(&mut rng, meas, 1.0));
        let post = kf_update(&prior, &z, &h, &r).unwrap();
        prop_assert_eq!(&post.cov, &post.cov.transpose());
        prop_assert!(min_eigenvalue(&post.cov) >= -1e-12 * prior.cov.amax());
        // Conditioning never increases uncertainty.
        prop_assert!(min_eigenvalue(&(&prior.cov - &post.cov)) >= -1e-9 * prior.cov.amax());
    }

    #[test]
    fn sigma_points_reproduce_mean_and_covariance(seed in any::<u64>(), dim in 1usize..=8, alpha in 1e-3..1.0f64) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let belief = GaussianBelief::new(DVector::from_vec(random_vec(&mut rng, dim, 2.0)), random_spd(&mut rng, dim, 1e-2)).unwrap();
        let scaling = UkfScaling { alpha, ..UkfScaling::default() };
        let sigma = SigmaSet::new(&belief, scaling).unwrap();
        prop_assert_eq!(sigma.points.len(), 2 * dim + 1);
        let sum: f64 = sigma.mean_weights.iter().sum();
        let abs: f64 = sigma.mean_weights.iter().map(|w| w.abs()).sum();
        prop_assert!((sum - 1.0).abs() <= sigma.points.len() as f64 * f64::EPSILON * abs);
        let mean = sigma.weighted_mean(&sigma.points);
        prop_assert!((&mean - &belief.mean).amax() <= 1e-10);
        let cov = sigma.weighted_cross(&sigma.points, &belief.mean, &sigma.points, &belief.mean);
        prop_assert!((&cov - &belief.cov).amax() <= 1e-9 * belief.cov.amax());
    }
}

#[test]
fn scalar_kalman_gain_by_hand() {
    let prior = GaussianBelief::new(dvector![1.0], dmatrix![4.0]).unwrap();
    let post = kf_update(&prior, &dvector![3.0], &dmatrix![1.0], &dmatrix![1.0]).unwrap();
    assert!((post.mean[0] - 2.6).abs() < 1e-15);
    assert!((post.cov[(0, 0)] - 0.8).abs() < 1e-15);
}

#[test]
fn numerical_jacobian_of_a_polynomial() {
    let x = dvector![1.5, -0.5];
    let jac = numerical_jacobian(
        |v: &DVector<f64>| Ok(dvector![v[0] * v[0] * v[1], v[1].sin()]),
        &x,
        DEFAULT_RELATIVE_STEP,
    )
    .unwrap();
    let exact = dmatrix![2.0 * 1.5 * -0.5, 1.5 * 1.5; 0.0, (-0.5f64).cos()];
    assert!((jac - exact).amax() < 1e-8);
}

#[test]
fn ukf_captures_second_order_mean_shift() {
    // y = x², x ~ N(1, 0.25): E[y] = 1.25, which linearization misses.
    let belief = GaussianBelief::new(dvector![1.0], dmatrix![0.25]).unwrap();
    let sigma = SigmaSet::new(
        &belief,
        UkfScaling {
            alpha: 1.0,
            beta: 0.0,
            kappa: 2.0,
        },
    )
    .unwrap();
    let images = sigma.propagate(|x: &DVector<f64>| Ok(dvector![x[0] * x[0]])).unwrap();
    assert!((sigma.weighted_mean(&images)[0] - 1.25).abs() < 1e-12);
}

#[test]
fn degenerate_innovation_is_an_error() {
    let prior = GaussianBelief::new(dvector![0.0], dmatrix![0.0]).unwrap();
    assert!(kf_update(&prior, &dvector![1.0], &dmatrix![1.0], &dmatrix![0.0]).is_err());
}
