#![allow(dead_code)]

use flying_chain::chain::{ChainParameters, FullState, PostureKinematics};
use nalgebra::{DMatrix, DVector, Vector2};
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

/// Physically plausible random chain with `n` links.
pub fn random_chain(rng: &mut impl Rng, n: usize) -> ChainParameters {
    ChainParameters {
        masses: (0..n).map(|_| rng.random_range(0.3..3.0)).collect(),
        inertias: (0..n).map(|_| rng.random_range(0.005..0.1)).collect(),
        com_offsets: (0..n)
            .map(|_| [rng.random_range(-0.2..0.3), rng.random_range(-0.05..0.05)])
            .collect(),
        link_lengths: (1..n).map(|_| rng.random_range(0.15..0.5)).collect(),
        damping: (1..n).map(|_| rng.random_range(0.0..0.3)).collect(),
        imu_offset: [rng.random_range(-0.1..0.1), rng.random_range(-0.05..0.05)],
        gravity: 9.81,
    }
}

pub fn random_vec(rng: &mut impl Rng, len: usize, bound: f64) -> Vec<f64> {
    (0..len).map(|_| rng.random_range(-bound..bound)).collect()
}

/// Entries on a 1/64 grid, so products with other dyadic data stay exact.
pub fn dyadic_matrix(rng: &mut impl Rng, rows: usize, cols: usize) -> DMatrix<f64> {
    DMatrix::from_fn(rows, cols, |_, _| rng.random_range(-64i32..=64) as f64 / 64.0)
}

pub fn dyadic_vector(rng: &mut impl Rng, dim: usize) -> DVector<f64> {
    DVector::from_fn(dim, |_, _| rng.random_range(-256i32..=256) as f64 / 64.0)
}

pub fn random_spd(rng: &mut impl Rng, dim: usize, floor: f64) -> DMatrix<f64> {
    let a = DMatrix::from_fn(dim, dim, |_, _| rng.random_range(-1.0..1.0));
    &a * a.transpose() + DMatrix::identity(dim, dim) * floor
}

pub fn min_eigenvalue(m: &DMatrix<f64>) -> f64 {
    m.clone().symmetric_eigenvalues().min()
}

/// Angular momentum about the chain CoM, from link kinematics alone.
pub fn angular_momentum(params: &ChainParameters, state: &FullState) -> f64 {
    let n = params.n_links();
    let kin = PostureKinematics::new(params, state.posture()).expect("posture");
    let rates = DVector::from_column_slice(state.posture_rates());
    let com_vel = &kin.com_jacobian * &rates;
    let mut sigma_dot = 0.0;
    let mut total = 0.0;
    for k in 0..n {
        sigma_dot += rates[k];
        let r: Vector2<f64> = kin.link_com[k] - kin.com;
        let v: Vector2<f64> = &kin.link_jacobians[k] * &rates - com_vel;
        total += params.inertias[k] * sigma_dot + params.masses[k] * (r.x * v.y - r.y * v.x);
    }
    total
}

/// Kinetic plus potential energy in world coordinates.
pub fn total_energy(params: &ChainParameters, state: &FullState) -> f64 {
    let n = params.n_links();
    let kin = PostureKinematics::new(params, state.posture()).expect("posture");
    let rates = DVector::from_column_slice(state.posture_rates());
    let [dd, hd] = state.velocity();
    let [_, h] = state.position();
    let mut sigma_dot = 0.0;
    let mut energy = 0.0;
    for k in 0..n {
        sigma_dot += rates[k];
        let v = &kin.link_jacobians[k] * &rates + Vector2::new(dd, hd);
        let y = h + kin.link_com[k].y;
        energy += 0.5 * params.masses[k] * v.norm_squared()
            + 0.5 * params.inertias[k] * sigma_dot * sigma_dot
            + params.masses[k] * params.gravity * y;
    }
    energy
}

/// Zero-mean Gaussian sample with covariance `cov`.
pub fn gaussian_draw(rng: &mut impl Rng, cov: &DMatrix<f64>) -> DVector<f64> {
    let l = cov.clone().cholesky().expect("positive definite").l();
    l * DVector::from_fn(cov.nrows(), |_, _| StandardNormal.sample(rng))
}
