mod common;

use flying_chain::chain::{ChainParameters, Coordinates, FullState};
use flying_chain::sim::{simulate_truth, TrajectorySpec, WorldConfig};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use common::{angular_momentum, random_chain, total_energy};

fn world(duration: f64) -> WorldConfig {
    WorldConfig {
        duration,
        ..WorldConfig::default()
    }
}

fn frictionless_two_link() -> ChainParameters {
    let mut p = ChainParameters::two_link_default();
    p.damping = vec![0.0];
    p
}

fn spinning() -> FullState {
    FullState {
        q: vec![0.3, -0.5, 0.0, 0.0],
        qdot: vec![-6.0, 4.0, 1.0, 3.0],
    }
}

#[test]
fn com_follows_a_parabola() {
    let params = frictionless_two_link();
    let truth = simulate_truth(&params, &TrajectorySpec::passive(spinning()), &world(1.0)).unwrap();
    let c0 = truth[0].com;
    let g = params.gravity;
    for r in &truth {
        let t = r.t;
        let x = c0.position[0] + c0.velocity[0] * t;
        let y = c0.position[1] + c0.velocity[1] * t - 0.5 * g * t * t;
        assert!((r.com.position[0] - x).abs() < 1e-9, "t = {t}");
        assert!((r.com.position[1] - y).abs() < 1e-9, "t = {t}");
        assert!((r.com.velocity[1] - (c0.velocity[1] - g * t)).abs() < 1e-8);
    }
}

#[test]
fn angular_momentum_and_energy_are_conserved_without_damping() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for n in [1, 2, 4] {
        let mut params = random_chain(&mut rng, n);
        params.damping = vec![0.0; n - 1];
        let mut qdot: Vec<f64> = (0..n).map(|i| 3.0 - 2.0 * i as f64).collect();
        qdot.extend([0.5, 2.0]);
        let initial = FullState {
            q: vec![0.2; n + 2],
            qdot,
        };
        let truth = simulate_truth(&params, &TrajectorySpec::passive(initial.clone()), &world(0.5)).unwrap();
        let (l0, e0) = (angular_momentum(&params, &initial), total_energy(&params, &initial));
        for r in &truth {
            assert!(
                (angular_momentum(&params, &r.state) - l0).abs() <= 1e-8 * l0.abs(),
                "n = {n}"
            );
            assert!(
                (total_energy(&params, &r.state) - e0).abs() <= 1e-8 * e0.abs().max(1.0),
                "n = {n}"
            );
        }
    }
}

#[test]
fn damping_dissipates_energy_but_keeps_momentum() {
    let mut params = ChainParameters::two_link_default();
    params.damping = vec![0.5];
    let truth = simulate_truth(&params, &TrajectorySpec::passive(spinning()), &world(0.5)).unwrap();
    let l0 = angular_momentum(&params, &truth[0].state);
    let energies: Vec<f64> = truth.iter().map(|r| total_energy(&params, &r.state)).collect();
    assert!(energies.windows(2).all(|w| w[1] <= w[0] + 1e-9));
    assert!(energies.last().unwrap() < &(energies[0] - 1e-3));
    for r in &truth {
        assert!((angular_momentum(&params, &r.state) - l0).abs() <= 1e-8 * l0.abs());
    }
}

#[test]
fn full_and_reduced_models_agree_on_posture() {
    let params = frictionless_two_link();
    let state = spinning();
    let full = params
        .forward_dynamics(&state.q, &state.qdot, &[0.0], Coordinates::Full)
        .unwrap();
    let reduced = params
        .forward_dynamics(state.posture(), state.posture_rates(), &[0.0], Coordinates::Reduced)
        .unwrap();
    assert!((full.rows(0, 2) - reduced).amax() < 1e-11);
}

#[test]
fn truth_integration_converges_at_fourth_order() {
    let params = frictionless_two_link();
    let traj = TrajectorySpec::passive(spinning());
    let run = |dt: f64| {
        let w = WorldConfig {
            truth_step: dt,
            estimator_step: 0.04,
            duration: 0.2,
            ..WorldConfig::default()
        };
        simulate_truth(&params, &traj, &w).unwrap().last().unwrap().state.q[0]
    };
    let (coarse, fine, finest) = (run(1e-2), run(5e-3), run(2.5e-3));
    let ratio = (coarse - fine).abs() / (fine - finest).abs();
    assert!((ratio - 16.0).abs() < 3.0, "ratio {ratio}");
}
