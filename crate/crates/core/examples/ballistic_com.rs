//! The centre-of-mass filter of the ballistic estimator. Between touchdowns
//! the CoM follows a parabola, which a constant-jerk model predicts exactly.

use flying_chain::bench::RunConfig;
use flying_chain::chain::ComState;
use flying_chain::estimators::com_predict;
use flying_chain::filter::GaussianBelief;

fn main() -> flying_chain::Result<()> {
    let config = RunConfig::default();
    let est = config.estimator_config()?;
    let g = config.chain.gravity;

    let start = ComState {
        position: [0.0, 1.0],
        velocity: [0.5, 3.0],
        acceleration: [0.0, -g],
    };
    let mut belief = GaussianBelief::isotropic(start.to_vector(), 0.0);
    let steps = 1000;
    for _ in 0..steps {
        belief = com_predict(&belief, &config.chain, &est)?;
    }
    let t = steps as f64 * est.dt;
    let predicted = ComState::from_vector(&belief.mean);
    let exact = [0.5 * t, 1.0 + 3.0 * t - 0.5 * g * t * t];
    println!("after {t} s: predicted {:?}, parabola {:?}", predicted.position, exact);
    println!(
        "position std after pure prediction: {:.3e} m",
        belief.cov[(0, 0)].sqrt()
    );
    Ok(())
}
