//! Robustness to parameter uncertainty: each trial draws true parameters from
//! the uncertainty table while the estimators keep the nominal ones.
//!
//! ```bash
//! cargo run --release --example monte_carlo -- 20 4   # trials, workers
//! ```

use flying_chain::bench::{run_monte_carlo, RunConfig};
use flying_chain::estimators::EstimatorKind;

fn main() -> flying_chain::Result<()> {
    let mut args = std::env::args().skip(1);
    let trials = args.next().and_then(|s| s.parse().ok()).unwrap_or(10);
    let workers = args.next().and_then(|s| s.parse().ok()).unwrap_or(1);

    let mut config = RunConfig::default();
    config.run.trials = trials;
    let report = run_monte_carlo(&config, workers)?;
    print!("{}", report.to_csv());

    for name in ["d", "h"] {
        let bme = report.get(EstimatorKind::Bme, name).unwrap_or(f64::NAN);
        let ekf = report.get(EstimatorKind::FullEkf, name).unwrap_or(f64::NAN);
        println!("{name}: full EKF / BME = {:.1}", ekf / bme);
    }
    Ok(())
}
