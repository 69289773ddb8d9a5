//! Records a flight to CSV, reads it back and runs one estimator on it, the
//! same path the `simulate` / `estimate` subcommands take.
//!
//! ```bash
//! cargo run --release --example estimate_stream -- de-ukf
//! ```

use flying_chain::bench::{compute_rmse, synthesize, RunConfig};
use flying_chain::estimators::{component_names, estimate_run, write_estimates_csv, EstimatorKind, InitialCondition};
use flying_chain::sim::{read_stream_csv, write_stream_csv};

fn main() -> flying_chain::Result<()> {
    let kind: EstimatorKind = std::env::args().nth(1).as_deref().unwrap_or("bme").parse()?;
    let config = RunConfig::default();
    let dir = std::env::temp_dir().join("flying-chain-example");
    std::fs::create_dir_all(&dir).expect("temp dir");

    let scenario = synthesize(&config, &config.chain, 0)?;
    let stream = dir.join("stream.csv");
    write_stream_csv(&stream, &scenario.truth, &scenario.sensors)?;

    let (truth, sensors) = read_stream_csv(&stream, &config.chain)?;
    let torques: Vec<Vec<f64>> = truth.iter().map(|r| r.torques.clone()).collect();
    let run = estimate_run(
        kind,
        &sensors,
        &torques,
        &config.chain,
        &config.estimator_config()?,
        &InitialCondition::from(&truth[0]),
    )?;
    let out = dir.join(format!("estimates_{kind}.csv"));
    write_estimates_csv(&out, std::slice::from_ref(&run))?;

    let rmse = compute_rmse(&run.estimates, &truth)?;
    for ((name, unit), value) in component_names(config.chain.n_links()).into_iter().zip(rmse) {
        println!("{name:>12} {value:.3e} {unit}");
    }
    println!(
        "{} steps, {:.1} us/step, estimates in {}",
        run.estimates.len() - 1,
        run.mean_step_time_us(),
        out.display()
    );
    Ok(())
}
