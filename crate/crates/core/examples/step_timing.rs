//! Median per-step wall time of each estimator. Run with `--release`.

use flying_chain::bench::{time_estimators, RunConfig};

fn main() -> flying_chain::Result<()> {
    let report = time_estimators(&RunConfig::default())?;
    for &kind in &report.kinds {
        println!(
            "{:>7} {:8.2} us",
            kind.to_string(),
            report.step_time(kind).unwrap_or(f64::NAN)
        );
    }
    Ok(())
}
