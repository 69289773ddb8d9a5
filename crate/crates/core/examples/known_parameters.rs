//! All five estimators on one noisy flight with the true parameters known.

use flying_chain::bench::{run_known_params, RunConfig};

fn main() -> flying_chain::Result<()> {
    let report = run_known_params(&RunConfig::default())?;
    print!("{}", report.to_csv());
    Ok(())
}
