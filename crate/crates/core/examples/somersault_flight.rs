//! Simulates the default two-link back somersault and prints the flight.
//!
//! ```bash
//! cargo run --release --example somersault_flight [stream.csv]
//! ```

use std::f64::consts::PI;

use flying_chain::bench::{synthesize, RunConfig};
use flying_chain::sim::write_stream_csv;

fn main() -> flying_chain::Result<()> {
    let config = RunConfig::default();
    let scenario = synthesize(&config, &config.chain, 0)?;

    println!(
        "{:>6} {:>9} {:>9} {:>9} {:>9} {:>8}",
        "t", "alpha_0", "alpha_1", "com_x", "com_y", "tau_1"
    );
    for record in scenario.truth.iter().step_by(100) {
        println!(
            "{:6.3} {:9.4} {:9.4} {:9.4} {:9.4} {:8.3}",
            record.t,
            record.state.q[0],
            record.state.q[1],
            record.com.position[0],
            record.com.position[1],
            record.torques[0],
        );
    }
    let last = scenario.truth.last().expect("non-empty flight");
    println!("base turned {:.2} revolutions", last.state.q[0] / (-2.0 * PI));

    if let Some(path) = std::env::args().nth(1) {
        write_stream_csv(path.as_ref(), &scenario.truth, &scenario.sensors)?;
        println!("wrote {path}");
    }
    Ok(())
}
