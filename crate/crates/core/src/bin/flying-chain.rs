use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use flying_chain::bench::{
    compute_rmse, emit_report, run_known_params, run_monte_carlo, synthesize, time_estimators, ReportFormat, RunConfig,
};
use flying_chain::estimators::{component_names, estimate_run, write_estimates_csv, EstimatorKind, InitialCondition};
use flying_chain::sim::{read_stream_csv, write_stream_csv};
use flying_chain::{Error, Result};

#[derive(Parser)]
#[command(
    name = "flying-chain",
    version,
    about = "State estimation workbench for planar free-flying chains"
)]
struct Cli {
    #[command(flatten)]
    common: Common,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// JSON experiment config; missing sections use the two-link defaults.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Master seed (overrides world.seed).
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output directory (overrides run.output_dir).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Monte-Carlo worker threads.
    #[arg(long, global = true, default_value_t = 1)]
    workers: usize,
    /// Report format.
    #[arg(long, global = true, default_value = "csv")]
    format: ReportFormat,
}

#[derive(Subcommand)]
enum Command {
    /// Simulate the flight and write truth plus sensor frames to stream.csv.
    Simulate,
    /// Run one estimator on a recorded stream.
    Estimate {
        #[arg(long)]
        kind: EstimatorKind,
        /// Stream CSV to read (defaults to <out>/stream.csv).
        #[arg(long)]
        stream: Option<PathBuf>,
    },
    /// Benchmark reports over all configured estimators.
    #[command(subcommand)]
    Bench(Bench),
}

#[derive(Subcommand)]
enum Bench {
    /// Single flight with known parameters.
    Known,
    /// Monte Carlo over perturbed true parameters.
    Mc {
        /// Trial count (overrides run.trials).
        #[arg(long)]
        trials: Option<usize>,
    },
    /// Per-step wall time of each estimator.
    Timing,
}

fn load_config(common: &Common) -> Result<RunConfig> {
    let mut config = match &common.config {
        Some(path) => RunConfig::from_path(path)?,
        None => RunConfig::default(),
    };
    if let Some(seed) = common.seed {
        config.world.seed = seed;
    }
    if let Some(out) = &common.out {
        config.run.output_dir = out.clone();
    }
    if common.workers == 0 {
        return Err(Error::Config("--workers must be at least 1".into()));
    }
    Ok(config)
}

fn create_dir(dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|source| Error::Io {
        path: dir.to_path_buf(),
        source,
    })
}

fn run(cli: Cli) -> Result<()> {
    let mut config = load_config(&cli.common)?;
    let out = config.run.output_dir.clone();
    match cli.command {
        Command::Simulate => {
            config.validate()?;
            let scenario = synthesize(&config, &config.chain, 0)?;
            create_dir(&out)?;
            let path = out.join("stream.csv");
            write_stream_csv(&path, &scenario.truth, &scenario.sensors)?;
            eprintln!("wrote {} ({} records)", path.display(), scenario.truth.len());
        }
        Command::Estimate { kind, stream } => {
            config.validate()?;
            let stream = stream.unwrap_or_else(|| out.join("stream.csv"));
            let (truth, sensors) = read_stream_csv(&stream, &config.chain)?;
            let first = truth
                .first()
                .ok_or_else(|| Error::Config(format!("{}: empty stream", stream.display())))?;
            let torques: Vec<Vec<f64>> = truth.iter().map(|r| r.torques.clone()).collect();
            let est_config = config.estimator_config()?;
            let run = estimate_run(
                kind,
                &sensors,
                &torques,
                &config.chain,
                &est_config,
                &InitialCondition::from(first),
            )?;
            create_dir(&out)?;
            let path = out.join(format!("estimates_{kind}.csv"));
            write_estimates_csv(&path, std::slice::from_ref(&run))?;
            let rmse = compute_rmse(&run.estimates, &truth)?;
            for ((name, unit), value) in component_names(config.chain.n_links()).iter().zip(rmse) {
                eprintln!("{name:>12} [{unit}] {value:.3e}");
            }
            eprintln!("wrote {}", path.display());
        }
        Command::Bench(bench) => {
            let (report, stem) = match bench {
                Bench::Known => (run_known_params(&config)?, "known"),
                Bench::Mc { trials } => {
                    if let Some(trials) = trials {
                        config.run.trials = trials;
                    }
                    (run_monte_carlo(&config, cli.common.workers)?, "mc")
                }
                Bench::Timing => (time_estimators(&config)?, "timing"),
            };
            create_dir(&out)?;
            let path = out.join(format!("{stem}.{}", cli.common.format.extension()));
            emit_report(&report, cli.common.format, &path)?;
            eprintln!("wrote {}", path.display());
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            if e.is_config() {
                ExitCode::from(1)
            } else {
                ExitCode::from(2)
            }
        }
    }
}
