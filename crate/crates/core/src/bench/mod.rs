//! Experiment configuration, scenarios and reports.
//!
//! A [`RunConfig`] describes the chain, its parameter uncertainty, the
//! flight, the simulated world, the estimator tuning and what to run. The
//! scenarios reproduce the known-parameter comparison, the Monte-Carlo
//! robustness study and the per-step timing table.

mod metrics;
mod scenario;

pub use metrics::{compute_rmse, emit_report, MetricsReport, ReportFormat, RmseAccumulator};
pub use scenario::{run_known_params, run_monte_carlo, run_single, synthesize, time_estimators, Scenario};

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::chain::ChainParameters;
use crate::error::{Error, Result};
use crate::estimators::{EstimatorConfig, EstimatorKind, EstimatorTuning};
use crate::sim::{ParameterUncertainty, TrajectorySpec, WorldConfig};

/// What to run and where to write it.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunSection {
    pub kinds: Vec<EstimatorKind>,
    /// Monte-Carlo trial count.
    pub trials: usize,
    /// Timing repetitions; the reported value is the median over repetitions.
    pub timing_repeats: usize,
    pub output_dir: PathBuf,
}

impl Default for RunSection {
    fn default() -> Self {
        Self {
            kinds: EstimatorKind::ALL.to_vec(),
            trials: 100,
            timing_repeats: 5,
            output_dir: PathBuf::from("out"),
        }
    }
}

/// A complete experiment description, loadable from JSON. Every section is
/// optional and defaults to the two-link back-somersault setup.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub chain: ChainParameters,
    pub uncertainty: ParameterUncertainty,
    pub trajectory: TrajectorySpec,
    pub world: WorldConfig,
    pub estimator: EstimatorTuning,
    pub run: RunSection,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            chain: ChainParameters::two_link_default(),
            uncertainty: ParameterUncertainty::two_link_default(),
            trajectory: TrajectorySpec::back_somersault(),
            world: WorldConfig::default(),
            estimator: EstimatorTuning::default(),
            run: RunSection::default(),
        }
    }
}

impl RunConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let config: RunConfig = serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        config.validate()?;
        Ok(config)
    }

    /// An unreadable file is reported as a configuration error.
    pub fn from_path(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        Self::from_json(&text).map_err(|e| match e {
            Error::Config(msg) => Error::Config(format!("{}: {msg}", path.display())),
            other => other,
        })
    }

    pub fn validate(&self) -> Result<()> {
        self.chain.validate()?;
        self.trajectory.validate(self.chain.n_links())?;
        self.world.validate()?;
        self.estimator.validate()?;
        self.uncertainty.validate_against(&self.chain)?;
        if self.run.kinds.is_empty() {
            return Err(Error::Config("no estimator kinds selected".into()));
        }
        if self.run.trials == 0 {
            return Err(Error::Config("trial count must be at least 1".into()));
        }
        if self.run.timing_repeats == 0 {
            return Err(Error::Config("timing repeats must be at least 1".into()));
        }
        Ok(())
    }

    pub fn estimator_config(&self) -> Result<EstimatorConfig> {
        EstimatorConfig::new(&self.world, self.estimator.clone())
    }

    /// SHA-256 of the canonical JSON form of everything that affects
    /// results. The output directory is left out so that the same
    /// experiment written to two places reports the same digest.
    pub fn digest(&self) -> String {
        let mut value = serde_json::to_value(self).expect("config serializes");
        if let Some(run) = value.get_mut("run").and_then(|r| r.as_object_mut()) {
            run.remove("output_dir");
        }
        let bytes = serde_json::to_vec(&value).expect("value serializes");
        hex::encode(Sha256::digest(bytes))
    }
}
