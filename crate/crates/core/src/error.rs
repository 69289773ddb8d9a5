use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid chain parameters: {0}")]
    InvalidParameters(String),

    #[error("link index {index} out of range for a {n_links}-link chain")]
    LinkIndex { index: usize, n_links: usize },

    #[error("dimension mismatch for {what}: expected {expected}, found {found}")]
    Dimension {
        what: &'static str,
        expected: usize,
        found: usize,
    },

    #[error("mass matrix is not positive definite (non-physical parameters?)")]
    MassFactorization,

    #[error("innovation covariance is not positive definite")]
    InnovationSolve,

    #[error("covariance square root failed: matrix is indefinite beyond jitter limit")]
    SquareRoot,

    #[error("non-finite value in jacobian column {column}")]
    NonFiniteJacobian { column: usize },

    #[error("non-finite derivative passed to the integrator")]
    NonFiniteDerivative,

    #[error("simulation diverged at truth step {step}")]
    Diverged { step: usize },

    #[error("base torque slot {residual:e} N·m is not zero: desired accelerations violate momentum balance")]
    MomentumInconsistent { residual: f64 },

    #[error("sequences are misaligned: {0}")]
    Misaligned(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("estimator failed at step {step}: {source}")]
    EstimatorStep {
        step: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("trial {trial} (seed {seed}) failed: {source}")]
    Trial {
        trial: u64,
        seed: u64,
        #[source]
        source: Box<Error>,
    },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}: {source}")]
    Csv {
        path: PathBuf,
        #[source]
        source: csv::Error,
    },

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// Configuration mistakes are reported separately from numerical failures
    /// so the command line can map them onto distinct exit codes.
    pub fn is_config(&self) -> bool {
        match self {
            Error::Config(_) | Error::InvalidParameters(_) | Error::Json(_) => true,
            Error::Trial { source, .. } | Error::EstimatorStep { source, .. } => source.is_config(),
            _ => false,
        }
    }
}

pub(crate) fn check_len(what: &'static str, expected: usize, found: usize) -> Result<()> {
    if expected == found {
        Ok(())
    } else {
        Err(Error::Dimension { what, expected, found })
    }
}
