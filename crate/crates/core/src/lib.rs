//! State estimation for planar free-flying open kinematic chains.
//!
//! The crate bundles everything needed to compare estimator architectures on
//! a flying multibody system:
//!
//! * [`chain`]: kinematics and Lagrangian dynamics in full and reduced
//!   (centre-of-mass) coordinates,
//! * [`sim`]: ground-truth integration, IMU/encoder synthesis and parameter
//!   perturbation,
//! * [`filter`]: Kalman, extended and unscented filter primitives,
//! * [`estimators`]: full-dynamics EKF/UKF, the decoupled estimator and the
//!   ballistic multibody estimator,
//! * [`bench`]: RMSE/timing scenarios and report emission.

pub mod bench;
pub mod chain;
pub mod error;
pub mod estimators;
pub mod filter;
pub mod sim;

pub use error::{Error, Result};
