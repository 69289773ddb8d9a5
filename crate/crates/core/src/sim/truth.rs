use std::f64::consts::PI;

use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use super::{rk4_step, WorldConfig};
use crate::chain::{ChainParameters, ComState, Coordinates, FullState, PostureState};
use crate::error::{check_len, Error, Result};

/// Sinusoidal joint motion `α_i(0) + A (sin(ω t + φ) - sin φ)`, `ω = 2π / period`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct JointMotion {
    /// rad
    pub amplitude: f64,
    /// s
    pub period: f64,
    /// rad
    pub phase: f64,
}

impl JointMotion {
    fn omega(&self) -> f64 {
        2.0 * PI / self.period
    }

    /// Reference angle, rate and acceleration at time `t`, starting from `start`.
    pub fn reference(&self, start: f64, t: f64) -> [f64; 3] {
        let w = self.omega();
        let (s, c) = (w * t + self.phase).sin_cos();
        [
            start + self.amplitude * (s - self.phase.sin()),
            self.amplitude * w * c,
            -self.amplitude * w * w * s,
        ]
    }

    /// Joint rate at `t = 0`.
    pub fn initial_rate(&self) -> f64 {
        self.amplitude * self.omega() * self.phase.cos()
    }
}

/// Computed-torque tracking gains on the joint angles.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrackingGains {
    pub kp: f64,
    pub kd: f64,
}

impl Default for TrackingGains {
    fn default() -> Self {
        Self { kp: 400.0, kd: 40.0 }
    }
}

/// Initial state and prescribed joint motion of a flight.
///
/// An empty `joints` list makes the flight passive (all joint torques zero).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrajectorySpec {
    #[serde(default = "default_initial")]
    pub initial: FullState,
    #[serde(default)]
    pub joints: Vec<JointMotion>,
    #[serde(default)]
    pub gains: TrackingGains,
}

fn default_initial() -> FullState {
    TrajectorySpec::back_somersault().initial
}

impl Default for TrajectorySpec {
    fn default() -> Self {
        Self::back_somersault()
    }
}

impl TrajectorySpec {
    /// Default two-link flight: one backward turn of the base while the
    /// joint folds and unfolds twice, `α_1 = 0.8 (1 - cos 4πt)`.
    ///
    /// Starting the joint at rest keeps all of the initial angular momentum
    /// in the base spin.
    pub fn back_somersault() -> Self {
        let joint = JointMotion {
            amplitude: 0.8,
            period: 0.5,
            phase: -PI / 2.0,
        };
        Self {
            initial: FullState {
                q: vec![0.0, 0.0, 0.0, 0.0],
                qdot: vec![-2.0 * PI, joint.initial_rate(), 0.5, 3.0],
            },
            joints: vec![joint],
            gains: TrackingGains::default(),
        }
    }

    /// The same initial state with no joint actuation.
    pub fn passive(initial: FullState) -> Self {
        Self {
            initial,
            joints: Vec::new(),
            gains: TrackingGains::default(),
        }
    }

    pub fn validate(&self, n_links: usize) -> Result<()> {
        check_len("initial q", n_links + 2, self.initial.q.len())?;
        check_len("initial qdot", n_links + 2, self.initial.qdot.len())?;
        if !self.initial.is_finite() {
            return Err(Error::Config("initial state must be finite".into()));
        }
        if !self.joints.is_empty() && self.joints.len() != n_links - 1 {
            return Err(Error::Config(format!(
                "{} joint motions given for {} joints",
                self.joints.len(),
                n_links - 1
            )));
        }
        if self.joints.iter().any(|j| j.period.is_nan() || j.period <= 0.0) {
            return Err(Error::Config("joint motion period must be positive".into()));
        }
        Ok(())
    }

    /// Joint torques at time `t` for the current full state.
    ///
    /// The desired joint accelerations are completed with the base
    /// acceleration that keeps the base torque at zero (no external moment
    /// in flight), then mapped to torques through the reduced inverse
    /// dynamics.
    pub fn torques(&self, params: &ChainParameters, t: f64, q: &[f64], qdot: &[f64]) -> Result<Vec<f64>> {
        let n = params.n_links();
        if self.joints.is_empty() {
            return Ok(vec![0.0; n - 1]);
        }
        let qbar = &q[..n];
        let rates = &qdot[..n];
        let mut accel = vec![0.0; n];
        for (j, motion) in self.joints.iter().enumerate() {
            let [pos, vel, acc] = motion.reference(self.initial.q[j + 1], t);
            accel[j + 1] = acc + self.gains.kd * (vel - rates[j + 1]) + self.gains.kp * (pos - qbar[j + 1]);
        }

        let terms = params.dynamics_terms(qbar, rates, Coordinates::Reduced)?;
        let bias = terms.coriolis.row(0) * DVector::from_column_slice(rates);
        let coupled: f64 = (1..n).map(|j| terms.mass[(0, j)] * accel[j]).sum();
        accel[0] = -(coupled + bias[0] + terms.gravity[0]) / terms.mass[(0, 0)];

        let generalized = params.inverse_dynamics_reduced(qbar, rates, &accel)?;
        let residual = generalized[0];
        if residual.abs() > 1e-6 * (1.0 + generalized.amax()) {
            return Err(Error::MomentumInconsistent { residual });
        }
        Ok(generalized.iter().skip(1).copied().collect())
    }
}

/// One ground-truth sample at the estimator rate.
#[derive(Clone, Debug, PartialEq)]
pub struct TruthRecord {
    pub t: f64,
    pub state: FullState,
    pub qddot: Vec<f64>,
    pub torques: Vec<f64>,
    pub com: ComState,
}

impl TruthRecord {
    pub fn new(params: &ChainParameters, t: f64, state: FullState, qddot: Vec<f64>, torques: Vec<f64>) -> Result<Self> {
        let com = ComState::from_full(params, &state, &qddot)?;
        Ok(Self {
            t,
            state,
            qddot,
            torques,
            com,
        })
    }

    /// Posture angles, rates and accelerations of this instant.
    pub fn posture(&self) -> PostureState {
        let n = self.state.n_links();
        PostureState {
            qbar: self.state.posture().to_vec(),
            qbardot: self.state.posture_rates().to_vec(),
            qbarddot: self.qddot[..n].to_vec(),
        }
    }
}

/// Integrates the full dynamics with RK4 at `world.truth_step` and records
/// the state every estimator period, including `t = 0`.
///
/// Torques are evaluated inside the derivative, so the closed loop is a
/// smooth ODE and the integrator keeps its fourth-order accuracy.
pub fn simulate_truth(
    params: &ChainParameters,
    trajectory: &TrajectorySpec,
    world: &WorldConfig,
) -> Result<Vec<TruthRecord>> {
    params.validate()?;
    trajectory.validate(params.n_links())?;
    let stride = world.record_stride()?;
    let records = world.estimator_steps()?;
    let dt = world.truth_step;
    let dim = params.n_links() + 2;

    let derivative = |t: f64, x: &DVector<f64>| -> Result<DVector<f64>> {
        let (q, qdot) = (&x.as_slice()[..dim], &x.as_slice()[dim..]);
        let tau = trajectory.torques(params, t, q, qdot)?;
        let qddot = params.forward_dynamics(q, qdot, &tau, Coordinates::Full)?;
        let mut out = DVector::zeros(2 * dim);
        out.rows_mut(0, dim).copy_from_slice(qdot);
        out.rows_mut(dim, dim).copy_from(&qddot);
        Ok(out)
    };
    let record = |t: f64, x: &DVector<f64>| -> Result<TruthRecord> {
        let state = FullState::from_vector(x);
        let tau = trajectory.torques(params, t, &state.q, &state.qdot)?;
        let qddot = params.forward_dynamics(&state.q, &state.qdot, &tau, Coordinates::Full)?;
        TruthRecord::new(params, t, state, qddot.iter().copied().collect(), tau)
    };

    let mut x = trajectory.initial.to_vector();
    let mut out = Vec::with_capacity(records + 1);
    out.push(record(0.0, &x)?);
    for step in 0..records * stride {
        let t = step as f64 * dt;
        x = rk4_step(derivative, t, &x, dt).map_err(|e| match e {
            Error::NonFiniteDerivative => Error::Diverged { step },
            other => other,
        })?;
        if x.iter().any(|v| !v.is_finite()) {
            return Err(Error::Diverged { step });
        }
        if (step + 1) % stride == 0 {
            let k = (step + 1) / stride;
            out.push(record(k as f64 * world.estimator_step, &x)?);
        }
    }
    Ok(out)
}
