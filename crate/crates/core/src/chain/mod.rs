//! Planar free-flying open kinematic chain.
//!
//! A chain of `n` links joined in series by `n - 1` revolute joints with
//! parallel axes. The configuration is described either in *full*
//! coordinates `q = (α_0, …, α_{n-1}, d, h)`, where `(d, h)` locates the
//! origin of the first link frame in the world, or in *reduced* coordinates
//! `q̄ = (α_0, …, α_{n-1})`, which describe the chain relative to a
//! world-aligned frame attached to its centre of mass.
//!
//! Angles are always kept unwrapped.

mod dynamics;
mod kinematics;

pub use dynamics::{angular_jacobian, DynamicsTerms};
pub use kinematics::{rotation, PostureKinematics};

use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use crate::error::{check_len, Error, Result};

/// Which generalized coordinate set an operation works in.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Coordinates {
    /// `(q̄, d, h)`, dimension `n + 2`.
    Full,
    /// `q̄` relative to the centre-of-mass frame, dimension `n`.
    Reduced,
}

impl Coordinates {
    pub fn dim(self, n_links: usize) -> usize {
        match self {
            Coordinates::Full => n_links + 2,
            Coordinates::Reduced => n_links,
        }
    }
}

/// Geometry, inertia, damping and sensor placement of an `n`-link chain.
///
/// Per-link vectors are indexed from link 1. `link_lengths[k]` is `l_{k+2}`,
/// the distance between the origins of link `k + 1` and link `k + 2`;
/// `damping[k]` is the viscous coefficient of joint `k + 1`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChainParameters {
    /// kg
    pub masses: Vec<f64>,
    /// kg·m², about the link frame z-axis
    pub inertias: Vec<f64>,
    /// `(r_i, a_i)`, m, link CoM offset along the link frame x- and y-axes
    pub com_offsets: Vec<[f64; 2]>,
    /// m, `l_2 … l_n`
    pub link_lengths: Vec<f64>,
    /// N·m·s/rad, `β_1 … β_{n-1}`
    pub damping: Vec<f64>,
    /// m, IMU origin in the first link frame
    pub imu_offset: [f64; 2],
    /// m/s², magnitude
    pub gravity: f64,
}

impl ChainParameters {
    /// The two-link acrobat used by the default scenario.
    ///
    /// Masses, inertias, CoM offsets and joint damping are the nominal values
    /// of the uncertainty table in [`crate::sim::ParameterUncertainty::two_link_default`].
    /// The inter-joint length and the IMU offset are not part of that table
    /// and are set to plausible values.
    pub fn two_link_default() -> Self {
        Self {
            masses: vec![1.5790, 1.4370],
            inertias: vec![0.0375, 0.0237],
            com_offsets: vec![[0.1443, -0.0055], [0.1268, 0.0001]],
            link_lengths: vec![0.35],
            damping: vec![0.20],
            imu_offset: [0.05, 0.0],
            gravity: 9.81,
        }
    }

    pub fn n_links(&self) -> usize {
        self.masses.len()
    }

    pub fn total_mass(&self) -> f64 {
        self.masses.iter().sum()
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.n_links();
        let bad = |msg: String| Err(Error::InvalidParameters(msg));
        if n == 0 {
            return bad("chain needs at least one link".into());
        }
        if self.inertias.len() != n || self.com_offsets.len() != n {
            return bad(format!(
                "{n} masses but {} inertias and {} CoM offsets",
                self.inertias.len(),
                self.com_offsets.len()
            ));
        }
        if self.link_lengths.len() != n - 1 || self.damping.len() != n - 1 {
            return bad(format!(
                "{n} links need {} link lengths and damping coefficients, got {} and {}",
                n - 1,
                self.link_lengths.len(),
                self.damping.len()
            ));
        }
        let all_finite = self
            .masses
            .iter()
            .chain(&self.inertias)
            .chain(self.com_offsets.iter().flatten())
            .chain(&self.link_lengths)
            .chain(&self.damping)
            .chain(&self.imu_offset)
            .all(|v| v.is_finite());
        if !all_finite || !self.gravity.is_finite() {
            return bad("non-finite parameter".into());
        }
        if let Some(i) = self.masses.iter().position(|&m| m <= 0.0) {
            return bad(format!("mass of link {} must be positive", i + 1));
        }
        if let Some(i) = self.inertias.iter().position(|&v| v <= 0.0) {
            return bad(format!("inertia of link {} must be positive", i + 1));
        }
        if let Some(i) = self.link_lengths.iter().position(|&v| v <= 0.0) {
            return bad(format!("length l_{} must be positive", i + 2));
        }
        if let Some(i) = self.damping.iter().position(|&v| v < 0.0) {
            return bad(format!("damping of joint {} must be non-negative", i + 1));
        }
        if self.gravity <= 0.0 {
            return bad("gravity magnitude must be positive".into());
        }
        Ok(())
    }

    pub(crate) fn check_coords(&self, q: &[f64], mode: Coordinates) -> Result<()> {
        check_len("generalized coordinates", mode.dim(self.n_links()), q.len())
    }

    /// Generalized input `(0, τ_1, …, τ_{n-1}[, 0, 0])`. The base orientation
    /// has no actuator and the translation coordinates carry no external force.
    pub fn generalized_input(&self, torques: &[f64], mode: Coordinates) -> Result<DVector<f64>> {
        let n = self.n_links();
        check_len("joint torques", n - 1, torques.len())?;
        let mut u = DVector::zeros(mode.dim(n));
        u.rows_mut(1, n - 1).copy_from_slice(torques);
        Ok(u)
    }
}

/// Full generalized state `(q, q̇)` with `q = (α_0, …, α_{n-1}, d, h)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FullState {
    pub q: Vec<f64>,
    pub qdot: Vec<f64>,
}

impl FullState {
    pub fn n_links(&self) -> usize {
        self.q.len().saturating_sub(2)
    }

    pub fn posture(&self) -> &[f64] {
        &self.q[..self.n_links()]
    }

    pub fn posture_rates(&self) -> &[f64] {
        &self.qdot[..self.n_links()]
    }

    /// `(d, h)`
    pub fn position(&self) -> [f64; 2] {
        let n = self.n_links();
        [self.q[n], self.q[n + 1]]
    }

    /// `(ḋ, ḣ)`
    pub fn velocity(&self) -> [f64; 2] {
        let n = self.n_links();
        [self.qdot[n], self.qdot[n + 1]]
    }

    pub fn to_vector(&self) -> DVector<f64> {
        DVector::from_iterator(self.q.len() * 2, self.q.iter().chain(&self.qdot).copied())
    }

    pub fn from_vector(x: &DVector<f64>) -> Self {
        let half = x.len() / 2;
        Self {
            q: x.rows(0, half).iter().copied().collect(),
            qdot: x.rows(half, half).iter().copied().collect(),
        }
    }

    pub fn is_finite(&self) -> bool {
        self.q.iter().chain(&self.qdot).all(|v| v.is_finite())
    }
}

/// Kinematic state of the chain centre of mass in the world frame.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct ComState {
    pub position: [f64; 2],
    pub velocity: [f64; 2],
    pub acceleration: [f64; 2],
}

impl ComState {
    /// Interleaved per-axis layout `(p_x, ṗ_x, p̈_x, p_y, ṗ_y, p̈_y)`.
    pub fn to_vector(&self) -> DVector<f64> {
        DVector::from_row_slice(&[
            self.position[0],
            self.velocity[0],
            self.acceleration[0],
            self.position[1],
            self.velocity[1],
            self.acceleration[1],
        ])
    }

    pub fn from_vector(x: &DVector<f64>) -> Self {
        Self {
            position: [x[0], x[3]],
            velocity: [x[1], x[4]],
            acceleration: [x[2], x[5]],
        }
    }

    /// CoM state implied by a full state and its accelerations.
    pub fn from_full(params: &ChainParameters, state: &FullState, qddot: &[f64]) -> Result<Self> {
        let n = params.n_links();
        check_len("generalized accelerations", n + 2, qddot.len())?;
        let qbar = state.posture();
        let com = params.chain_com(qbar)?;
        let (vel, acc) = params.chain_com_derivatives(qbar, state.posture_rates(), &qddot[..n])?;
        let [d, h] = state.position();
        let [dd, hd] = state.velocity();
        Ok(Self {
            position: [d + com.x, h + com.y],
            velocity: [dd + vel.x, hd + vel.y],
            acceleration: [qddot[n] + acc.x, qddot[n + 1] + acc.y],
        })
    }
}

/// Posture angles, rates and (optionally) accelerations.
#[derive(Clone, Debug, PartialEq)]
pub struct PostureState {
    pub qbar: Vec<f64>,
    pub qbardot: Vec<f64>,
    pub qbarddot: Vec<f64>,
}

impl PostureState {
    pub fn at_rest(qbar: Vec<f64>) -> Self {
        let n = qbar.len();
        Self {
            qbar,
            qbardot: vec![0.0; n],
            qbarddot: vec![0.0; n],
        }
    }
}
