use nalgebra::{Matrix2, Matrix2xX, Vector2};

use super::{ChainParameters, PostureState};
use crate::error::{check_len, Error, Result};

/// Planar rotation by `theta` radians.
pub fn rotation(theta: f64) -> Matrix2<f64> {
    let (s, c) = theta.sin_cos();
    Matrix2::new(c, -s, s, c)
}

/// Link CoM positions and their posture Jacobians, all expressed in the
/// world-aligned frame anchored at the first link frame origin.
#[derive(Clone, Debug)]
pub struct PostureKinematics {
    /// `σ_i`, absolute orientation of each link frame.
    pub link_angles: Vec<f64>,
    pub link_com: Vec<Vector2<f64>>,
    /// `∂p_1^{c_i} / ∂q̄`, one `2 × n` block per link.
    pub link_jacobians: Vec<Matrix2xX<f64>>,
    /// Point about which `q̄_k` turns the rest of the chain.
    pub pivots: Vec<Vector2<f64>>,
    /// `m_i / Σ m`
    pub mass_fractions: Vec<f64>,
    pub com: Vector2<f64>,
    pub com_jacobian: Matrix2xX<f64>,
}

impl PostureKinematics {
    pub fn new(params: &ChainParameters, qbar: &[f64]) -> Result<Self> {
        let n = params.n_links();
        check_len("posture", n, qbar.len())?;

        let mut link_angles = Vec::with_capacity(n);
        let mut link_com = Vec::with_capacity(n);
        let mut link_jacobians = Vec::with_capacity(n);
        let mut pivots = Vec::with_capacity(n);

        let mut sigma = 0.0;
        let mut origin = Vector2::zeros();
        let mut origin_jac = Matrix2xX::zeros(n);
        for (k, angle) in qbar.iter().enumerate().take(n) {
            sigma += angle;
            link_angles.push(sigma);
            let (s, c) = sigma.sin_cos();
            pivots.push(origin);
            if k > 0 {
                let l = params.link_lengths[k - 1];
                origin += Vector2::new(l * c, l * s);
                for col in 0..=k {
                    origin_jac[(0, col)] -= l * s;
                    origin_jac[(1, col)] += l * c;
                }
            }
            let [r, a] = params.com_offsets[k];
            let offset = Vector2::new(c * r - s * a, s * r + c * a);
            let mut jac = origin_jac.clone();
            for col in 0..=k {
                jac[(0, col)] -= offset.y;
                jac[(1, col)] += offset.x;
            }
            link_com.push(origin + offset);
            link_jacobians.push(jac);
        }

        let total = params.total_mass();
        let mass_fractions: Vec<f64> = params.masses.iter().map(|m| m / total).collect();
        let mut com = Vector2::zeros();
        let mut com_jacobian = Matrix2xX::zeros(n);
        for ((w, p), j) in mass_fractions.iter().zip(&link_com).zip(&link_jacobians) {
            com += p * *w;
            com_jacobian += j * *w;
        }

        Ok(Self {
            link_angles,
            link_com,
            link_jacobians,
            pivots,
            mass_fractions,
            com,
            com_jacobian,
        })
    }

    /// `∂²p_1^{c_k}/∂q̄_a∂q̄_b` (0-based indices).
    ///
    /// Each CoM is a sum of rotated constant vectors, so the second
    /// derivative is minus the part of `p_1^{c_k}` beyond the pivot of
    /// `q̄_max(a,b)`.
    pub fn link_com_hessian(&self, k: usize, a: usize, b: usize) -> Vector2<f64> {
        let m = a.max(b);
        if m > k {
            Vector2::zeros()
        } else {
            self.pivots[m] - self.link_com[k]
        }
    }

    /// `∂²p_1^c/∂q̄_a∂q̄_b`.
    pub fn com_hessian(&self, a: usize, b: usize) -> Vector2<f64> {
        self.mass_fractions
            .iter()
            .enumerate()
            .map(|(k, w)| self.link_com_hessian(k, a, b) * *w)
            .sum()
    }
}

impl ChainParameters {
    /// Position of the CoM of link `i` (1-based) relative to the first link frame origin.
    pub fn link_com_position(&self, qbar: &[f64], i: usize) -> Result<Vector2<f64>> {
        self.check_link(i)?;
        Ok(PostureKinematics::new(self, qbar)?.link_com[i - 1])
    }

    /// Mass-weighted mean of the link CoM positions, `p_1^c`.
    pub fn chain_com(&self, qbar: &[f64]) -> Result<Vector2<f64>> {
        Ok(PostureKinematics::new(self, qbar)?.com)
    }

    /// Velocity and acceleration of `p_1^c` induced by posture motion.
    ///
    /// The `J̇_c q̇̄` term is a central difference of the CoM Jacobian along the
    /// rate direction.
    pub fn chain_com_derivatives(
        &self,
        qbar: &[f64],
        qbardot: &[f64],
        qbarddot: &[f64],
    ) -> Result<(Vector2<f64>, Vector2<f64>)> {
        let n = self.n_links();
        check_len("posture rates", n, qbardot.len())?;
        check_len("posture accelerations", n, qbarddot.len())?;

        let kin = PostureKinematics::new(self, qbar)?;
        let rates = nalgebra::DVectorView::from_slice(qbardot, n);
        let accels = nalgebra::DVectorView::from_slice(qbarddot, n);
        let velocity = &kin.com_jacobian * rates;
        let mut acceleration = &kin.com_jacobian * accels;
        for a in 0..n {
            for b in 0..n {
                acceleration += kin.com_hessian(a, b) * (qbardot[a] * qbardot[b]);
            }
        }
        Ok((velocity, acceleration))
    }

    /// `Λ r_IMU`: acceleration of the IMU origin relative to the first link
    /// frame origin, expressed in the first link frame.
    pub fn imu_lever_acceleration(&self, base_rate: f64, base_accel: f64) -> Vector2<f64> {
        let lambda = Matrix2::new(-base_rate * base_rate, -base_accel, base_accel, -base_rate * base_rate);
        lambda * Vector2::from(self.imu_offset)
    }

    /// World acceleration of the IMU origin from the posture motion and the
    /// chain CoM acceleration `p̈_G^c`.
    pub fn imu_point_acceleration(
        &self,
        posture: &PostureState,
        com_acceleration: Vector2<f64>,
    ) -> Result<Vector2<f64>> {
        check_len("posture", self.n_links(), posture.qbar.len())?;
        let (_, com_accel_local) = self.chain_com_derivatives(&posture.qbar, &posture.qbardot, &posture.qbarddot)?;
        let lever = self.imu_lever_acceleration(posture.qbardot[0], posture.qbarddot[0]);
        Ok(com_acceleration - com_accel_local + rotation(posture.qbar[0]) * lever)
    }

    pub(crate) fn check_link(&self, i: usize) -> Result<()> {
        if i == 0 || i > self.n_links() {
            Err(Error::LinkIndex {
                index: i,
                n_links: self.n_links(),
            })
        } else {
            Ok(())
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use std::f64::consts::FRAC_PI_2;

    fn single(r: f64, a: f64) -> ChainParameters {
        ChainParameters {
            masses: vec![2.0],
            inertias: vec![0.1],
            com_offsets: vec![[r, a]],
            link_lengths: vec![],
            damping: vec![],
            imu_offset: [0.0, 0.0],
            gravity: 9.81,
        }
    }

    fn two_equal() -> ChainParameters {
        ChainParameters {
            masses: vec![1.0, 1.0],
            inertias: vec![0.1, 0.1],
            com_offsets: vec![[0.5, 0.0], [0.5, 0.0]],
            link_lengths: vec![1.0],
            damping: vec![0.0],
            imu_offset: [0.0, 0.0],
            gravity: 9.81,
        }
    }

    #[test]
    fn rotation_cases() {
        assert_eq!(rotation(0.0), Matrix2::identity());
        assert_relative_eq!(rotation(FRAC_PI_2), Matrix2::new(0.0, -1.0, 1.0, 0.0), epsilon = 1e-15);
        for k in 0..50 {
            let theta = -7.0 + 0.3 * k as f64;
            let r = rotation(theta);
            assert_relative_eq!(r * rotation(-theta), Matrix2::identity(), epsilon = 1e-14);
            assert_relative_eq!(r.determinant(), 1.0, epsilon = 1e-14);
        }
    }

    #[test]
    fn link_com_examples() {
        let p = single(0.5, 0.0);
        assert_relative_eq!(p.link_com_position(&[0.0], 1).unwrap(), Vector2::new(0.5, 0.0));
        assert_relative_eq!(
            p.link_com_position(&[FRAC_PI_2], 1).unwrap(),
            Vector2::new(0.0, 0.5),
            epsilon = 1e-15
        );
        let two = two_equal();
        assert_relative_eq!(two.link_com_position(&[0.0, 0.0], 2).unwrap(), Vector2::new(1.5, 0.0));
        assert!(matches!(
            two.link_com_position(&[0.0, 0.0], 3),
            Err(Error::LinkIndex { index: 3, .. })
        ));
        assert!(two.link_com_position(&[0.0, 0.0], 0).is_err());
    }

    #[test]
    fn chain_com_examples() {
        let p = single(0.3, -0.1);
        assert_eq!(p.chain_com(&[0.7]).unwrap(), p.link_com_position(&[0.7], 1).unwrap());
        assert_relative_eq!(two_equal().chain_com(&[0.0, 0.0]).unwrap(), Vector2::new(1.0, 0.0));

        let params = ChainParameters::two_link_default();
        let q = [0.4, -1.3];
        let kin = PostureKinematics::new(&params, &q).unwrap();
        let moment: Vector2<f64> = params
            .masses
            .iter()
            .zip(&kin.link_com)
            .map(|(m, p)| (p - kin.com) * *m)
            .sum();
        assert!(moment.norm() < 1e-12);
    }

    #[test]
    fn jacobians_match_finite_differences() {
        let params = ChainParameters {
            masses: vec![1.0, 2.0, 0.5],
            inertias: vec![0.1, 0.2, 0.05],
            com_offsets: vec![[0.2, 0.03], [0.1, -0.02], [0.3, 0.0]],
            link_lengths: vec![0.4, 0.25],
            damping: vec![0.1, 0.1],
            imu_offset: [0.0, 0.0],
            gravity: 9.81,
        };
        let q = [0.3, -0.8, 1.9];
        let kin = PostureKinematics::new(&params, &q).unwrap();
        let h = 1e-6;
        for col in 0..3 {
            let mut qp = q;
            let mut qm = q;
            qp[col] += h;
            qm[col] -= h;
            let kp = PostureKinematics::new(&params, &qp).unwrap();
            let km = PostureKinematics::new(&params, &qm).unwrap();
            for link in 0..3 {
                let fd = (kp.link_com[link] - km.link_com[link]) / (2.0 * h);
                assert_relative_eq!(fd, kin.link_jacobians[link].column(col).into_owned(), epsilon = 1e-8);
            }
        }
    }

    #[test]
    fn com_derivatives_stationary_and_circular() {
        let params = ChainParameters::two_link_default();
        let (v, a) = params
            .chain_com_derivatives(&[0.3, 0.2], &[0.0, 0.0], &[0.0, 0.0])
            .unwrap();
        assert_eq!(v, Vector2::zeros());
        assert_eq!(a, Vector2::zeros());

        let r = 0.4;
        let omega = 3.0;
        let (v, a) = single(r, 0.0).chain_com_derivatives(&[0.0], &[omega], &[0.0]).unwrap();
        assert_relative_eq!(v, Vector2::new(0.0, r * omega), epsilon = 1e-12);
        assert_relative_eq!(a, Vector2::new(-r * omega * omega, 0.0), epsilon = 1e-6);
    }

    #[test]
    fn com_velocity_matches_trajectory_difference() {
        let params = ChainParameters::two_link_default();
        let traj = |t: f64| [0.5 - 2.0 * t, 0.8 * (7.0 * t).sin()];
        let rate = |t: f64| [-2.0, 5.6 * (7.0 * t).cos()];
        let accel = |t: f64| [0.0, -39.2 * (7.0 * t).sin()];
        for &t in &[0.0, 0.13, 0.41] {
            let h = 1e-5;
            let fd_v = (params.chain_com(&traj(t + h)).unwrap() - params.chain_com(&traj(t - h)).unwrap()) / (2.0 * h);
            let (v, a) = params.chain_com_derivatives(&traj(t), &rate(t), &accel(t)).unwrap();
            assert_relative_eq!(v, fd_v, max_relative = 1e-6);

            let (vp, _) = params
                .chain_com_derivatives(&traj(t + h), &rate(t + h), &accel(t + h))
                .unwrap();
            let (vm, _) = params
                .chain_com_derivatives(&traj(t - h), &rate(t - h), &accel(t - h))
                .unwrap();
            assert_relative_eq!(a, (vp - vm) / (2.0 * h), max_relative = 1e-5, epsilon = 1e-6);
        }
    }

    #[test]
    fn imu_acceleration_cases() {
        let mut params = single(0.5, 0.0);
        let g = params.gravity;
        let rest = PostureState::at_rest(vec![0.0]);
        assert_eq!(
            params.imu_point_acceleration(&rest, Vector2::new(0.0, -g)).unwrap(),
            Vector2::new(0.0, -g)
        );

        params.imu_offset = [0.1, 0.0];
        params.com_offsets = vec![[0.0, 0.0]];
        let spinning = PostureState {
            qbar: vec![0.0],
            qbardot: vec![2.0],
            qbarddot: vec![0.0],
        };
        assert_relative_eq!(
            params.imu_point_acceleration(&spinning, Vector2::zeros()).unwrap(),
            Vector2::new(-0.4, 0.0),
            epsilon = 1e-12
        );

        let params = ChainParameters {
            imu_offset: [0.0, 0.0],
            ..ChainParameters::two_link_default()
        };
        let moving = PostureState {
            qbar: vec![0.3, 0.5],
            qbardot: vec![1.0, -2.0],
            qbarddot: vec![0.5, 3.0],
        };
        let com_acc = Vector2::new(0.2, -9.0);
        let (_, local) = params
            .chain_com_derivatives(&moving.qbar, &moving.qbardot, &moving.qbarddot)
            .unwrap();
        assert_eq!(
            params.imu_point_acceleration(&moving, com_acc).unwrap(),
            com_acc - local
        );
    }
}
