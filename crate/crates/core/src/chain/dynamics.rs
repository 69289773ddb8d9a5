use nalgebra::{Cholesky, DMatrix, DVector, Matrix2xX, RowDVector, Vector2};

use super::{ChainParameters, Coordinates, PostureKinematics};
use crate::error::{check_len, Error, Result};

/// Angular Jacobian of link `i` (1-based): ones in columns `1..=i`.
pub fn angular_jacobian(i: usize, dim: usize) -> RowDVector<f64> {
    RowDVector::from_fn(dim, |_, j| if j < i { 1.0 } else { 0.0 })
}

/// Mass matrix, Coriolis matrix and gravity vector at one state.
#[derive(Clone, Debug)]
pub struct DynamicsTerms {
    pub mass: DMatrix<f64>,
    pub coriolis: DMatrix<f64>,
    pub gravity: DVector<f64>,
}

impl ChainParameters {
    fn posture_jacobian(kin: &PostureKinematics, link: usize, mode: Coordinates) -> Matrix2xX<f64> {
        match mode {
            Coordinates::Full => kin.link_jacobians[link].clone(),
            Coordinates::Reduced => &kin.link_jacobians[link] - &kin.com_jacobian,
        }
    }

    /// Linear Jacobian of the CoM of link `i` (1-based).
    ///
    /// In full coordinates this is `∂p_G^{c_i}/∂q` (the last two columns are
    /// the identity); in reduced coordinates `∂(p_1^{c_i} - p_1^c)/∂q̄`.
    pub fn linear_jacobian(&self, coords: &[f64], i: usize, mode: Coordinates) -> Result<DMatrix<f64>> {
        self.check_coords(coords, mode)?;
        self.check_link(i)?;
        let n = self.n_links();
        let kin = PostureKinematics::new(self, &coords[..n])?;
        let posture = Self::posture_jacobian(&kin, i - 1, mode);
        let mut jac = DMatrix::zeros(2, mode.dim(n));
        jac.columns_mut(0, n).copy_from(&posture);
        if mode == Coordinates::Full {
            jac[(0, n)] = 1.0;
            jac[(1, n + 1)] = 1.0;
        }
        Ok(jac)
    }

    fn mass_from_kinematics(&self, kin: &PostureKinematics, mode: Coordinates) -> DMatrix<f64> {
        let n = self.n_links();
        let dim = mode.dim(n);
        let mut mass = DMatrix::zeros(dim, dim);
        for k in 0..n {
            let m = self.masses[k];
            let jac = Self::posture_jacobian(kin, k, mode);
            for a in 0..n {
                for b in a..n {
                    let v = m * (jac[(0, a)] * jac[(0, b)] + jac[(1, a)] * jac[(1, b)]);
                    mass[(a, b)] += v;
                }
                if mode == Coordinates::Full {
                    mass[(a, n)] += m * jac[(0, a)];
                    mass[(a, n + 1)] += m * jac[(1, a)];
                }
            }
            // Rotational part: link k spins with the sum of the first k + 1 angles.
            let inertia = self.inertias[k];
            for a in 0..=k {
                for b in a..=k {
                    mass[(a, b)] += inertia;
                }
            }
        }
        if mode == Coordinates::Full {
            let total = self.total_mass();
            mass[(n, n)] = total;
            mass[(n + 1, n + 1)] = total;
        }
        for a in 0..dim {
            for b in 0..a {
                mass[(a, b)] = mass[(b, a)];
            }
        }
        mass
    }

    fn gravity_from_kinematics(&self, kin: &PostureKinematics, mode: Coordinates) -> DVector<f64> {
        let n = self.n_links();
        let mut gravity = DVector::zeros(mode.dim(n));
        for k in 0..n {
            let jac = Self::posture_jacobian(kin, k, mode);
            let weight = self.masses[k] * self.gravity;
            for a in 0..n {
                gravity[a] += weight * jac[(1, a)];
            }
        }
        if mode == Coordinates::Full {
            gravity[n + 1] = self.total_mass() * self.gravity;
        }
        gravity
    }

    pub fn mass_matrix(&self, coords: &[f64], mode: Coordinates) -> Result<DMatrix<f64>> {
        self.check_coords(coords, mode)?;
        let kin = PostureKinematics::new(self, &coords[..self.n_links()])?;
        Ok(self.mass_from_kinematics(&kin, mode))
    }

    pub fn gravity_vector(&self, coords: &[f64], mode: Coordinates) -> Result<DVector<f64>> {
        self.check_coords(coords, mode)?;
        let kin = PostureKinematics::new(self, &coords[..self.n_links()])?;
        Ok(self.gravity_from_kinematics(&kin, mode))
    }

    pub fn damping_matrix(&self, mode: Coordinates) -> DMatrix<f64> {
        let n = self.n_links();
        let mut damping = DMatrix::zeros(mode.dim(n), mode.dim(n));
        for (j, beta) in self.damping.iter().enumerate() {
            damping[(j + 1, j + 1)] = *beta;
        }
        damping
    }

    /// Coriolis matrix from Christoffel symbols of the first kind, contracted
    /// against the generalized rates.
    ///
    /// With `D_k = ∂M/∂q_k` and `V` the matrix whose column `j` is `D_j q̇`,
    /// `C = (Ṁ + V - Vᵀ) / 2`, so `Ṁ - 2C` is skew-symmetric by construction.
    /// The mass matrix only depends on the posture, so only those partials
    /// are taken.
    pub fn coriolis_matrix(&self, coords: &[f64], rates: &[f64], mode: Coordinates) -> Result<DMatrix<f64>> {
        self.check_coords(coords, mode)?;
        check_len("generalized rates", coords.len(), rates.len())?;
        let kin = PostureKinematics::new(self, &coords[..self.n_links()])?;
        Ok(self.coriolis_from_kinematics(&kin, rates, mode))
    }

    /// `∂M/∂q̄_j` for every posture coordinate `j`, from the link CoM Hessians.
    pub fn mass_partials(&self, coords: &[f64], mode: Coordinates) -> Result<Vec<DMatrix<f64>>> {
        self.check_coords(coords, mode)?;
        let kin = PostureKinematics::new(self, &coords[..self.n_links()])?;
        Ok(self.mass_partials_from_kinematics(&kin, mode))
    }

    fn mass_partials_from_kinematics(&self, kin: &PostureKinematics, mode: Coordinates) -> Vec<DMatrix<f64>> {
        let n = self.n_links();
        let dim = mode.dim(n);
        let jacobians: Vec<Matrix2xX<f64>> = (0..n).map(|k| Self::posture_jacobian(kin, k, mode)).collect();
        (0..n)
            .map(|j| {
                let mut d = DMatrix::zeros(dim, dim);
                let com_col: Vec<Vector2<f64>> = match mode {
                    Coordinates::Full => vec![Vector2::zeros(); n],
                    Coordinates::Reduced => (0..n).map(|a| kin.com_hessian(a, j)).collect(),
                };
                for (k, jac) in jacobians.iter().enumerate() {
                    let m = self.masses[k];
                    let dj: Vec<Vector2<f64>> = (0..n).map(|a| kin.link_com_hessian(k, a, j) - com_col[a]).collect();
                    for a in 0..n {
                        for b in a..n {
                            let ja = Vector2::new(jac[(0, a)], jac[(1, a)]);
                            let jb = Vector2::new(jac[(0, b)], jac[(1, b)]);
                            d[(a, b)] += m * (dj[a].dot(&jb) + ja.dot(&dj[b]));
                        }
                        if mode == Coordinates::Full {
                            d[(a, n)] += m * dj[a].x;
                            d[(a, n + 1)] += m * dj[a].y;
                        }
                    }
                }
                for a in 0..dim {
                    for b in 0..a {
                        d[(a, b)] = d[(b, a)];
                    }
                }
                d
            })
            .collect()
    }

    fn coriolis_from_kinematics(&self, kin: &PostureKinematics, rates: &[f64], mode: Coordinates) -> DMatrix<f64> {
        let dim = mode.dim(self.n_links());
        let qdot = nalgebra::DVectorView::from_slice(rates, dim);
        let mut mass_dot = DMatrix::zeros(dim, dim);
        let mut v = DMatrix::zeros(dim, dim);
        for (k, partial) in self.mass_partials_from_kinematics(kin, mode).iter().enumerate() {
            mass_dot += partial * rates[k];
            v.set_column(k, &(partial * qdot));
        }
        (mass_dot + &v - v.transpose()) * 0.5
    }

    /// `M`, `C` and `g` at one state, sharing the kinematics evaluation.
    pub fn dynamics_terms(&self, coords: &[f64], rates: &[f64], mode: Coordinates) -> Result<DynamicsTerms> {
        self.check_coords(coords, mode)?;
        check_len("generalized rates", coords.len(), rates.len())?;
        let qbar = &coords[..self.n_links()];
        let kin = PostureKinematics::new(self, qbar)?;
        Ok(DynamicsTerms {
            mass: self.mass_from_kinematics(&kin, mode),
            coriolis: self.coriolis_from_kinematics(&kin, rates, mode),
            gravity: self.gravity_from_kinematics(&kin, mode),
        })
    }

    /// Generalized accelerations `M⁻¹(u - C q̇ - B q̇ - g)` for the given joint
    /// torques `τ_1 … τ_{n-1}`.
    pub fn forward_dynamics(
        &self,
        coords: &[f64],
        rates: &[f64],
        torques: &[f64],
        mode: Coordinates,
    ) -> Result<DVector<f64>> {
        let terms = self.dynamics_terms(coords, rates, mode)?;
        let u = self.generalized_input(torques, mode)?;
        let qdot = DVector::from_column_slice(rates);
        let rhs = u - &terms.coriolis * &qdot - self.damping_matrix(mode) * &qdot - &terms.gravity;
        let chol = Cholesky::new(terms.mass).ok_or(Error::MassFactorization)?;
        Ok(chol.solve(&rhs))
    }

    /// Reduced generalized forces `M̄ q̈̄ + C̄ q̇̄ + B̄ q̇̄ + ḡ` that realise the
    /// requested posture accelerations. The first entry is the torque that
    /// would be needed on the (unactuated) base orientation.
    pub fn inverse_dynamics_reduced(&self, qbar: &[f64], qbardot: &[f64], qbarddot: &[f64]) -> Result<DVector<f64>> {
        check_len("posture accelerations", self.n_links(), qbarddot.len())?;
        let terms = self.dynamics_terms(qbar, qbardot, Coordinates::Reduced)?;
        let qdot = DVector::from_column_slice(qbardot);
        let qddot = DVector::from_column_slice(qbarddot);
        Ok(&terms.mass * qddot
            + &terms.coriolis * &qdot
            + self.damping_matrix(Coordinates::Reduced) * &qdot
            + terms.gravity)
    }
}
