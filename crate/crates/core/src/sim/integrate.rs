use nalgebra::DVector;

use crate::error::{Error, Result};

/// Classical fourth-order Runge–Kutta step of `ẋ = f(t, x)`.
pub fn rk4_step<F>(mut f: F, t: f64, x: &DVector<f64>, dt: f64) -> Result<DVector<f64>>
where
    F: FnMut(f64, &DVector<f64>) -> Result<DVector<f64>>,
{
    let mut eval = |t: f64, x: &DVector<f64>| -> Result<DVector<f64>> {
        let d = f(t, x)?;
        if d.iter().all(|v| v.is_finite()) {
            Ok(d)
        } else {
            Err(Error::NonFiniteDerivative)
        }
    };
    let half = 0.5 * dt;
    let k1 = eval(t, x)?;
    let k2 = eval(t + half, &(x + &k1 * half))?;
    let k3 = eval(t + half, &(x + &k2 * half))?;
    let k4 = eval(t + dt, &(x + &k3 * dt))?;
    Ok(x + (k1 + (k2 + k3) * 2.0 + k4) * (dt / 6.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::dvector;

    #[test]
    fn constant_solution() {
        let x = rk4_step(|_, x| Ok(x * 0.0), 0.0, &dvector![5.0], 0.1).unwrap();
        assert_eq!(x[0], 5.0);
    }

    #[test]
    fn exponential_growth() {
        let x = rk4_step(|_, x| Ok(x.clone()), 0.0, &dvector![1.0], 0.1).unwrap();
        assert!((x[0] - 0.1f64.exp()).abs() < 1e-7);
    }

    #[test]
    fn ballistic_height_is_exact() {
        // State (h, ḣ) under constant gravity; repeated steps stay on the parabola.
        let g = 9.81;
        let mut x = dvector![1.0, 3.0];
        let dt = 0.01;
        for k in 0..100 {
            x = rk4_step(|_, s| Ok(dvector![s[1], -g]), k as f64 * dt, &x, dt).unwrap();
        }
        let t = 1.0;
        assert!((x[0] - (1.0 + 3.0 * t - 0.5 * g * t * t)).abs() < 1e-12);
        assert!((x[1] - (3.0 - g * t)).abs() < 1e-12);
    }

    #[test]
    fn non_finite_derivative_is_an_error() {
        let err = rk4_step(|_, _| Ok(dvector![f64::NAN]), 0.0, &dvector![1.0], 0.1).unwrap_err();
        assert!(matches!(err, Error::NonFiniteDerivative));
    }
}
