use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

/// Relative central-difference step used when callers do not pick one.
pub const DEFAULT_RELATIVE_STEP: f64 = 1e-6;

/// Central-difference Jacobian of `f` at `x`, one column per coordinate.
///
/// Column `j` uses a step of `relative_step · max(1, |x_j|)` rounded to the
/// nearest power of two, and divides by the realised spacing
/// `(x_j + h) - (x_j - h)`, so maps that are linear on a dyadic grid are
/// differentiated without rounding error.
pub fn numerical_jacobian<F>(mut f: F, x: &DVector<f64>, relative_step: f64) -> Result<DMatrix<f64>>
where
    F: FnMut(&DVector<f64>) -> Result<DVector<f64>>,
{
    let mut jac: Option<DMatrix<f64>> = None;
    let mut probe = x.clone();
    for j in 0..x.len() {
        let xj = x[j];
        let step = (relative_step * xj.abs().max(1.0)).log2().round().exp2();
        let (up, down) = (xj + step, xj - step);

        probe[j] = up;
        let plus = f(&probe)?;
        probe[j] = down;
        let minus = f(&probe)?;
        probe[j] = xj;

        let column = (plus - minus) / (up - down);
        if column.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFiniteJacobian { column: j });
        }
        jac.get_or_insert_with(|| DMatrix::zeros(column.len(), x.len()))
            .set_column(j, &column);
    }
    Ok(jac.unwrap_or_else(|| DMatrix::zeros(0, 0)))
}

/// Like [`numerical_jacobian`] but only differentiates the listed columns;
/// the others are left at zero. For maps known not to depend on some
/// coordinates.
pub fn numerical_jacobian_columns<F>(
    mut f: F,
    x: &DVector<f64>,
    columns: &[usize],
    relative_step: f64,
) -> Result<DMatrix<f64>>
where
    F: FnMut(&DVector<f64>) -> Result<DVector<f64>>,
{
    let active = DVector::from_iterator(columns.len(), columns.iter().map(|&j| x[j]));
    let mut full = x.clone();
    let partial = numerical_jacobian(
        |v| {
            for (k, &j) in columns.iter().enumerate() {
                full[j] = v[k];
            }
            f(&full)
        },
        &active,
        relative_step,
    )
    .map_err(|e| match e {
        Error::NonFiniteJacobian { column } => Error::NonFiniteJacobian {
            column: columns[column],
        },
        other => other,
    })?;
    let mut jac = DMatrix::zeros(partial.nrows(), x.len());
    for (k, &j) in columns.iter().enumerate() {
        jac.set_column(j, &partial.column(k));
    }
    Ok(jac)
}
