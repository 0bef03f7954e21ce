use nalgebra::{DMatrix, DVector};

use crate::dataset::AbstractDataset;
use crate::linalg;
use crate::zonotope::{AffineForm, ZVector};
use crate::{Error, Result};

/// `(X^T X + lambda n I)^-1 X^T y`.
pub fn ridge_closed_form_real(x: &DMatrix<f64>, y: &DVector<f64>, lambda: f64) -> Result<DVector<f64>> {
    if x.nrows() == 0 {
        return Err(Error::EmptyData);
    }
    if x.nrows() != y.len() {
        return Err(Error::ShapeMismatch {
            expected: format!("{} labels", x.nrows()),
            found: y.len().to_string(),
        });
    }
    linalg::solve_vec(
        &linalg::regularized_gram(x, lambda),
        &(x.transpose() * y),
        "regularized Gram matrix",
    )
}

/// First-order data part of the fixed point:
/// `G^-1 (X_S^T y_R + X_R^T y_S - (X_R^T X_S + X_S^T X_R) w_R)` with
/// `G = X_R^T X_R + lambda n I`. Affine in the data symbols, zero center.
pub fn closed_form_symbolic_data(ds: &AbstractDataset, lambda: f64, w_r: &DVector<f64>) -> Result<ZVector<AffineForm>> {
    let g = linalg::regularized_gram(&ds.x_r, lambda);
    let xrt = ds.x_r.transpose();
    // X_S^T (y_R - X_R w_R) + X_R^T (y_S - X_S w_R)
    let resid = ZVector::from_reals(&(&ds.y_r - &ds.x_r * w_r));
    let a = ds.x_s.transpose().mul_vec(&resid)?;
    let xs_w = ds.x_s.mul_vec(&ZVector::from_reals(w_r))?;
    let b = ds.y_s.checked_sub(&xs_w)?.transform(&xrt)?;
    let rhs = a.checked_add(&b)?;
    let g_inv = linalg::inverse(&g, "regularized Gram matrix")?;
    let w_d = rhs.transform(&g_inv)?;
    // the center is zero up to rounding from the real part of `resid`
    ZVector::new(w_d.iter().map(|f| f.with_center(0.0)).collect()).try_into_affine()
}
