//! Small dense linear-algebra helpers on top of nalgebra.

use nalgebra::{DMatrix, DVector};

use crate::{Error, Result};

/// `X^T X + lambda * n * I`.
pub fn regularized_gram(x: &DMatrix<f64>, lambda: f64) -> DMatrix<f64> {
    let n = x.nrows() as f64;
    let mut g = x.transpose() * x;
    for i in 0..g.nrows() {
        g[(i, i)] += lambda * n;
    }
    g
}

/// Solves `m * out = rhs` with LU and partial pivoting.
pub fn solve(m: &DMatrix<f64>, rhs: &DMatrix<f64>, what: &'static str) -> Result<DMatrix<f64>> {
    let lu = m.clone().lu();
    if is_numerically_singular(m) {
        return Err(Error::Singular(what));
    }
    lu.solve(rhs).ok_or(Error::Singular(what))
}

pub fn solve_vec(m: &DMatrix<f64>, rhs: &DVector<f64>, what: &'static str) -> Result<DVector<f64>> {
    let lu = m.clone().lu();
    if is_numerically_singular(m) {
        return Err(Error::Singular(what));
    }
    lu.solve(rhs).ok_or(Error::Singular(what))
}

pub fn inverse(m: &DMatrix<f64>, what: &'static str) -> Result<DMatrix<f64>> {
    solve(m, &DMatrix::identity(m.nrows(), m.ncols()), what)
}

/// 2-norm condition number from the singular values; infinite when singular.
pub fn condition_number(m: &DMatrix<f64>) -> f64 {
    let sv = m.clone().singular_values();
    let max = sv.iter().cloned().fold(0.0_f64, f64::max);
    let min = sv.iter().cloned().fold(f64::INFINITY, f64::min);
    if min <= 0.0 || !min.is_finite() {
        f64::INFINITY
    } else {
        max / min
    }
}

fn is_numerically_singular(m: &DMatrix<f64>) -> bool {
    m.nrows() == 0 || condition_number(m) > 1e15
}

pub fn max_abs(v: impl IntoIterator<Item = f64>) -> f64 {
    v.into_iter().fold(0.0, |acc, x| acc.max(x.abs()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn solve_rejects_singular() {
        let m = DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 2.0, 4.0]);
        assert!(solve_vec(&m, &DVector::from_vec(vec![1.0, 1.0]), "test").is_err());
    }

    #[test]
    fn gram_adds_scaled_ridge() {
        let x = DMatrix::from_row_slice(2, 1, &[1.0, 1.0]);
        let g = regularized_gram(&x, 0.5);
        assert_eq!(g[(0, 0)], 3.0);
    }
}
