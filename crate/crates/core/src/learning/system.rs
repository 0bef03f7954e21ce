//! The linear system for the box sizes `k` of the non-data part.
//!
//! Write the true weights of world `e` as `w_r + w_d(e) + delta(e)` and let
//! `H = X_R^T X_R`, `P = X_R^T X_S + X_S^T X_R + X_S^T X_S`. Subtracting the
//! equations for `w_r` and `w_d` from the normal equations of world `e` gives
//!
//! ```text
//! (H + lambda n I) delta = -g0 - P delta
//! g0 = (X_R^T X_S + X_S^T X_R) w_d + X_S^T X_S (w_r + w_d) - X_S^T y_S
//! ```
//!
//! In coordinates `u = A delta` with `Q = A H A^-1`, row `i` bounds
//! `(lambda n + q_ii) |u_i|` by `c0_i + sum_{j != i} |q_ij| |u_j| + sum_j c'_ij |u_j|`
//! where `c'_ij` and `c0_i` are the absolute coefficient sums of
//! `(A P A^-1)_ij` and `(A g0)_i`. So `M |u| <= c0` with
//!
//! ```text
//! M_ii = lambda n + q_ii - c'_ii,   M_ij = -(|q_ij| + c'_ij)
//! ```
//!
//! When `lambda >= beta`, `M` is diagonally dominant with a nonpositive
//! off-diagonal, hence an M-matrix with `M^-1 >= 0`, and `k = M^-1 c0`
//! satisfies `|u| <= k`. The right-hand side `c0` here already includes
//! the `n/2` factor that appears when the system is written with the
//! gradient's `2/n` scaling.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::{RidgeConfig, Transform};
use crate::dataset::AbstractDataset;
use crate::linalg;
use crate::zonotope::{AffineForm, ZVector, MAX_TRANSFORM_CONDITION};
use crate::{Error, Result};

/// Returns `(A, A^-1)`.
pub fn build_transform(x_r: &DMatrix<f64>, cfg: &RidgeConfig) -> Result<(DMatrix<f64>, DMatrix<f64>)> {
    let d = x_r.ncols();
    match &cfg.transform {
        Transform::Identity => Ok((DMatrix::identity(d, d), DMatrix::identity(d, d))),
        Transform::SvdOfCovariance => {
            let h = x_r.transpose() * x_r;
            let eig = h.symmetric_eigen();
            // columns of V are orthonormal, so A^-1 = V exactly
            let v = eig.eigenvectors;
            Ok((v.transpose(), v))
        }
        Transform::Custom(a) => {
            if a.nrows() != d || a.ncols() != d {
                return Err(Error::ShapeMismatch {
                    expected: format!("{d}x{d} transform"),
                    found: format!("{}x{}", a.nrows(), a.ncols()),
                });
            }
            let cond = linalg::condition_number(a);
            if !(cond <= MAX_TRANSFORM_CONDITION) {
                return Err(Error::IllConditioned(cond));
            }
            Ok((a.clone(), linalg::inverse(a, "custom transform")?))
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NonDataSystem {
    /// `A X_R^T X_R A^-1`.
    pub q: DMatrix<f64>,
    pub c_prime: DMatrix<f64>,
    pub c0: DVector<f64>,
    pub beta: f64,
    pub n: usize,
}

impl NonDataSystem {
    /// Coefficient matrix `M` of `M k = c0`.
    pub fn matrix(&self, lambda: f64) -> DMatrix<f64> {
        let d = self.q.nrows();
        let ln = lambda * self.n as f64;
        DMatrix::from_fn(d, d, |i, j| {
            if i == j {
                ln + self.q[(i, i)] - self.c_prime[(i, i)]
            } else {
                -(self.q[(i, j)].abs() + self.c_prime[(i, j)])
            }
        })
    }

    /// Smallest row excess of the diagonal over the off-diagonal magnitudes.
    pub fn m_matrix_margin(&self, lambda: f64) -> f64 {
        let m = self.matrix(lambda);
        (0..m.nrows())
            .map(|i| m[(i, i)] - (0..m.ncols()).filter(|&j| j != i).map(|j| m[(i, j)].abs()).sum::<f64>())
            .fold(f64::INFINITY, f64::min)
    }

    pub fn c_prime_max(&self) -> f64 {
        self.c_prime.iter().copied().fold(0.0, f64::max)
    }

    pub fn is_homogeneous(&self) -> bool {
        self.c_prime_max() == 0.0 && self.c0.iter().all(|&c| c == 0.0)
    }
}

fn beta_of(q: &DMatrix<f64>, c_prime: &DMatrix<f64>, n: usize) -> f64 {
    let d = q.nrows();
    (0..d)
        .map(|i| {
            let off: f64 = (0..d)
                .filter(|&j| j != i)
                .map(|j| q[(i, j)].abs() + c_prime[(i, j)])
                .sum();
            off + c_prime[(i, i)] - q[(i, i)]
        })
        .fold(f64::NEG_INFINITY, f64::max)
        / n as f64
}

pub fn build_non_data_system(
    ds: &AbstractDataset,
    w_r: &DVector<f64>,
    w_d: &ZVector<AffineForm>,
    a: &DMatrix<f64>,
    a_inv: &DMatrix<f64>,
) -> Result<NonDataSystem> {
    let n = ds.n();
    let d = ds.d();
    let q = a * ds.x_r.transpose() * &ds.x_r * a_inv;

    let (c_prime, c0) = if ds.has_feature_uncertainty() {
        let xs_t = ds.x_s.transpose();
        let xr_t = ds.x_r.transpose();
        let cross = ds.x_s.left_mul_real(&xr_t)?;
        let p = cross
            .checked_add(&cross.transpose())?
            .checked_add(&xs_t.mat_mul(&ds.x_s)?)?;
        let projected = p.left_mul_real(a)?.right_mul_real(a_inv)?;
        let c_prime = DMatrix::from_fn(d, d, |i, j| projected.get(i, j).abs_coefficient_sum());

        let w_d = w_d.to_poly();
        let w_full = ZVector::from_reals(w_r).checked_add(&w_d)?;
        let xs_wd = ds.x_s.mul_vec(&w_d)?;
        let xr_wd = w_d.transform(&ds.x_r)?;
        let xs_w = ds.x_s.mul_vec(&w_full)?;
        // X_R^T X_S w_d + X_S^T (X_R w_d + X_S (w_r + w_d) - y_S)
        let inner = xr_wd.checked_add(&xs_w)?.checked_sub(&ds.y_s)?;
        let g0 = xs_wd.transform(&xr_t)?.checked_add(&xs_t.mul_vec(&inner)?)?;
        let c0 = DVector::from_iterator(d, g0.transform(a)?.iter().map(|f| f.abs_coefficient_sum()));
        (c_prime, c0)
    } else {
        (DMatrix::zeros(d, d), DVector::zeros(d))
    };

    let beta = beta_of(&q, &c_prime, n);
    Ok(NonDataSystem {
        q,
        c_prime,
        c0,
        beta,
        n,
    })
}

/// Solves `M k = c0`; errors when `lambda < beta - tolerance`.
pub fn solve_non_data(sys: &NonDataSystem, lambda: f64, tolerance: f64) -> Result<DVector<f64>> {
    if lambda < sys.beta - tolerance {
        return Err(Error::LambdaTooSmall { lambda, beta: sys.beta });
    }
    let mut k = linalg::solve_vec(&sys.matrix(lambda), &sys.c0, "non-data system")?;
    let clamp = tolerance * (1.0 + linalg::max_abs(k.iter().copied()));
    for (index, v) in k.iter_mut().enumerate() {
        if *v < 0.0 {
            if *v < -clamp {
                return Err(Error::NegativeBox { index, value: *v });
            }
            *v = 0.0;
        }
    }
    Ok(k)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::{inject_uncertainty, synthetic, UncertaintySpec, UncertaintyTarget};
    use crate::learning::{closed_form_symbolic_data, ridge_closed_form_real};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn system_for(ds: &AbstractDataset, lambda: f64, t: Transform) -> NonDataSystem {
        let cfg = RidgeConfig::new(lambda).with_transform(t);
        let w_r = ridge_closed_form_real(&ds.x_r, &ds.y_r, lambda).unwrap();
        let w_d = closed_form_symbolic_data(ds, lambda, &w_r).unwrap();
        let (a, a_inv) = build_transform(&ds.x_r, &cfg).unwrap();
        build_non_data_system(ds, &w_r, &w_d, &a, &a_inv).unwrap()
    }

    #[test]
    fn svd_transform_diagonalizes() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let x = DMatrix::from_fn(12, 3, |_, _| rng.random_range(-3.0..3.0));
        let (a, a_inv) = build_transform(&x, &RidgeConfig::default()).unwrap();
        assert!((&a * &a_inv - DMatrix::identity(3, 3)).amax() < 1e-12);
        let q = &a * x.transpose() * &x * &a_inv;
        let mut eig: Vec<f64> = (x.transpose() * &x).symmetric_eigenvalues().iter().copied().collect();
        let mut diag: Vec<f64> = (0..3).map(|i| q[(i, i)]).collect();
        eig.sort_by(f64::total_cmp);
        diag.sort_by(f64::total_cmp);
        for i in 0..3 {
            for j in 0..3 {
                if i != j {
                    assert!(q[(i, j)].abs() < 1e-9);
                }
            }
            assert!((eig[i] - diag[i]).abs() < 1e-9);
            assert!(diag[i] >= -1e-9);
        }
    }

    #[test]
    fn diagonal_covariance_gives_signed_permutation() {
        let x = DMatrix::from_row_slice(2, 2, &[2.0, 0.0, 0.0, 1.0]);
        let (a, _) = build_transform(&x, &RidgeConfig::default()).unwrap();
        for v in a.iter() {
            assert!(v.abs() < 1e-12 || (v.abs() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn identity_and_custom_transforms() {
        let x = DMatrix::from_row_slice(2, 2, &[2.0, 1.0, 0.0, 1.0]);
        let cfg = RidgeConfig::default().with_transform(Transform::Identity);
        let (a, _) = build_transform(&x, &cfg).unwrap();
        assert_eq!(&a * x.transpose() * &x, x.transpose() * &x);
        let bad = RidgeConfig::default().with_transform(Transform::Custom(DMatrix::from_row_slice(
            2,
            2,
            &[1.0, 1.0, 1.0, 1.0],
        )));
        assert!(matches!(build_transform(&x, &bad), Err(Error::IllConditioned(_))));
        let wrong = RidgeConfig::default().with_transform(Transform::Custom(DMatrix::identity(3, 3)));
        assert!(matches!(build_transform(&x, &wrong), Err(Error::ShapeMismatch { .. })));
    }

    #[test]
    fn certain_data_gives_trivial_system() {
        let d = synthetic(10, 2, 0.3, 2);
        let ds = AbstractDataset::certain(d.x.clone(), d.y.clone());
        let sys = system_for(&ds, 0.1, Transform::SvdOfCovariance);
        assert_eq!(sys.c_prime_max(), 0.0);
        assert!(sys.c0.iter().all(|&c| c == 0.0));
        let qmin = (0..3).map(|i| sys.q[(i, i)]).fold(f64::INFINITY, f64::min);
        assert!((sys.beta + qmin / 10.0).abs() < 1e-9);
        assert!(sys.beta <= 0.0);
        assert_eq!(solve_non_data(&sys, 0.1, 1e-9).unwrap(), DVector::zeros(3));
    }

    /// Hand expansion for one uncertain cell, d = 1, A = 1:
    /// `x(x + g e) + (x + g e) x + (g e)^2 - x^2 = 2 x g e + g^2 e^2`.
    #[test]
    fn single_cell_hand_expansion() {
        let (x, g) = (3.0, 0.5);
        let ds = AbstractDataset::builder(
            DMatrix::from_row_slice(2, 1, &[x, 1.0]),
            DVector::from_vec(vec![1.0, 2.0]),
        )
        .feature_cell(0, 0, g)
        .build();
        let sys = system_for(&ds, 0.5, Transform::Identity);
        assert!((sys.c_prime[(0, 0)] - (2.0 * (x * g).abs() + g * g)).abs() < 1e-14);
        assert_eq!(sys.q[(0, 0)], x * x + 1.0);
        // scalar rearrangement of the system
        let k = solve_non_data(&sys, 0.5, 1e-9).unwrap();
        let want = sys.c0[0] / (0.5 * 2.0 + sys.q[(0, 0)] - sys.c_prime[(0, 0)]);
        assert!((k[0] - want).abs() < 1e-14);
    }

    #[test]
    fn solver_residual_on_random_feasible_systems() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..50 {
            let d = 4;
            let q = DMatrix::from_fn(d, d, |i, j| {
                if i == j {
                    rng.random_range(5.0..10.0)
                } else {
                    rng.random_range(-0.5..0.5)
                }
            });
            let c_prime = DMatrix::from_fn(d, d, |_, _| rng.random_range(0.0..0.3));
            let c0 = DVector::from_fn(d, |_, _| rng.random_range(0.0..1.0));
            let n = 10;
            let beta = beta_of(&q, &c_prime, n);
            let sys = NonDataSystem {
                q,
                c_prime,
                c0,
                beta,
                n,
            };
            let lambda = beta.max(0.0) + 0.01;
            let k = solve_non_data(&sys, lambda, 1e-9).unwrap();
            assert!((sys.matrix(lambda) * &k - &sys.c0).amax() < 1e-10);
            assert!(k.iter().all(|&v| v >= 0.0));
        }
    }

    #[test]
    fn beta_boundary() {
        let q = DMatrix::from_row_slice(2, 2, &[1.0, 0.5, 0.5, 1.0]);
        let c_prime = DMatrix::from_element(2, 2, 0.4);
        let n = 2;
        let beta = beta_of(&q, &c_prime, n);
        assert!((beta - (0.9 + 0.4 - 1.0) / 2.0).abs() < 1e-15);
        let sys = NonDataSystem {
            q,
            c_prime,
            c0: DVector::from_element(2, 1.0),
            beta,
            n,
        };
        assert!(solve_non_data(&sys, beta + 1e-6, 1e-9).is_ok());
        assert!(matches!(
            solve_non_data(&sys, beta - 1e-6, 1e-9),
            Err(Error::LambdaTooSmall { .. })
        ));
    }

    #[test]
    fn small_radius_needs_no_splitting() {
        let d = synthetic(40, 2, 0.5, 8);
        let spec = UncertaintySpec {
            target: UncertaintyTarget::Features(vec![1, 2]),
            percentage: 0.1,
            radius: 0.05,
            seed: 1,
        };
        let ds = inject_uncertainty(&d, &spec).unwrap();
        let sys = system_for(&ds, 0.0, Transform::SvdOfCovariance);
        assert!(sys.beta <= 0.0, "beta = {}", sys.beta);
        assert!(sys.c_prime_max() > 0.0);
        assert!(sys.c0.iter().all(|&c| c >= 0.0));
    }
}
