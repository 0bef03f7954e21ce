//! One symbolic gradient step applied to a computed fixed point.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use super::fixed_point::AbstractWeights;
use super::RidgeConfig;
use crate::dataset::AbstractDataset;
use crate::linalg::max_abs;
use crate::zonotope::{linearize, ErrorSymbolId, Monomial, PolyForm, ZVector};
use crate::Result;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResidualReport {
    pub eta: f64,
    /// Largest change of the real part.
    pub phi_r: f64,
    /// Largest change of a first-order data-symbol coefficient.
    pub phi_d: f64,
    /// `max_i |k'_i - k_i|` for the box after the step.
    pub box_diameter: f64,
    pub k_norm: f64,
}

impl ResidualReport {
    pub const PHI_TOLERANCE: f64 = 1e-9;
    pub const BOX_TOLERANCE: f64 = 1e-8;

    pub fn passes(&self) -> bool {
        self.phi_r < Self::PHI_TOLERANCE
            && self.phi_d < Self::PHI_TOLERANCE
            && self.box_diameter < Self::BOX_TOLERANCE * (1.0 + self.k_norm)
    }
}

/// Applies `w - eta * grad(w)` to the weight zonotope with exact polynomial
/// algebra, then compares the real part, the first-order data part, and the
/// box sizes (linearized, in `A` coordinates) with the inputs.
///
/// `eta = 1 / (2 lambda + (2/n) max_i q_ii)` keeps every
/// `1 - 2 eta lambda - (2 eta / n) q_ii` nonnegative.
pub fn verify_fixed_point_residual(
    ds: &AbstractDataset,
    w: &AbstractWeights,
    cfg: &RidgeConfig,
) -> Result<ResidualReport> {
    let n = ds.n() as f64;
    let reg = ds.registry();
    let q = &w.a * ds.x_r.transpose() * &ds.x_r * &w.a_inv;
    let q_max = (0..q.nrows()).map(|i| q[(i, i)]).fold(0.0, f64::max);
    let denom = 2.0 * cfg.lambda + 2.0 / n * q_max;
    let eta = if denom > 0.0 { 1.0 / denom } else { 1.0 };

    let w_hat = w.zonotope().into_poly();
    let x_hat = ds.x_hat();
    let resid = x_hat.mul_vec(&w_hat)?.checked_sub(&ds.y_hat())?;
    let grad = x_hat
        .transpose()
        .mul_vec(&resid)?
        .scale(2.0 / n)
        .checked_add(&w_hat.scale(2.0 * cfg.lambda))?;
    let step = w_hat.checked_sub(&grad.scale(eta))?;

    let phi_r = max_abs(step.iter().zip(w.w_r.iter()).map(|(f, r)| f.center() - r));
    let data: BTreeSet<ErrorSymbolId> = ds.data_symbols().into_iter().collect();
    let mut phi_d: f64 = 0.0;
    for (f, wd) in step.iter().zip(w.w_d.iter()) {
        for &s in &data {
            phi_d = phi_d.max((f.linear_coefficient(s) - wd.coefficient(s)).abs());
        }
    }

    let non_data = ZVector::new(
        step.iter()
            .map(|f| {
                let terms: Vec<(Monomial, f64)> = f
                    .terms()
                    .filter(|(m, _)| !(m.degree() == 1 && m.contains_data_only()))
                    .map(|(m, c)| (m.clone(), c))
                    .collect();
                if terms.is_empty() {
                    PolyForm::zero()
                } else {
                    PolyForm::from_terms(reg.tag(), 0.0, terms)
                }
            })
            .collect(),
    );
    let boxed = linearize(&non_data, reg)?.into_poly().transform(&w.a)?;
    let box_diameter = max_abs(boxed.iter().zip(w.k.iter()).map(|(f, k)| f.abs_coefficient_sum() - k));

    Ok(ResidualReport {
        eta,
        phi_r,
        phi_d,
        box_diameter,
        k_norm: max_abs(w.k.iter().copied()),
    })
}
