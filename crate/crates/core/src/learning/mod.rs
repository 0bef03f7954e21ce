//! Abstract ridge training: the fixed point of abstract gradient descent.
//!
//! The weight zonotope has three parts. `w_r` is the ridge solution on the
//! real centers. `w_d` is affine in the data symbols and carries the
//! first-order effect of the uncertain cells. The box `A^-1 diag(k) e'`
//! bounds everything else. `k` solves a small linear system whose
//! coefficient matrix is an M-matrix whenever `lambda >= beta`; otherwise
//! the dataset is split into smaller parts and the results are joined.

mod closed_form;
mod fixed_point;
mod record;
mod system;
mod verify;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

pub use closed_form::{closed_form_symbolic_data, ridge_closed_form_real};
pub use fixed_point::{
    contains_world_weights, determine_num_splits, fixed_point, AbstractWeights, FixedPointDiagnostics,
};
pub use record::{AbstractWeightsRecord, DataCoefficient};
pub use system::{build_non_data_system, build_transform, solve_non_data, NonDataSystem};
pub use verify::{verify_fixed_point_residual, ResidualReport};

/// Change of basis used when boxing the non-data part of the weights.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Transform {
    /// `A = V^T` for the eigendecomposition `X_R^T X_R = V S V^T`.
    SvdOfCovariance,
    Identity,
    Custom(DMatrix<f64>),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RidgeConfig {
    pub lambda: f64,
    pub transform: Transform,
    /// Maximum number of parts the splitting fallback may create.
    pub split_budget: usize,
    pub tolerance: f64,
    /// Run the one-step residual check on unsplit fixed points.
    pub verify_residual: bool,
}

impl RidgeConfig {
    pub fn new(lambda: f64) -> Self {
        RidgeConfig {
            lambda,
            ..Default::default()
        }
    }

    pub fn with_transform(mut self, t: Transform) -> Self {
        self.transform = t;
        self
    }
}

impl Default for RidgeConfig {
    fn default() -> Self {
        RidgeConfig {
            lambda: 0.1,
            transform: Transform::SvdOfCovariance,
            split_budget: 4096,
            tolerance: 1e-9,
            verify_residual: true,
        }
    }
}
