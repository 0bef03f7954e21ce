//! Sound over-approximation of every ridge-regression model that can be
//! trained from an uncertain dataset.
//!
//! The uncertain training set is abstracted as a linear zonotope (one error
//! symbol per uncertain cell). [`learning::fixed_point`] computes, in closed
//! form, a weight zonotope that contains the ridge solution of every possible
//! world. [`inference`] turns that zonotope into prediction ranges, robustness
//! certificates, loss intervals and parameter bounds, and [`oracle`] provides
//! the ground-truth under-approximations and the interval baseline used to
//! check them.

// NaN must fail range checks, so `!(x > 0.0)` is intended.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod dataset;
pub mod error;
pub mod experiment;
pub mod inference;
pub mod learning;
pub mod linalg;
pub mod oracle;
pub mod zonotope;

pub use error::{Error, Result};
