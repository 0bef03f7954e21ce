//! Error symbols, polynomial/affine forms, and the zonotope operations built
//! on them.

pub mod form;
pub mod interval;
pub mod reduce;
pub mod registry;
pub mod split;
pub mod vector;

pub use form::{add_forms, interval_of, mul_forms, AffineForm, Monomial, PolyForm, PRUNE_EPS};
pub use interval::{Interval, IntervalBox};
pub use reduce::{interval_hull, linearize, tih_reduce, MAX_TRANSFORM_CONDITION};
pub use registry::{Assignment, ErrorSymbolId, Registry, SymbolKind};
pub use split::{box_join, mu_split, split_combinations, split_offsets};
pub use vector::{mat_mul, ZMatrix, ZVector};
