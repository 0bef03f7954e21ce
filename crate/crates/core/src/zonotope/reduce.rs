//! Linearization and order reduction.

use std::collections::{BTreeMap, BTreeSet};

use nalgebra::DMatrix;

use super::form::{AffineForm, Monomial, PolyForm};
use super::registry::{ErrorSymbolId, Registry};
use super::vector::ZVector;
use crate::linalg;
use crate::{Error, Result};

/// Largest accepted condition number for a TIH transformation.
pub const MAX_TRANSFORM_CONDITION: f64 = 1e12;

pub(crate) fn check_registry(found: Option<u64>, reg: &Registry) -> Result<()> {
    match found {
        Some(tag) if tag != reg.tag() => Err(Error::RegistryMismatch(tag, reg.tag())),
        _ => Ok(()),
    }
}

/// Replaces every distinct monomial of degree >= 2 with one fresh symbol.
///
/// The same monomial in different entries maps to the same fresh symbol, so
/// its coefficients across the vector remain one generator.
pub fn linearize(v: &ZVector<PolyForm>, reg: &Registry) -> Result<ZVector<AffineForm>> {
    check_registry(v.registry(), reg)?;
    let replacement: BTreeMap<Monomial, ErrorSymbolId> = v
        .distinct_monomials()
        .into_iter()
        .filter(|m| m.degree() >= 2)
        .map(|m| (m, reg.fresh_symbol()))
        .collect();
    let entries = v
        .iter()
        .map(|f| {
            let terms: Vec<_> = f
                .terms()
                .map(|(m, c)| match replacement.get(m) {
                    Some(&s) => (s, c),
                    None => (m.as_symbol().expect("degree-1 monomial"), c),
                })
                .collect();
            if terms.is_empty() {
                AffineForm::constant(f.center())
            } else {
                AffineForm::from_generators(reg.tag(), f.center(), terms)
            }
        })
        .collect();
    Ok(ZVector::new(entries))
}

/// Interval hull over `selected`: the selected generators of entry `i` are
/// replaced by one fresh symbol whose coefficient is their absolute sum.
pub fn interval_hull(
    v: &ZVector<AffineForm>,
    selected: &BTreeSet<ErrorSymbolId>,
    reg: &Registry,
) -> Result<ZVector<AffineForm>> {
    check_registry(v.registry(), reg)?;
    if selected.is_empty() {
        return Ok(v.clone());
    }
    let entries = v
        .iter()
        .map(|f| {
            let mut radius = 0.0;
            let mut kept = Vec::new();
            for (s, g) in f.generators() {
                if selected.contains(&s) {
                    radius += g.abs();
                } else {
                    kept.push((s, g));
                }
            }
            kept.push((reg.fresh_symbol(), radius));
            AffineForm::from_generators(reg.tag(), f.center(), kept)
        })
        .collect();
    Ok(ZVector::new(entries))
}

/// Transformed interval hull: `A^-1 * IH(A * v)`.
pub fn tih_reduce(
    a: &DMatrix<f64>,
    v: &ZVector<AffineForm>,
    selected: &BTreeSet<ErrorSymbolId>,
    reg: &Registry,
) -> Result<ZVector<AffineForm>> {
    if a.nrows() != a.ncols() || a.nrows() != v.len() {
        return Err(Error::ShapeMismatch {
            expected: format!("{0}x{0} transform", v.len()),
            found: format!("{}x{}", a.nrows(), a.ncols()),
        });
    }
    let cond = linalg::condition_number(a);
    if !(cond <= MAX_TRANSFORM_CONDITION) {
        return Err(Error::IllConditioned(cond));
    }
    let a_inv = linalg::inverse(a, "TIH transformation")?;
    let projected = v.to_poly().transform(a)?.try_into_affine()?;
    let boxed = interval_hull(&projected, selected, reg)?;
    boxed.into_poly().transform(&a_inv)?.try_into_affine()
}
