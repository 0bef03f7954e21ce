//! Splitting a zonotope into parts and joining parts back together.

use std::collections::BTreeSet;

use super::form::AffineForm;
use super::interval::Interval;
use super::reduce::check_registry;
use super::registry::{ErrorSymbolId, Registry};
use super::vector::ZVector;
use crate::{Error, Result};

/// Center offsets (in units of the original generator) of the `m` parts of
/// an `(m, i)`-split: `(-m + 2j - 1) / m` for `j = 1..=m`.
pub fn split_offsets(m: usize) -> Vec<f64> {
    let mf = m as f64;
    (1..=m).map(|j| (2.0 * j as f64 - 1.0 - mf) / mf).collect()
}

/// Number of parts a split into `m` pieces along `symbols` dimensions yields,
/// or an error when it exceeds `budget`.
pub fn split_part_count(m: usize, symbols: usize, budget: usize) -> Result<usize> {
    if m == 0 {
        return Err(Error::SplitInfeasible("split factor must be at least 1".into()));
    }
    let parts = (m as u128).checked_pow(symbols as u32).unwrap_or(u128::MAX);
    if parts > budget as u128 {
        return Err(Error::SplitBudgetExceeded { parts, budget });
    }
    Ok(parts as usize)
}

/// All offset combinations of a split along `s` symbols, in lexicographic
/// order of the per-symbol part index.
pub fn split_combinations(m: usize, s: usize) -> Vec<Vec<f64>> {
    let offsets = split_offsets(m);
    let mut out = vec![Vec::with_capacity(s)];
    for _ in 0..s {
        out = out
            .into_iter()
            .flat_map(|prefix| {
                offsets.iter().map(move |&o| {
                    let mut p = prefix.clone();
                    p.push(o);
                    p
                })
            })
            .collect();
    }
    out
}

/// Splits every data symbol of `v` into `m` equal pieces; the result has
/// `m^s` parts whose union is `v`.
pub fn mu_split(v: &ZVector<AffineForm>, m: usize, budget: usize) -> Result<Vec<ZVector<AffineForm>>> {
    let symbols: Vec<ErrorSymbolId> = v.symbols().into_iter().filter(|s| s.is_data()).collect();
    split_part_count(m, symbols.len(), budget)?;
    let scale = 1.0 / m as f64;
    Ok(split_combinations(m, symbols.len())
        .into_iter()
        .map(|offsets| {
            ZVector::new(
                v.iter()
                    .map(|f| {
                        let mut center = f.center();
                        let gens: Vec<_> = f
                            .generators()
                            .map(|(s, g)| match symbols.binary_search(&s) {
                                Ok(k) => {
                                    center += offsets[k] * g;
                                    (s, g * scale)
                                }
                                Err(_) => (s, g),
                            })
                            .collect();
                        match f.as_poly().registry() {
                            Some(tag) => AffineForm::from_generators(tag, center, gens),
                            None => AffineForm::constant(center),
                        }
                    })
                    .collect(),
            )
        })
        .collect())
}

/// Per-dimension interval union of all parts, as a box zonotope with one
/// fresh symbol per dimension.
pub fn box_join(parts: &[ZVector<AffineForm>], reg: &Registry) -> Result<ZVector<AffineForm>> {
    let first = parts.first().ok_or(Error::EmptyJoin)?;
    let d = first.len();
    let mut hull: Vec<Interval> = first.interval_box().0;
    for p in &parts[1..] {
        check_registry(p.registry(), reg)?;
        if p.len() != d {
            return Err(Error::ShapeMismatch {
                expected: d.to_string(),
                found: p.len().to_string(),
            });
        }
        for (h, iv) in hull.iter_mut().zip(p.interval_box().0) {
            *h = h.hull(&iv);
        }
    }
    Ok(ZVector::new(
        hull.iter()
            .map(|iv| AffineForm::from_generators(reg.tag(), iv.mid(), [(reg.fresh_symbol(), iv.radius())]))
            .collect(),
    ))
}

/// Symbols of `v` that a split would act on.
pub fn split_symbols(v: &ZVector<AffineForm>) -> BTreeSet<ErrorSymbolId> {
    v.symbols().into_iter().filter(|s| s.is_data()).collect()
}
