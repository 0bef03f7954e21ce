use std::collections::BTreeSet;
use std::fmt;

use nalgebra::{DMatrix, DVector};
use num_rational::Ratio;

use super::form::{AffineForm, Monomial, PolyForm};
use super::interval::IntervalBox;
use super::registry::{Assignment, ErrorSymbolId};
use crate::{Error, Result};

/// A vector of symbolic forms; a zonotope when the entries are affine.
#[derive(Debug, Clone, PartialEq)]
pub struct ZVector<F = PolyForm> {
    entries: Vec<F>,
}

impl<F> ZVector<F> {
    pub fn new(entries: Vec<F>) -> Self {
        ZVector { entries }
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn entries(&self) -> &[F] {
        &self.entries
    }

    pub fn into_entries(self) -> Vec<F> {
        self.entries
    }

    pub fn iter(&self) -> std::slice::Iter<'_, F> {
        self.entries.iter()
    }
}

impl<F> std::ops::Index<usize> for ZVector<F> {
    type Output = F;
    fn index(&self, i: usize) -> &F {
        &self.entries[i]
    }
}

impl<F: AsRef<PolyForm>> ZVector<F> {
    /// Distinct non-constant monomials across all entries, divided by the
    /// dimension.
    pub fn order(&self) -> Ratio<usize> {
        if self.entries.is_empty() {
            return Ratio::from_integer(0);
        }
        Ratio::new(self.distinct_monomials().len(), self.entries.len())
    }

    pub fn distinct_monomials(&self) -> BTreeSet<Monomial> {
        self.entries
            .iter()
            .flat_map(|f| f.as_ref().terms().map(|(m, _)| m.clone()))
            .collect()
    }

    pub fn symbols(&self) -> BTreeSet<ErrorSymbolId> {
        self.entries
            .iter()
            .flat_map(|f| {
                f.as_ref()
                    .terms()
                    .flat_map(|(m, _)| m.factors().to_vec())
                    .collect::<Vec<_>>()
            })
            .collect()
    }

    pub fn centers(&self) -> DVector<f64> {
        DVector::from_iterator(self.len(), self.entries.iter().map(|f| f.as_ref().center()))
    }

    pub fn evaluate(&self, e: &impl Assignment) -> DVector<f64> {
        DVector::from_iterator(self.len(), self.entries.iter().map(|f| f.as_ref().evaluate(e)))
    }

    /// Per-entry `center +- sum |coef|`.
    pub fn magnitude_box(&self) -> IntervalBox {
        IntervalBox(self.entries.iter().map(|f| f.as_ref().magnitude_interval()).collect())
    }

    pub fn to_poly(&self) -> ZVector<PolyForm> {
        ZVector::new(self.entries.iter().map(|f| f.as_ref().clone()).collect())
    }

    pub fn registry(&self) -> Option<u64> {
        self.entries.iter().find_map(|f| f.as_ref().registry())
    }
}

impl ZVector<PolyForm> {
    pub fn from_reals(v: &DVector<f64>) -> Self {
        ZVector::new(v.iter().map(|&x| PolyForm::constant(x)).collect())
    }

    pub fn zeros(d: usize) -> Self {
        ZVector::new(vec![PolyForm::zero(); d])
    }

    pub fn try_into_affine(self) -> Result<ZVector<AffineForm>> {
        Ok(ZVector::new(
            self.entries
                .into_iter()
                .map(AffineForm::try_from)
                .collect::<Result<_>>()?,
        ))
    }

    pub fn checked_add(&self, other: &ZVector) -> Result<ZVector> {
        check_len(self.len(), other.len())?;
        Ok(ZVector::new(
            self.entries
                .iter()
                .zip(&other.entries)
                .map(|(a, b)| a.checked_add(b))
                .collect::<Result<_>>()?,
        ))
    }

    pub fn checked_sub(&self, other: &ZVector) -> Result<ZVector> {
        self.checked_add(&other.scale(-1.0))
    }

    pub fn scale(&self, s: f64) -> ZVector {
        ZVector::new(self.entries.iter().map(|f| f.scale(s)).collect())
    }

    /// `m * self` for a real matrix `m`.
    pub fn transform(&self, m: &DMatrix<f64>) -> Result<ZVector> {
        check_len(m.ncols(), self.len())?;
        Ok(ZVector::new(
            (0..m.nrows())
                .map(|i| {
                    let mut acc = PolyForm::zero();
                    for (j, f) in self.entries.iter().enumerate() {
                        let a = m[(i, j)];
                        if a != 0.0 {
                            acc.add_scaled(f, a);
                        }
                    }
                    acc
                })
                .collect(),
        ))
    }

    pub fn dot(&self, other: &ZVector) -> Result<PolyForm> {
        check_len(self.len(), other.len())?;
        let mut acc = PolyForm::zero();
        for (a, b) in self.entries.iter().zip(&other.entries) {
            acc = acc.checked_add(&a.checked_mul(b)?)?;
        }
        Ok(acc)
    }

    pub fn dot_real(&self, x: &DVector<f64>) -> Result<PolyForm> {
        check_len(self.len(), x.len())?;
        let mut acc = PolyForm::zero();
        for (f, &xi) in self.entries.iter().zip(x.iter()) {
            if xi != 0.0 {
                acc.add_scaled(f, xi);
            }
        }
        Ok(acc)
    }
}

impl ZVector<AffineForm> {
    pub fn into_poly(self) -> ZVector<PolyForm> {
        ZVector::new(self.entries.into_iter().map(AffineForm::into_poly).collect())
    }

    /// Exact per-entry interval concretization.
    pub fn interval_box(&self) -> IntervalBox {
        IntervalBox(self.entries.iter().map(AffineForm::interval).collect())
    }
}

impl<F: fmt::Display> fmt::Display for ZVector<F> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("[")?;
        for (i, e) in self.entries.iter().enumerate() {
            if i > 0 {
                f.write_str(" ; ")?;
            }
            write!(f, "{e}")?;
        }
        f.write_str("]")
    }
}

/// Row-major matrix of polynomial forms.
#[derive(Debug, Clone, PartialEq)]
pub struct ZMatrix {
    nrows: usize,
    ncols: usize,
    entries: Vec<PolyForm>,
}

impl ZMatrix {
    pub fn zeros(nrows: usize, ncols: usize) -> Self {
        ZMatrix {
            nrows,
            ncols,
            entries: vec![PolyForm::zero(); nrows * ncols],
        }
    }

    pub fn from_reals(m: &DMatrix<f64>) -> Self {
        let mut out = Self::zeros(m.nrows(), m.ncols());
        for i in 0..m.nrows() {
            for j in 0..m.ncols() {
                out.entries[i * m.ncols() + j] = PolyForm::constant(m[(i, j)]);
            }
        }
        out
    }

    pub fn from_fn(nrows: usize, ncols: usize, mut f: impl FnMut(usize, usize) -> PolyForm) -> Self {
        let mut entries = Vec::with_capacity(nrows * ncols);
        for i in 0..nrows {
            for j in 0..ncols {
                entries.push(f(i, j));
            }
        }
        ZMatrix { nrows, ncols, entries }
    }

    pub fn nrows(&self) -> usize {
        self.nrows
    }

    pub fn ncols(&self) -> usize {
        self.ncols
    }

    pub fn get(&self, i: usize, j: usize) -> &PolyForm {
        &self.entries[i * self.ncols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, f: PolyForm) {
        self.entries[i * self.ncols + j] = f;
    }

    pub fn entries(&self) -> &[PolyForm] {
        &self.entries
    }

    pub fn row(&self, i: usize) -> ZVector {
        ZVector::new(self.entries[i * self.ncols..(i + 1) * self.ncols].to_vec())
    }

    pub fn transpose(&self) -> ZMatrix {
        ZMatrix::from_fn(self.ncols, self.nrows, |i, j| self.get(j, i).clone())
    }

    pub fn is_zero(&self) -> bool {
        self.entries.iter().all(|f| f.is_constant() && f.center() == 0.0)
    }

    pub fn checked_add(&self, other: &ZMatrix) -> Result<ZMatrix> {
        if (self.nrows, self.ncols) != (other.nrows, other.ncols) {
            return Err(shape_err((self.nrows, self.ncols), (other.nrows, other.ncols)));
        }
        Ok(ZMatrix {
            nrows: self.nrows,
            ncols: self.ncols,
            entries: self
                .entries
                .iter()
                .zip(&other.entries)
                .map(|(a, b)| a.checked_add(b))
                .collect::<Result<_>>()?,
        })
    }

    /// Exact product of two symbolic matrices.
    pub fn mat_mul(&self, other: &ZMatrix) -> Result<ZMatrix> {
        if self.ncols != other.nrows {
            return Err(shape_err((self.nrows, self.ncols), (other.nrows, other.ncols)));
        }
        let mut out = ZMatrix::zeros(self.nrows, other.ncols);
        for i in 0..self.nrows {
            for j in 0..other.ncols {
                let mut acc = PolyForm::zero();
                for k in 0..self.ncols {
                    let (a, b) = (self.get(i, k), other.get(k, j));
                    if a.is_constant() && a.center() == 0.0 || b.is_constant() && b.center() == 0.0 {
                        continue;
                    }
                    acc = acc.checked_add(&a.checked_mul(b)?)?;
                }
                out.set(i, j, acc);
            }
        }
        Ok(out)
    }

    pub fn mul_vec(&self, v: &ZVector) -> Result<ZVector> {
        check_len(self.ncols, v.len())?;
        (0..self.nrows)
            .map(|i| self.row(i).dot(v))
            .collect::<Result<Vec<_>>>()
            .map(ZVector::new)
    }

    /// `m * self` for a real matrix `m`.
    pub fn left_mul_real(&self, m: &DMatrix<f64>) -> Result<ZMatrix> {
        if m.ncols() != self.nrows {
            return Err(shape_err((m.nrows(), m.ncols()), (self.nrows, self.ncols)));
        }
        let mut out = ZMatrix::zeros(m.nrows(), self.ncols);
        for i in 0..m.nrows() {
            for j in 0..self.ncols {
                let mut acc = PolyForm::zero();
                for k in 0..self.nrows {
                    let a = m[(i, k)];
                    if a != 0.0 {
                        acc.add_scaled(self.get(k, j), a);
                    }
                }
                out.set(i, j, acc);
            }
        }
        Ok(out)
    }

    /// `self * m` for a real matrix `m`.
    pub fn right_mul_real(&self, m: &DMatrix<f64>) -> Result<ZMatrix> {
        Ok(self.transpose().left_mul_real(&m.transpose())?.transpose())
    }

    pub fn evaluate(&self, e: &impl Assignment) -> DMatrix<f64> {
        DMatrix::from_fn(self.nrows, self.ncols, |i, j| self.get(i, j).evaluate(e))
    }

    pub fn centers(&self) -> DMatrix<f64> {
        DMatrix::from_fn(self.nrows, self.ncols, |i, j| self.get(i, j).center())
    }
}

/// Exact symbolic matrix product.
pub fn mat_mul(a: &ZMatrix, b: &ZMatrix) -> Result<ZMatrix> {
    a.mat_mul(b)
}

fn check_len(expected: usize, found: usize) -> Result<()> {
    if expected != found {
        return Err(Error::ShapeMismatch {
            expected: expected.to_string(),
            found: found.to_string(),
        });
    }
    Ok(())
}

fn shape_err(a: (usize, usize), b: (usize, usize)) -> Error {
    Error::ShapeMismatch {
        expected: format!("{}x{} operand", a.0, a.1),
        found: format!("{}x{}", b.0, b.1),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::zonotope::registry::Registry;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::collections::HashMap;

    fn random_affine_matrix(
        reg: &Registry,
        syms: &[ErrorSymbolId],
        r: usize,
        c: usize,
        rng: &mut ChaCha8Rng,
    ) -> ZMatrix {
        ZMatrix::from_fn(r, c, |_, _| {
            PolyForm::from_terms(
                reg.tag(),
                rng.random_range(-1.0..1.0),
                syms.iter()
                    .map(|&s| (Monomial::symbol(s), rng.random_range(-1.0..1.0)))
                    .collect::<Vec<_>>(),
            )
        })
    }

    #[test]
    fn identity_times_b_is_b() {
        let reg = Registry::new();
        let syms: Vec<_> = (0..3).map(|_| reg.data_symbol()).collect();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let b = random_affine_matrix(&reg, &syms, 2, 3, &mut rng);
        let id = ZMatrix::from_reals(&DMatrix::identity(2, 2));
        assert_eq!(mat_mul(&id, &b).unwrap(), b);
    }

    #[test]
    fn one_by_one_is_scalar_product() {
        let reg = Registry::new();
        let e = reg.data_symbol();
        let a = PolyForm::affine(reg.tag(), 1.0, e, 2.0);
        let b = PolyForm::affine(reg.tag(), -1.0, e, 0.5);
        let ma = ZMatrix::from_fn(1, 1, |_, _| a.clone());
        let mb = ZMatrix::from_fn(1, 1, |_, _| b.clone());
        assert_eq!(mat_mul(&ma, &mb).unwrap().get(0, 0), &(&a * &b));
    }

    #[test]
    fn shape_mismatch_is_an_error() {
        let a = ZMatrix::zeros(2, 3);
        assert!(matches!(mat_mul(&a, &a), Err(Error::ShapeMismatch { .. })));
    }

    #[test]
    fn random_product_matches_entrywise_evaluation() {
        let reg = Registry::new();
        let syms: Vec<_> = (0..3).map(|_| reg.data_symbol()).collect();
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let a = random_affine_matrix(&reg, &syms, 2, 2, &mut rng);
        let b = random_affine_matrix(&reg, &syms, 2, 2, &mut rng);
        let p = mat_mul(&a, &b).unwrap();
        for _ in 0..1000 {
            let e: HashMap<_, _> = syms.iter().map(|&s| (s, rng.random_range(-1.0..=1.0))).collect();
            let want = a.evaluate(&e) * b.evaluate(&e);
            let got = p.evaluate(&e);
            assert!((&want - got).amax() < 1e-12 * (1.0 + want.amax()));
        }
    }

    #[test]
    fn order_counts_distinct_monomials() {
        let reg = Registry::new();
        let e1 = reg.data_symbol();
        let v = ZVector::new(vec![
            PolyForm::affine(reg.tag(), 0.0, e1, 1.0),
            PolyForm::affine(reg.tag(), 0.0, e1, 1.0),
        ]);
        assert_eq!(v.order(), Ratio::new(1, 2));
        assert_eq!(
            ZVector::from_reals(&DVector::from_vec(vec![1.0, 2.0])).order(),
            Ratio::from_integer(0)
        );
    }

    #[test]
    fn real_transform_matches_evaluation() {
        let reg = Registry::new();
        let syms: Vec<_> = (0..2).map(|_| reg.data_symbol()).collect();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let m = random_affine_matrix(&reg, &syms, 3, 1, &mut rng);
        let v = ZVector::new((0..3).map(|i| m.get(i, 0).clone()).collect());
        let a = DMatrix::from_fn(2, 3, |i, j| (i + 2 * j) as f64 - 1.5);
        let t = v.transform(&a).unwrap();
        let e: HashMap<_, _> = syms.iter().map(|&s| (s, 0.3)).collect();
        assert!((a * v.evaluate(&e) - t.evaluate(&e)).amax() < 1e-12);
    }
}
