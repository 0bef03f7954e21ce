//! Polynomial and affine forms over error symbols.
//!
//! A [`PolyForm`] is `c + sum_k coef_k * monomial_k` where every monomial is a
//! product of error symbols ranging over `[-1, 1]`. Addition, scaling and
//! multiplication are exact: evaluating the result at any assignment equals
//! combining the evaluated operands.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use super::interval::Interval;
use super::registry::{Assignment, ErrorSymbolId};
use crate::{Error, Result};

/// Coefficients with magnitude below this are dropped after every operation.
pub const PRUNE_EPS: f64 = 1e-14;

/// Sorted multiset of error symbols; `e1*e1` is the degree-2 monomial `e1^2`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Monomial(Vec<ErrorSymbolId>);

impl Monomial {
    pub fn new(mut factors: Vec<ErrorSymbolId>) -> Self {
        assert!(!factors.is_empty(), "constant monomials live in the center");
        factors.sort_unstable();
        Monomial(factors)
    }

    pub fn symbol(s: ErrorSymbolId) -> Self {
        Monomial(vec![s])
    }

    pub fn degree(&self) -> usize {
        self.0.len()
    }

    pub fn factors(&self) -> &[ErrorSymbolId] {
        &self.0
    }

    /// The single symbol of a degree-1 monomial.
    pub fn as_symbol(&self) -> Option<ErrorSymbolId> {
        match self.0.as_slice() {
            [s] => Some(*s),
            _ => None,
        }
    }

    pub fn contains_data_only(&self) -> bool {
        self.0.iter().all(|s| s.is_data())
    }

    pub fn product(&self, other: &Monomial) -> Monomial {
        let mut f = Vec::with_capacity(self.0.len() + other.0.len());
        f.extend_from_slice(&self.0);
        f.extend_from_slice(&other.0);
        Monomial::new(f)
    }

    pub fn evaluate(&self, e: &impl Assignment) -> f64 {
        self.0.iter().map(|&s| e.value(s)).product()
    }
}

// Graded order: lower degree first, then lexicographic by symbol id.
impl Ord for Monomial {
    fn cmp(&self, other: &Self) -> Ordering {
        self.degree().cmp(&other.degree()).then_with(|| self.0.cmp(&other.0))
    }
}

impl PartialOrd for Monomial {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for Monomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, s) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str("*")?;
            }
            write!(f, "{s}")?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct PolyForm {
    registry: Option<u64>,
    center: f64,
    terms: BTreeMap<Monomial, f64>,
}

impl PolyForm {
    pub fn constant(c: f64) -> Self {
        PolyForm {
            registry: None,
            center: c,
            terms: BTreeMap::new(),
        }
    }

    pub fn zero() -> Self {
        Self::constant(0.0)
    }

    /// `center + coef * symbol`.
    pub fn affine(registry: u64, center: f64, symbol: ErrorSymbolId, coef: f64) -> Self {
        let mut f = PolyForm {
            registry: Some(registry),
            center,
            terms: BTreeMap::new(),
        };
        f.add_term(Monomial::symbol(symbol), coef);
        f.prune();
        f
    }

    /// Builds a form from raw terms; duplicate monomials are summed.
    pub fn from_terms(registry: u64, center: f64, terms: impl IntoIterator<Item = (Monomial, f64)>) -> Self {
        let mut f = PolyForm {
            registry: Some(registry),
            center,
            terms: BTreeMap::new(),
        };
        for (m, c) in terms {
            f.add_term(m, c);
        }
        f.prune();
        f
    }

    pub fn registry(&self) -> Option<u64> {
        self.registry
    }

    pub fn center(&self) -> f64 {
        self.center
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Monomial, f64)> {
        self.terms.iter().map(|(m, &c)| (m, c))
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn coefficient(&self, m: &Monomial) -> f64 {
        self.terms.get(m).copied().unwrap_or(0.0)
    }

    pub fn linear_coefficient(&self, s: ErrorSymbolId) -> f64 {
        self.coefficient(&Monomial::symbol(s))
    }

    pub fn is_constant(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn degree(&self) -> usize {
        self.terms.keys().map(Monomial::degree).max().unwrap_or(0)
    }

    pub fn is_linear(&self) -> bool {
        self.degree() <= 1
    }

    /// Sum of absolute coefficients of all non-constant monomials.
    pub fn abs_coefficient_sum(&self) -> f64 {
        self.terms.values().map(|c| c.abs()).sum()
    }

    /// Same form with the constant part removed.
    pub fn symbolic_part(&self) -> PolyForm {
        PolyForm {
            center: 0.0,
            ..self.clone()
        }
    }

    pub fn with_center(&self, center: f64) -> PolyForm {
        PolyForm { center, ..self.clone() }
    }

    pub fn evaluate(&self, e: &impl Assignment) -> f64 {
        self.center + self.terms.iter().map(|(m, c)| c * m.evaluate(e)).sum::<f64>()
    }

    /// `[c - sum |g|, c + sum |g|]` for a linear form.
    pub fn interval_of_linear(&self) -> Result<Interval> {
        let deg = self.degree();
        if deg > 1 {
            return Err(Error::NotLinear(deg));
        }
        Ok(self.magnitude_interval())
    }

    /// `center +- sum |coef|`; sound for any degree since every monomial of
    /// symbols in `[-1, 1]` lies in `[-1, 1]`.
    pub fn magnitude_interval(&self) -> Interval {
        let r = self.abs_coefficient_sum();
        Interval::new(self.center - r, self.center + r)
    }

    pub fn scale(&self, s: f64) -> PolyForm {
        let mut out = PolyForm {
            registry: self.registry,
            center: self.center * s,
            terms: self.terms.iter().map(|(m, c)| (m.clone(), c * s)).collect(),
        };
        out.prune();
        out
    }

    pub fn shift(&self, s: f64) -> PolyForm {
        PolyForm {
            center: self.center + s,
            ..self.clone()
        }
    }

    pub fn checked_add(&self, other: &PolyForm) -> Result<PolyForm> {
        let registry = merge_registry(self.registry, other.registry)?;
        let mut out = self.clone();
        out.registry = registry;
        out.center += other.center;
        for (m, &c) in &other.terms {
            out.add_term(m.clone(), c);
        }
        out.prune();
        Ok(out)
    }

    pub fn checked_mul(&self, other: &PolyForm) -> Result<PolyForm> {
        let registry = merge_registry(self.registry, other.registry)?;
        let mut out = PolyForm {
            registry,
            center: self.center * other.center,
            terms: BTreeMap::new(),
        };
        if other.center != 0.0 {
            for (m, &c) in &self.terms {
                out.add_term(m.clone(), c * other.center);
            }
        }
        if self.center != 0.0 {
            for (m, &c) in &other.terms {
                out.add_term(m.clone(), c * self.center);
            }
        }
        for (ma, &ca) in &self.terms {
            for (mb, &cb) in &other.terms {
                out.add_term(ma.product(mb), ca * cb);
            }
        }
        out.prune();
        Ok(out)
    }

    /// `self += s * other`, the accumulation used by dot products.
    pub fn add_scaled(&mut self, other: &PolyForm, s: f64) {
        self.registry = merge_registry(self.registry, other.registry).expect("forms from different registries");
        self.center += s * other.center;
        for (m, &c) in &other.terms {
            self.add_term(m.clone(), s * c);
        }
        self.prune();
    }

    pub(crate) fn add_term(&mut self, m: Monomial, c: f64) {
        *self.terms.entry(m).or_insert(0.0) += c;
    }

    pub(crate) fn prune(&mut self) {
        self.terms.retain(|_, c| c.abs() >= PRUNE_EPS);
    }
}

fn merge_registry(a: Option<u64>, b: Option<u64>) -> Result<Option<u64>> {
    match (a, b) {
        (Some(x), Some(y)) if x != y => Err(Error::RegistryMismatch(x, y)),
        (Some(x), _) | (None, Some(x)) => Ok(Some(x)),
        (None, None) => Ok(None),
    }
}

/// Exact sum of two forms.
pub fn add_forms(a: &PolyForm, b: &PolyForm) -> Result<PolyForm> {
    a.checked_add(b)
}

/// Exact product of two forms.
pub fn mul_forms(a: &PolyForm, b: &PolyForm) -> Result<PolyForm> {
    a.checked_mul(b)
}

// Operator impls panic on registry mismatch, like nalgebra does on shape
// mismatch; the checked_* methods are the fallible entry points.
impl Add for &PolyForm {
    type Output = PolyForm;
    fn add(self, rhs: &PolyForm) -> PolyForm {
        self.checked_add(rhs).expect("forms from different registries")
    }
}

impl Sub for &PolyForm {
    type Output = PolyForm;
    fn sub(self, rhs: &PolyForm) -> PolyForm {
        let mut out = self.clone();
        out.add_scaled(rhs, -1.0);
        out
    }
}

impl Mul for &PolyForm {
    type Output = PolyForm;
    fn mul(self, rhs: &PolyForm) -> PolyForm {
        self.checked_mul(rhs).expect("forms from different registries")
    }
}

impl Neg for &PolyForm {
    type Output = PolyForm;
    fn neg(self) -> PolyForm {
        self.scale(-1.0)
    }
}

impl From<f64> for PolyForm {
    fn from(c: f64) -> Self {
        PolyForm::constant(c)
    }
}

/// Canonical text: `c + k1*e<id> + k2*e<id>*e<id>`, monomials in graded order.
impl fmt::Display for PolyForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.center)?;
        for (m, c) in &self.terms {
            write!(f, " + {c}*{m}")?;
        }
        Ok(())
    }
}

/// A [`PolyForm`] whose monomials all have degree exactly one.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct AffineForm(PolyForm);

impl AffineForm {
    pub fn constant(c: f64) -> Self {
        AffineForm(PolyForm::constant(c))
    }

    pub fn from_generators(
        registry: u64,
        center: f64,
        generators: impl IntoIterator<Item = (ErrorSymbolId, f64)>,
    ) -> Self {
        AffineForm(PolyForm::from_terms(
            registry,
            center,
            generators.into_iter().map(|(s, c)| (Monomial::symbol(s), c)),
        ))
    }

    pub fn as_poly(&self) -> &PolyForm {
        &self.0
    }

    pub fn into_poly(self) -> PolyForm {
        self.0
    }

    pub fn center(&self) -> f64 {
        self.0.center
    }

    /// `(symbol, coefficient)` pairs in symbol order.
    pub fn generators(&self) -> impl Iterator<Item = (ErrorSymbolId, f64)> + '_ {
        self.0
            .terms
            .iter()
            .map(|(m, &c)| (m.as_symbol().expect("affine form"), c))
    }

    pub fn coefficient(&self, s: ErrorSymbolId) -> f64 {
        self.0.linear_coefficient(s)
    }

    pub fn radius(&self) -> f64 {
        self.0.abs_coefficient_sum()
    }

    pub fn interval(&self) -> Interval {
        self.0.magnitude_interval()
    }

    pub fn evaluate(&self, e: &impl Assignment) -> f64 {
        self.0.evaluate(e)
    }
}

impl TryFrom<PolyForm> for AffineForm {
    type Error = Error;
    fn try_from(p: PolyForm) -> Result<Self> {
        let deg = p.degree();
        if deg > 1 {
            Err(Error::NotLinear(deg))
        } else {
            Ok(AffineForm(p))
        }
    }
}

impl From<AffineForm> for PolyForm {
    fn from(a: AffineForm) -> Self {
        a.0
    }
}

impl AsRef<PolyForm> for AffineForm {
    fn as_ref(&self) -> &PolyForm {
        &self.0
    }
}

impl AsRef<PolyForm> for PolyForm {
    fn as_ref(&self) -> &PolyForm {
        self
    }
}

impl fmt::Display for AffineForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

/// Interval of a linear form; errors on degree > 1.
pub fn interval_of(f: &PolyForm) -> Result<Interval> {
    f.interval_of_linear()
}
