//! Prediction ranges, robustness certificates, loss ranges and parameter
//! bounds derived from a weight zonotope.

use std::collections::BTreeMap;
use std::io::Write;

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::learning::AbstractWeights;
use crate::zonotope::{linearize, AffineForm, ErrorSymbolId, Interval, Monomial, PolyForm, ZVector};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PredictionMethod {
    Zonotope,
    IntervalBaseline,
    OracleUnder,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PredictionInterval {
    pub lo: f64,
    pub hi: f64,
    pub method: PredictionMethod,
}

impl PredictionInterval {
    pub fn new(iv: Interval, method: PredictionMethod) -> Self {
        PredictionInterval {
            lo: iv.lo,
            hi: iv.hi,
            method,
        }
    }

    pub fn interval(&self) -> Interval {
        Interval::new(self.lo, self.hi)
    }

    pub fn width(&self) -> f64 {
        self.hi - self.lo
    }
}

fn check_dim(expected: usize, found: usize) -> Result<()> {
    if expected != found {
        return Err(Error::ShapeMismatch {
            expected: format!("{expected} features"),
            found: found.to_string(),
        });
    }
    Ok(())
}

/// Range of `x^T w` over the weight zonotope.
pub fn predict_interval(x: &[f64], w: &AbstractWeights) -> Result<PredictionInterval> {
    check_dim(w.d(), x.len())?;
    let form = w.zonotope().to_poly().dot_real(&DVector::from_column_slice(x))?;
    Ok(PredictionInterval::new(
        form.interval_of_linear()?,
        PredictionMethod::Zonotope,
    ))
}

/// Range of `x^T w` when the test point is itself uncertain. The product is
/// exact, then linearized.
pub fn predict_interval_uncertain(x: &ZVector<AffineForm>, w: &AbstractWeights) -> Result<PredictionInterval> {
    check_dim(w.d(), x.len())?;
    let prod = x.to_poly().dot(&w.zonotope().to_poly())?;
    let lin = linearize(&ZVector::new(vec![prod]), w.registry())?;
    Ok(PredictionInterval::new(lin[0].interval(), PredictionMethod::Zonotope))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PointRobustness {
    pub interval: PredictionInterval,
    pub robust: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RobustnessReport {
    /// Absolute width threshold.
    pub threshold: f64,
    pub per_point: Vec<PointRobustness>,
    pub ratio: f64,
}

impl RobustnessReport {
    /// A point is robust when its full interval width is below `threshold`.
    pub fn from_intervals(intervals: Vec<PredictionInterval>, threshold: f64) -> Result<Self> {
        if intervals.is_empty() {
            return Err(Error::EmptyData);
        }
        if !(threshold > 0.0) {
            return Err(Error::Config(format!("threshold {threshold} must be positive")));
        }
        let per_point: Vec<PointRobustness> = intervals
            .into_iter()
            .map(|interval| PointRobustness {
                robust: interval.width() < threshold,
                interval,
            })
            .collect();
        let ratio = per_point.iter().filter(|p| p.robust).count() as f64 / per_point.len() as f64;
        Ok(RobustnessReport {
            threshold,
            per_point,
            ratio,
        })
    }

    /// Plot-ready rows: `index,lo,hi,width,robust`.
    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut out = csv::Writer::from_writer(w);
        out.write_record(["index", "lo", "hi", "width", "robust"])?;
        for (i, p) in self.per_point.iter().enumerate() {
            out.write_record([
                i.to_string(),
                p.interval.lo.to_string(),
                p.interval.hi.to_string(),
                p.interval.width().to_string(),
                p.robust.to_string(),
            ])?;
        }
        out.flush().map_err(csv::Error::from)?;
        Ok(())
    }
}

/// Absolute threshold from a fraction of the label range.
pub fn threshold_from_fraction(fraction: f64, label_range: f64) -> f64 {
    fraction * label_range
}

pub fn certify_robustness(test_x: &DMatrix<f64>, w: &AbstractWeights, threshold: f64) -> Result<RobustnessReport> {
    if test_x.nrows() == 0 {
        return Err(Error::EmptyData);
    }
    check_dim(w.d(), test_x.ncols())?;
    let z = w.zonotope().to_poly();
    let intervals = (0..test_x.nrows())
        .into_par_iter()
        .map(|i| {
            let x: DVector<f64> = test_x.row(i).transpose();
            let iv = z.dot_real(&x)?.interval_of_linear()?;
            Ok(PredictionInterval::new(iv, PredictionMethod::Zonotope))
        })
        .collect::<Result<Vec<_>>>()?;
    RobustnessReport::from_intervals(intervals, threshold)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LossFormula {
    /// `(1/n) |X w - y|^2`
    Mse,
    /// `(1/n) |X w - y|^2 + lambda |w|^2`
    Ridge,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LossInterval {
    pub lo: f64,
    pub hi: f64,
    pub formula: LossFormula,
}

impl LossInterval {
    pub fn interval(&self) -> Interval {
        Interval::new(self.lo, self.hi)
    }
}

/// Exact quadratic loss over the weight zonotope as a degree-2 form.
///
/// With `w = c + G e`, the residual is `r = (X c - y) + X G e`, so the form
/// is assembled from `|X c - y|^2`, `X^T (X c - y)` and `G^T X^T X G`.
pub fn loss_form(
    test_x: &DMatrix<f64>,
    test_y: &DVector<f64>,
    w: &AbstractWeights,
    lambda: f64,
    formula: LossFormula,
) -> Result<PolyForm> {
    check_dim(w.d(), test_x.ncols())?;
    if test_x.nrows() != test_y.len() {
        return Err(Error::ShapeMismatch {
            expected: format!("{} test labels", test_x.nrows()),
            found: test_y.len().to_string(),
        });
    }
    if test_x.nrows() == 0 {
        return Err(Error::EmptyData);
    }
    let z = w.zonotope();
    let d = w.d();
    let symbols: Vec<ErrorSymbolId> = z.symbols().into_iter().collect();
    let s = symbols.len();
    let c = DVector::from_iterator(d, z.iter().map(AffineForm::center));
    let g = DMatrix::from_fn(d, s, |j, a| z[j].coefficient(symbols[a]));

    let inv_n = 1.0 / test_x.nrows() as f64;
    let r0 = test_x * &c - test_y;
    let mut quad = (test_x.transpose() * test_x) * inv_n;
    let mut center = r0.dot(&r0) * inv_n;
    let mut lin = 2.0 * inv_n * (test_x.transpose() * &r0);
    if formula == LossFormula::Ridge {
        quad += DMatrix::identity(d, d) * lambda;
        center += lambda * c.dot(&c);
        lin += 2.0 * lambda * &c;
    }
    let lin_e = g.transpose() * lin;
    let quad_e = g.transpose() * quad * &g;

    let mut terms: BTreeMap<Monomial, f64> = BTreeMap::new();
    for a in 0..s {
        terms.insert(Monomial::symbol(symbols[a]), lin_e[a]);
        terms.insert(Monomial::new(vec![symbols[a], symbols[a]]), quad_e[(a, a)]);
        for b in a + 1..s {
            terms.insert(
                Monomial::new(vec![symbols[a], symbols[b]]),
                quad_e[(a, b)] + quad_e[(b, a)],
            );
        }
    }
    Ok(PolyForm::from_terms(w.registry().tag(), center, terms))
}

/// Loss range over the weight zonotope on certain test data.
///
/// Both formulas are sums of squares of affine forms plus a nonnegative
/// multiple of `|w|^2`, so the lower end is clamped at zero.
pub fn loss_interval(
    test_x: &DMatrix<f64>,
    test_y: &DVector<f64>,
    w: &AbstractWeights,
    lambda: f64,
    formula: LossFormula,
) -> Result<LossInterval> {
    let form = loss_form(test_x, test_y, w, lambda, formula)?;
    let iv = linearize(&ZVector::new(vec![form]), w.registry())?[0].interval();
    Ok(LossInterval {
        lo: iv.lo.max(0.0),
        hi: iv.hi,
        formula,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Direction {
    Positive,
    Negative,
    Zero,
    /// The interval spans both signs.
    Inconclusive,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParameterInterval {
    pub index: usize,
    pub name: Option<String>,
    pub lo: f64,
    pub hi: f64,
    pub direction: Direction,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParameterIntervals {
    pub parameters: Vec<ParameterInterval>,
}

impl ParameterIntervals {
    pub fn with_names(mut self, names: &[String]) -> Self {
        for (p, n) in self.parameters.iter_mut().zip(names) {
            p.name = Some(n.clone());
        }
        self
    }

    pub fn intervals(&self) -> Vec<Interval> {
        self.parameters.iter().map(|p| Interval::new(p.lo, p.hi)).collect()
    }

    /// Rows: `index,name,lo,hi,direction`.
    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut out = csv::Writer::from_writer(w);
        out.write_record(["index", "name", "lo", "hi", "direction"])?;
        for p in &self.parameters {
            out.write_record([
                p.index.to_string(),
                p.name.clone().unwrap_or_default(),
                p.lo.to_string(),
                p.hi.to_string(),
                direction_label(p.direction).to_string(),
            ])?;
        }
        out.flush().map_err(csv::Error::from)?;
        Ok(())
    }
}

pub fn direction_label(d: Direction) -> &'static str {
    match d {
        Direction::Positive => "positive",
        Direction::Negative => "negative",
        Direction::Zero => "zero",
        Direction::Inconclusive => "inconclusive direction",
    }
}

fn direction_of(iv: &Interval) -> Direction {
    if iv.lo > 0.0 {
        Direction::Positive
    } else if iv.hi < 0.0 {
        Direction::Negative
    } else if iv.lo == 0.0 && iv.hi == 0.0 {
        Direction::Zero
    } else {
        Direction::Inconclusive
    }
}

pub fn parameter_intervals(w: &AbstractWeights) -> ParameterIntervals {
    ParameterIntervals {
        parameters: w
            .interval_box()
            .0
            .into_iter()
            .enumerate()
            .map(|(index, iv)| ParameterInterval {
                index,
                name: None,
                lo: iv.lo,
                hi: iv.hi,
                direction: direction_of(&iv),
            })
            .collect(),
    }
}
