//! Ground truth by possible-world enumeration or sampling, and the interval
//! arithmetic baseline for uncertain labels.
//!
//! Enumerated and sampled worlds are under-approximations: for feature
//! uncertainty the trained weights are rational in the symbols, so corners
//! and grid points need not be extremal.

use std::collections::BTreeMap;
use std::io::Write;

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dataset::AbstractDataset;
use crate::inference::LossFormula;
use crate::learning::ridge_closed_form_real;
use crate::linalg;
use crate::zonotope::{ErrorSymbolId, Interval};
use crate::{Error, Result};

pub const DEFAULT_WORLD_BUDGET: u128 = 1 << 16;

/// `(X^T X + lambda n I)^-1 X^T y` on concrete data.
pub fn ridge_concrete(x: &DMatrix<f64>, y: &DVector<f64>, lambda: f64) -> Result<DVector<f64>> {
    ridge_closed_form_real(x, y, lambda)
}

pub type SymbolValues = BTreeMap<ErrorSymbolId, f64>;

/// One possible world: symbol values and the materialized data.
pub type World = (SymbolValues, DMatrix<f64>, DVector<f64>);

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WorldStrategy {
    /// Every symbol at -1 or 1.
    Corner,
    /// Every symbol on `levels` evenly spaced points of `[-1, 1]`.
    Grid(usize),
    Uniform {
        count: usize,
        seed: u64,
    },
}

fn levels(strategy: WorldStrategy) -> Vec<f64> {
    match strategy {
        WorldStrategy::Corner => vec![-1.0, 1.0],
        WorldStrategy::Grid(l) if l <= 1 => vec![0.0],
        WorldStrategy::Grid(l) => (0..l).map(|i| -1.0 + 2.0 * i as f64 / (l - 1) as f64).collect(),
        WorldStrategy::Uniform { .. } => unreachable!("uniform worlds are sampled"),
    }
}

/// Number of worlds `strategy` produces for `symbols` data symbols.
pub fn world_count(strategy: WorldStrategy, symbols: usize) -> u128 {
    match strategy {
        WorldStrategy::Uniform { count, .. } => count as u128,
        s => (levels(s).len() as u128)
            .checked_pow(symbols as u32)
            .unwrap_or(u128::MAX),
    }
}

/// Symbol assignments of `strategy` in lexicographic order, lazily.
pub fn assignments(
    symbols: Vec<ErrorSymbolId>,
    strategy: WorldStrategy,
    budget: u128,
) -> Result<Box<dyn Iterator<Item = SymbolValues> + Send>> {
    let worlds = world_count(strategy, symbols.len());
    if worlds > budget {
        return Err(Error::EnumerationBudgetExceeded { worlds, budget });
    }
    match strategy {
        WorldStrategy::Uniform { count, seed } => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            Ok(Box::new((0..count).map(move |_| {
                symbols.iter().map(|&s| (s, rng.random_range(-1.0..=1.0))).collect()
            })))
        }
        s => {
            let lv = levels(s);
            let base = lv.len() as u128;
            Ok(Box::new((0..worlds).map(move |mut idx| {
                let mut out = SymbolValues::new();
                for &s in symbols.iter().rev() {
                    out.insert(s, lv[(idx % base) as usize]);
                    idx /= base;
                }
                out
            })))
        }
    }
}

/// Materialized worlds of `ds`, lazily.
pub fn enumerate_worlds<'a>(
    ds: &'a AbstractDataset,
    strategy: WorldStrategy,
    budget: u128,
) -> Result<impl Iterator<Item = World> + 'a> {
    Ok(assignments(ds.data_symbols(), strategy, budget)?.map(move |e| {
        let (x, y) = ds.materialize(&e);
        (e, x, y)
    }))
}

/// `count` uniformly sampled worlds.
pub fn sample_worlds(ds: &AbstractDataset, count: usize, seed: u64) -> Vec<World> {
    enumerate_worlds(ds, WorldStrategy::Uniform { count, seed }, u128::MAX)
        .expect("sampling has no budget")
        .collect()
}

/// Ranges observed over a set of worlds.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WorldOracleResult {
    pub strategy: WorldStrategy,
    pub worlds: usize,
    /// Trained weights of every world, in enumeration order.
    pub weights: Vec<Vec<f64>>,
    pub weight_ranges: Vec<Interval>,
    pub prediction_ranges: Vec<Interval>,
    pub loss_range: Interval,
}

impl WorldOracleResult {
    /// One row per quantity: `kind,index,lo,hi`.
    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut out = csv::Writer::from_writer(w);
        out.write_record(["kind", "index", "lo", "hi"])?;
        let rows = self
            .weight_ranges
            .iter()
            .enumerate()
            .map(|(i, iv)| ("weight", i, iv))
            .chain(
                self.prediction_ranges
                    .iter()
                    .enumerate()
                    .map(|(i, iv)| ("prediction", i, iv)),
            )
            .chain(std::iter::once(("loss", 0, &self.loss_range)));
        for (kind, i, iv) in rows {
            out.write_record([kind.to_string(), i.to_string(), iv.lo.to_string(), iv.hi.to_string()])?;
        }
        out.flush().map_err(csv::Error::from)?;
        Ok(())
    }
}

/// Loss of weights `w` on concrete test data.
pub fn concrete_loss(x: &DMatrix<f64>, y: &DVector<f64>, w: &DVector<f64>, lambda: f64, formula: LossFormula) -> f64 {
    let r = x * w - y;
    let mse = r.dot(&r) / x.nrows() as f64;
    match formula {
        LossFormula::Mse => mse,
        LossFormula::Ridge => mse + lambda * w.dot(w),
    }
}

struct Extremes {
    weights: Vec<Interval>,
    predictions: Vec<Interval>,
    loss: Interval,
}

impl Extremes {
    fn point(w: &DVector<f64>, preds: &DVector<f64>, loss: f64) -> Self {
        Extremes {
            weights: w.iter().map(|&v| Interval::point(v)).collect(),
            predictions: preds.iter().map(|&v| Interval::point(v)).collect(),
            loss: Interval::point(loss),
        }
    }

    fn merge(self, other: Extremes) -> Extremes {
        let hull = |a: Vec<Interval>, b: Vec<Interval>| a.iter().zip(&b).map(|(x, y)| x.hull(y)).collect();
        Extremes {
            weights: hull(self.weights, other.weights),
            predictions: hull(self.predictions, other.predictions),
            loss: self.loss.hull(&other.loss),
        }
    }
}

/// Trains ridge on every world of `strategy` and records weight, prediction
/// and loss extremes on the test set.
pub fn oracle_ranges(
    ds: &AbstractDataset,
    lambda: f64,
    test_x: &DMatrix<f64>,
    test_y: &DVector<f64>,
    strategy: WorldStrategy,
    budget: u128,
    formula: LossFormula,
) -> Result<WorldOracleResult> {
    if test_x.ncols() != ds.d() || test_x.nrows() != test_y.len() {
        return Err(Error::ShapeMismatch {
            expected: format!("test matrix with {} columns and matching labels", ds.d()),
            found: format!("{}x{} and {} labels", test_x.nrows(), test_x.ncols(), test_y.len()),
        });
    }
    let worlds: Vec<SymbolValues> = assignments(ds.data_symbols(), strategy, budget)?.collect();
    if worlds.is_empty() {
        return Err(Error::EmptyData);
    }
    let trained: Vec<DVector<f64>> = worlds
        .par_iter()
        .map(|e| {
            let (x, y) = ds.materialize(e);
            ridge_concrete(&x, &y, lambda)
        })
        .collect::<Result<_>>()?;
    let ext = trained
        .par_iter()
        .map(|w| Extremes::point(w, &(test_x * w), concrete_loss(test_x, test_y, w, lambda, formula)))
        .reduce_with(Extremes::merge)
        .expect("at least one world");
    Ok(WorldOracleResult {
        strategy,
        worlds: trained.len(),
        weights: trained.iter().map(|w| w.iter().copied().collect()).collect(),
        weight_ranges: ext.weights,
        prediction_ranges: ext.predictions,
        loss_range: ext.loss,
    })
}

/// Weight intervals of the label-interval baseline.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IntervalRidge {
    pub weights: Vec<Interval>,
}

impl IntervalRidge {
    /// Interval dot product, ignoring correlation between the weights.
    pub fn predict(&self, x: &[f64]) -> Interval {
        x.iter()
            .zip(&self.weights)
            .fold(Interval::point(0.0), |acc, (&xi, w)| acc.add(&w.scale(xi)))
    }
}

/// Ridge with interval labels by plain interval arithmetic: weight `j` is
/// `sum_i M_ji [y_i]` with `M = (X^T X + lambda n I)^-1 X^T`.
pub fn interval_ridge_labels(x: &DMatrix<f64>, y: &[Interval], lambda: f64) -> Result<IntervalRidge> {
    if x.nrows() != y.len() {
        return Err(Error::ShapeMismatch {
            expected: format!("{} label intervals", x.nrows()),
            found: y.len().to_string(),
        });
    }
    let m = linalg::solve(
        &linalg::regularized_gram(x, lambda),
        &x.transpose(),
        "regularized Gram matrix",
    )?;
    Ok(IntervalRidge {
        weights: (0..x.ncols())
            .map(|j| {
                y.iter()
                    .enumerate()
                    .fold(Interval::point(0.0), |acc, (i, yi)| acc.add(&yi.scale(m[(j, i)])))
            })
            .collect(),
    })
}

/// Label intervals of a dataset with certain features.
pub fn label_intervals(ds: &AbstractDataset) -> Result<Vec<Interval>> {
    if ds.has_feature_uncertainty() {
        return Err(Error::InvalidUncertainty(
            "the interval baseline needs certain features".into(),
        ));
    }
    Ok(ds
        .y_s
        .iter()
        .zip(ds.y_r.iter())
        .map(|(f, &c)| f.magnitude_interval().add(&Interval::point(c)))
        .collect())
}
