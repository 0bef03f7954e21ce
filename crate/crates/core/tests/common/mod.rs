#![allow(dead_code)]

use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use zonoridge::dataset::{domain_ranges, synthetic, AbstractDataset};

pub struct Problem {
    pub ds: AbstractDataset,
    pub lambda: f64,
    pub radius: f64,
}

/// Random synthetic problem: `n <= 50`, `d <= 4` including bias, at most
/// `max_cells` uncertain cells of half-width `radius * range / 2`.
pub fn random_problem(seed: u64, max_cells: usize, labels_only: bool) -> Problem {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = rng.random_range(8..=50);
    let features = rng.random_range(1..=3);
    let data = synthetic(n, features, rng.random_range(0.1..2.0), seed);
    let ranges = domain_ranges(&data);
    let radius = rng.random_range(0.01..=0.1);
    let lambda = rng.random_range(0.05..2.0);
    let cols = if labels_only { 1 } else { features + 1 };
    let cells = rng.random_range(1..=max_cells.min(n * cols));
    let mut b = AbstractDataset::builder(data.x.clone(), data.y.clone());
    for k in sample(&mut rng, n * cols, cells) {
        let (row, c) = (k / cols, k % cols);
        if c == 0 {
            b = b.label_cell(row, radius * ranges.label_range() / 2.0);
        } else {
            b = b.feature_cell(row, c, radius * ranges.column_range(c) / 2.0);
        }
    }
    Problem {
        ds: b.build(),
        lambda,
        radius,
    }
}
