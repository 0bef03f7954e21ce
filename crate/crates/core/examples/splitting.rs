//! When the regularization is too weak for one solve, the uncertain feature
//! cells are split into parts that are trained separately and joined.

use nalgebra::{dmatrix, dvector};
use zonoridge::dataset::AbstractDataset;
use zonoridge::learning::{fixed_point, RidgeConfig};
use zonoridge::oracle::{ridge_concrete, sample_worlds};

fn main() -> zonoridge::Result<()> {
    let ds = AbstractDataset::builder(dmatrix![0.2; 1.0], dvector![0.3, 1.1])
        .feature_cell(0, 0, 1.0)
        .build();
    let lambda = 0.05;
    let (w, diag) = fixed_point(&ds, &RidgeConfig::new(lambda))?;
    println!(
        "beta = {:.3} > lambda = {lambda}: {} parts (m = {}), joined = {}",
        diag.beta, diag.splits_used, diag.split_factor, diag.joined
    );
    let b = w.interval_box();
    println!("w in [{:.4}, {:.4}]", b.0[0].lo, b.0[0].hi);
    for (_, x, y) in sample_worlds(&ds, 1000, 0) {
        let ws = ridge_concrete(&x, &y, lambda)?;
        assert!(b.contains_with_tol(ws.as_slice(), 1e-9));
    }
    println!("1000 sampled worlds inside the joined box");
    Ok(())
}
