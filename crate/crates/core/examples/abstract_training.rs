//! Train once over every possible world of a small uncertain dataset and
//! check a few worlds against the result.

use nalgebra::{dmatrix, dvector};
use zonoridge::dataset::AbstractDataset;
use zonoridge::learning::{fixed_point, RidgeConfig};
use zonoridge::oracle::{ridge_concrete, sample_worlds};

fn main() -> zonoridge::Result<()> {
    // Bias column first.
    let x = dmatrix![
        1.0, 0.5, 1.2;
        1.0, 1.5, 0.3;
        1.0, 2.0, 2.2;
        1.0, 3.1, 0.9;
        1.0, 4.0, 1.7
    ];
    let y = dvector![1.1, 2.0, 3.4, 3.9, 5.2];
    let ds = AbstractDataset::builder(x, y)
        .label_interval(0, 0.9, 1.3)
        .feature_cell(2, 1, 0.1)
        .feature_interval(4, 2, 1.5, 1.9)
        .build();

    let (w, diag) = fixed_point(&ds, &RidgeConfig::new(0.5))?;
    println!("beta = {:.4}, splits = {}", diag.beta, diag.splits_used);
    println!("w_r = {:.4?}", w.w_r.as_slice());
    println!("k   = {:.4?}", w.k.as_slice());
    for (j, iv) in w.interval_box().0.iter().enumerate() {
        println!("w[{j}] in [{:.4}, {:.4}]", iv.lo, iv.hi);
    }
    if let Some(r) = &diag.residual {
        println!(
            "residual: phi_r {:.1e}, phi_d {:.1e}, box {:.1e}",
            r.phi_r, r.phi_d, r.box_diameter
        );
    }

    for (e, xw, yw) in sample_worlds(&ds, 200, 1) {
        let ws = ridge_concrete(&xw, &yw, 0.5)?;
        assert!(w.contains(&e, &ws));
    }
    println!("200 sampled worlds contained");
    Ok(())
}
