//! Missing cells become intervals over a declared range; the abstract model
//! covers every imputation.

use std::collections::BTreeMap;
use std::path::Path;

use zonoridge::dataset::{abstract_missing, load_csv};
use zonoridge::inference::{direction_label, parameter_intervals};
use zonoridge::learning::{fixed_point, RidgeConfig};

fn main() -> zonoridge::Result<()> {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("examples/data/housing.csv");
    let data = load_csv(&path, "price", None)?;
    let missing = (0..data.n())
        .filter(|&i| data.x.row(i).iter().any(|v| v.is_nan()))
        .count();
    println!("{} rows, {missing} with a missing value", data.n());

    let ranges = BTreeMap::from([("age".to_string(), (1.0, 60.0))]);
    let ds = abstract_missing(&data, &ranges)?;
    let (w, diag) = fixed_point(&ds, &RidgeConfig::new(100.0))?;
    println!("beta = {:.3}, splits = {}", diag.beta, diag.splits_used);

    for p in parameter_intervals(&w).with_names(&data.columns).parameters {
        println!(
            "{:<6} [{:>8.4}, {:>8.4}]  {}",
            p.name.as_deref().unwrap_or("?"),
            p.lo,
            p.hi,
            direction_label(p.direction)
        );
    }
    Ok(())
}
