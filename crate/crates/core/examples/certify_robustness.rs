//! Robustness ratio of test predictions under label uncertainty, next to the
//! interval-arithmetic baseline.

use zonoridge::dataset::{domain_ranges, inject_uncertainty, synthetic, train_test_split, UncertaintySpec};
use zonoridge::inference::{certify_robustness, threshold_from_fraction};
use zonoridge::learning::{fixed_point, RidgeConfig};
use zonoridge::oracle::{interval_ridge_labels, label_intervals};

fn main() -> zonoridge::Result<()> {
    let data = synthetic(80, 3, 1.0, 11);
    let (train, test) = train_test_split(&data, 0.8, 0)?;
    let threshold = threshold_from_fraction(0.05, domain_ranges(&data).label_range());
    let lambda = 0.1;

    println!("radius  zonotope  baseline");
    for radius in [0.0, 0.02, 0.05, 0.1, 0.2] {
        let ds = inject_uncertainty(&train, &UncertaintySpec::labels(0.1, radius, 0))?;
        let (w, _) = fixed_point(&ds, &RidgeConfig::new(lambda))?;
        let zono = certify_robustness(&test.x, &w, threshold)?;

        let base = interval_ridge_labels(&ds.x_r, &label_intervals(&ds)?, lambda)?;
        let robust = (0..test.n())
            .filter(|&i| base.predict(test.x.row(i).transpose().as_slice()).width() < threshold)
            .count();
        println!("{radius:<7} {:<9.3} {:.3}", zono.ratio, robust as f64 / test.n() as f64);
    }
    Ok(())
}
