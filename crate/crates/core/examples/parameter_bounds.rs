//! Coefficient intervals: whether a feature's effect keeps its sign in every
//! possible world.

use zonoridge::dataset::{inject_uncertainty, synthetic, UncertaintySpec, UncertaintyTarget};
use zonoridge::inference::{direction_label, parameter_intervals};
use zonoridge::learning::{fixed_point, RidgeConfig};

fn main() -> zonoridge::Result<()> {
    let data = synthetic(50, 3, 2.0, 8);
    for radius in [0.01, 0.1, 0.4] {
        let spec = UncertaintySpec {
            target: UncertaintyTarget::Both(vec![2]),
            percentage: 0.2,
            radius,
            seed: 1,
        };
        let ds = inject_uncertainty(&data, &spec)?;
        let (w, _) = fixed_point(&ds, &RidgeConfig::new(1.0))?;
        println!("radius {radius}");
        for p in parameter_intervals(&w).with_names(&data.columns).parameters {
            println!(
                "  {:<5} [{:>8.4}, {:>8.4}]  {}",
                p.name.as_deref().unwrap_or("?"),
                p.lo,
                p.hi,
                direction_label(p.direction)
            );
        }
    }
    Ok(())
}
