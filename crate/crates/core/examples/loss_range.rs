//! Worst- and best-case test loss over all worlds, compared with the range
//! found by enumerating every corner world.

use zonoridge::dataset::{inject_uncertainty, synthetic, train_test_split, UncertaintySpec, UncertaintyTarget};
use zonoridge::inference::{loss_interval, LossFormula};
use zonoridge::learning::{fixed_point, RidgeConfig};
use zonoridge::oracle::{oracle_ranges, WorldStrategy, DEFAULT_WORLD_BUDGET};

fn main() -> zonoridge::Result<()> {
    let data = synthetic(40, 2, 1.0, 5);
    let (train, test) = train_test_split(&data, 0.8, 0)?;
    let lambda = 1.0;

    println!("radius  zonotope             corners              gap");
    for radius in [0.01, 0.02, 0.04, 0.08] {
        let spec = UncertaintySpec {
            target: UncertaintyTarget::Both(vec![1]),
            percentage: 0.15,
            radius,
            seed: 3,
        };
        let ds = inject_uncertainty(&train, &spec)?;
        let (w, _) = fixed_point(&ds, &RidgeConfig::new(lambda))?;
        let z = loss_interval(&test.x, &test.y, &w, lambda, LossFormula::Mse)?;
        let gt = oracle_ranges(
            &ds,
            lambda,
            &test.x,
            &test.y,
            WorldStrategy::Corner,
            DEFAULT_WORLD_BUDGET,
            LossFormula::Mse,
        )?;
        let g = gt.loss_range;
        assert!(z.lo <= g.lo + 1e-9 && g.hi <= z.hi + 1e-9);
        println!(
            "{radius:<7} [{:.3}, {:.3}]   [{:.3}, {:.3}]   {:.4}",
            z.lo,
            z.hi,
            g.lo,
            g.hi,
            (g.lo - z.lo) + (z.hi - g.hi)
        );
    }
    Ok(())
}
