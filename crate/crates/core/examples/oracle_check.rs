//! Soundness check against concrete training: every enumerated or sampled
//! world's ridge solution must lie in the abstract weights, and a box shrunk
//! by half must not.

use zonoridge::dataset::{inject_uncertainty, synthetic, UncertaintySpec, UncertaintyTarget};
use zonoridge::learning::{fixed_point, RidgeConfig};
use zonoridge::oracle::{enumerate_worlds, ridge_concrete, sample_worlds, WorldStrategy};

fn main() -> zonoridge::Result<()> {
    let data = synthetic(30, 2, 1.0, 2);
    let spec = UncertaintySpec {
        target: UncertaintyTarget::Both(vec![1, 2]),
        percentage: 0.1,
        radius: 0.3,
        seed: 4,
    };
    let ds = inject_uncertainty(&data, &spec)?;
    let lambda = 1.0;
    let (w, _) = fixed_point(&ds, &RidgeConfig::new(lambda))?;
    let mut shrunk = w.clone();
    shrunk.k *= 0.5;

    let worlds: Vec<_> = enumerate_worlds(&ds, WorldStrategy::Corner, 1 << 12)?
        .chain(sample_worlds(&ds, 500, 9))
        .collect();
    let (mut missed, mut missed_shrunk) = (0, 0);
    for (e, x, y) in &worlds {
        let ws = ridge_concrete(x, y, lambda)?;
        missed += usize::from(!w.contains(e, &ws));
        missed_shrunk += usize::from(!shrunk.contains(e, &ws));
    }
    println!("{} uncertain cells, {} worlds", ds.data_symbols().len(), worlds.len());
    println!("outside the abstract weights: {missed}");
    println!("outside the half-size box:    {missed_shrunk}");
    assert_eq!(missed, 0);
    Ok(())
}
