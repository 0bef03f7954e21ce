mod common;

use proptest::prelude::*;
use zonoridge::inference::{loss_interval, predict_interval, LossFormula};
use zonoridge::learning::{fixed_point, RidgeConfig};
use zonoridge::oracle::{concrete_loss, ridge_concrete, sample_worlds};
use zonoridge::Error;

/// Fits `ds`, discarding cases that would exceed the split budget.
macro_rules! fit {
    ($ds:expr, $lambda:expr) => {
        match fixed_point(&$ds, &RidgeConfig::new($lambda)) {
            Err(Error::SplitBudgetExceeded { .. } | Error::SplitInfeasible(_)) => {
                return Err(TestCaseError::reject("split budget"))
            }
            other => other.unwrap(),
        }
    };
}

fn tol(v: f64) -> f64 {
    1e-9 * (1.0 + v.abs())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn sampled_worlds_are_inside(seed in 0u64..1_000_000, labels_only in any::<bool>()) {
        let p = common::random_problem(seed, 8, labels_only);
        let (w, diag) = fit!(p.ds, p.lambda);
        let b = w.interval_box();
        let test_x = p.ds.x_r.clone();
        let preds: Vec<_> = (0..test_x.nrows())
            .map(|i| predict_interval(test_x.row(i).transpose().as_slice(), &w).unwrap())
            .collect();
        let loss = loss_interval(&test_x, &p.ds.y_r, &w, p.lambda, LossFormula::Ridge).unwrap();
        for (e, x, y) in sample_worlds(&p.ds, 64, seed) {
            let ws = ridge_concrete(&x, &y, p.lambda).unwrap();
            if diag.joined {
                prop_assert!(b.contains_with_tol(ws.as_slice(), 1e-9 * (1.0 + ws.amax())));
            } else {
                prop_assert!(w.contains(&e, &ws));
            }
            for (i, v) in (&test_x * &ws).iter().enumerate() {
                prop_assert!(preds[i].interval().contains_with_tol(*v, tol(*v)));
            }
            let l = concrete_loss(&test_x, &p.ds.y_r, &ws, p.lambda, LossFormula::Ridge);
            prop_assert!(loss.interval().contains_with_tol(l, tol(l)));
        }
    }

    #[test]
    fn label_only_has_zero_box(seed in 0u64..1_000_000) {
        let p = common::random_problem(seed, 12, true);
        let (w, diag) = fixed_point(&p.ds, &RidgeConfig::new(p.lambda)).unwrap();
        prop_assert!(w.k.iter().all(|&k| k == 0.0));
        prop_assert!(diag.residual.unwrap().passes());
    }

    #[test]
    fn training_is_deterministic(seed in 0u64..1_000_000) {
        let p = common::random_problem(seed, 6, false);
        let cfg = RidgeConfig::new(p.lambda);
        let (a, _) = fit!(p.ds, p.lambda);
        let (b, _) = fixed_point(&p.ds, &cfg).unwrap();
        prop_assert_eq!(a.w_r, b.w_r);
        prop_assert_eq!(a.k, b.k);
    }

    #[test]
    fn wider_uncertainty_never_shrinks_predictions(seed in 0u64..1_000_000) {
        let p = common::random_problem(seed, 6, true);
        let narrow = p.ds.scale_uncertainty(0.5);
        let (w, _) = fixed_point(&p.ds, &RidgeConfig::new(p.lambda)).unwrap();
        let (wn, _) = fixed_point(&narrow, &RidgeConfig::new(p.lambda)).unwrap();
        for i in 0..p.ds.n() {
            let x = p.ds.x_r.row(i).transpose();
            let wide = predict_interval(x.as_slice(), &w).unwrap().interval();
            let small = predict_interval(x.as_slice(), &wn).unwrap().interval();
            prop_assert!(wide.lo <= small.lo + 1e-12 && small.hi <= wide.hi + 1e-12);
        }
    }
}
