//! Hand-derived one-dimensional cases. With x = [1, 2] and lambda = 0.5,
//! ridge reduces to w = x.y / (x.x + lambda n).

use nalgebra::{DMatrix, DVector};
use serde::Deserialize;
use zonoridge::dataset::AbstractDataset;
use zonoridge::inference::predict_interval;
use zonoridge::learning::{fixed_point, AbstractWeights, AbstractWeightsRecord, RidgeConfig};

#[derive(Deserialize)]
struct LabelCase {
    x: Vec<f64>,
    y: Vec<f64>,
    label_half_width: Vec<f64>,
    lambda: f64,
    w_r: f64,
    w_d_coefficient: f64,
    w_interval: (f64, f64),
    predict_at: f64,
    prediction: (f64, f64),
}

#[derive(Deserialize)]
struct FeatureCase {
    x: Vec<f64>,
    y: Vec<f64>,
    feature_half_width: Vec<f64>,
    lambda: f64,
    w_at_minus_one: f64,
    w_at_plus_one: f64,
}

#[derive(Deserialize)]
struct Cases {
    label_1d: LabelCase,
    feature_1d: FeatureCase,
}

fn cases() -> Cases {
    serde_json::from_str(include_str!("golden/hand_cases.json")).unwrap()
}

fn close(a: f64, b: f64) -> bool {
    (a - b).abs() <= 1e-12 * (1.0 + b.abs())
}

#[test]
fn label_case_matches_hand_values() {
    let c = cases().label_1d;
    let mut b = AbstractDataset::builder(DMatrix::from_column_slice(2, 1, &c.x), DVector::from_vec(c.y.clone()));
    for (i, &h) in c.label_half_width.iter().enumerate() {
        if h > 0.0 {
            b = b.label_cell(i, h);
        }
    }
    let ds = b.build();
    let (w, _) = fixed_point(&ds, &RidgeConfig::new(c.lambda)).unwrap();
    assert!(close(w.w_r[0], c.w_r));
    assert_eq!(w.k[0], 0.0);
    let iv = w.interval_box().0[0];
    assert!(close(iv.lo, c.w_interval.0) && close(iv.hi, c.w_interval.1), "{iv:?}");
    let p = predict_interval(&[c.predict_at], &w).unwrap();
    assert!(close(p.lo, c.prediction.0) && close(p.hi, c.prediction.1), "{p:?}");

    let rec: AbstractWeightsRecord = serde_json::from_str(&w.to_json(&ds, None).unwrap()).unwrap();
    assert_eq!(rec.w_d[0].len(), 1);
    assert!(close(rec.w_d[0][0].coef.abs(), c.w_d_coefficient));
    let back = AbstractWeights::from_record(&rec, &ds).unwrap();
    assert_eq!(back.w_r, w.w_r);
}

#[test]
fn feature_case_contains_hand_extremes() {
    let c = cases().feature_1d;
    let mut b = AbstractDataset::builder(DMatrix::from_column_slice(2, 1, &c.x), DVector::from_vec(c.y.clone()));
    for (i, &h) in c.feature_half_width.iter().enumerate() {
        if h > 0.0 {
            b = b.feature_cell(i, 0, h);
        }
    }
    let ds = b.build();
    let (w, diag) = fixed_point(&ds, &RidgeConfig::new(c.lambda)).unwrap();
    assert!(!diag.joined);
    assert!(w.k[0] > 0.0);
    let s = ds.data_symbols()[0];
    for (e, want) in [(-1.0, c.w_at_minus_one), (1.0, c.w_at_plus_one)] {
        let world = [(s, e)].into_iter().collect::<std::collections::BTreeMap<_, _>>();
        assert!(w.contains(&world, &DVector::from_element(1, want)));
        assert!(!w.contains(&world, &DVector::from_element(1, want + 0.5)));
    }
    let iv = w.interval_box().0[0];
    assert!(iv.lo <= c.w_at_plus_one && c.w_at_minus_one <= iv.hi);
}
