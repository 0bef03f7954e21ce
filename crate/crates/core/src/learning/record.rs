//! JSON form of [`AbstractWeights`]. Data-symbol coefficients are keyed by
//! the cell they came from, so a record can be re-attached to the dataset.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::fixed_point::{AbstractWeights, FixedPointDiagnostics};
use crate::dataset::{AbstractDataset, Cell};
use crate::zonotope::{AffineForm, ZVector};
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DataCoefficient {
    pub cell: Cell,
    pub coef: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AbstractWeightsRecord {
    pub w_r: Vec<f64>,
    pub w_d: Vec<Vec<DataCoefficient>>,
    pub k: Vec<f64>,
    /// Row-major.
    pub a: Vec<Vec<f64>>,
    pub a_inv: Vec<Vec<f64>>,
    pub lambda: f64,
    pub tolerance: f64,
    pub diagnostics: Option<FixedPointDiagnostics>,
}

fn rows(m: &DMatrix<f64>) -> Vec<Vec<f64>> {
    m.row_iter().map(|r| r.iter().copied().collect()).collect()
}

fn from_rows(r: &[Vec<f64>], d: usize) -> Result<DMatrix<f64>> {
    if r.len() != d || r.iter().any(|row| row.len() != d) {
        return Err(Error::ShapeMismatch {
            expected: format!("{d}x{d} matrix"),
            found: format!("{} rows", r.len()),
        });
    }
    Ok(DMatrix::from_fn(d, d, |i, j| r[i][j]))
}

impl AbstractWeights {
    pub fn to_record(
        &self,
        ds: &AbstractDataset,
        diagnostics: Option<&FixedPointDiagnostics>,
    ) -> Result<AbstractWeightsRecord> {
        let w_d = self
            .w_d
            .iter()
            .map(|f| {
                f.generators()
                    .map(|(s, coef)| {
                        ds.provenance()
                            .get(&s)
                            .map(|&cell| DataCoefficient { cell, coef })
                            .ok_or_else(|| Error::UnknownProvenance(s.to_string()))
                    })
                    .collect::<Result<Vec<_>>>()
            })
            .collect::<Result<_>>()?;
        Ok(AbstractWeightsRecord {
            w_r: self.w_r.iter().copied().collect(),
            w_d,
            k: self.k.iter().copied().collect(),
            a: rows(&self.a),
            a_inv: rows(&self.a_inv),
            lambda: self.lambda,
            tolerance: self.tolerance,
            diagnostics: diagnostics.cloned(),
        })
    }

    /// Rebuilds the weights over `ds`'s data symbols; the box gets new fresh
    /// symbols.
    pub fn from_record(rec: &AbstractWeightsRecord, ds: &AbstractDataset) -> Result<AbstractWeights> {
        let d = rec.w_r.len();
        if rec.w_d.len() != d || rec.k.len() != d {
            return Err(Error::ShapeMismatch {
                expected: format!("{d} entries"),
                found: format!("{} data rows, {} box sizes", rec.w_d.len(), rec.k.len()),
            });
        }
        let tag = ds.registry().tag();
        let w_d = rec
            .w_d
            .iter()
            .map(|coefs| {
                let gens = coefs
                    .iter()
                    .map(|c| {
                        ds.symbol_for(c.cell)
                            .map(|s| (s, c.coef))
                            .ok_or_else(|| Error::UnknownProvenance(format!("{:?}", c.cell)))
                    })
                    .collect::<Result<Vec<_>>>()?;
                Ok(if gens.is_empty() {
                    AffineForm::constant(0.0)
                } else {
                    AffineForm::from_generators(tag, 0.0, gens)
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(AbstractWeights::assemble(
            DVector::from_vec(rec.w_r.clone()),
            ZVector::new(w_d),
            DVector::from_vec(rec.k.clone()),
            from_rows(&rec.a, d)?,
            from_rows(&rec.a_inv, d)?,
            rec.lambda,
            rec.tolerance,
            ds.registry().clone(),
        ))
    }

    pub fn to_json(&self, ds: &AbstractDataset, diagnostics: Option<&FixedPointDiagnostics>) -> Result<String> {
        Ok(serde_json::to_string_pretty(&self.to_record(ds, diagnostics)?)?)
    }

    pub fn from_json(json: &str, ds: &AbstractDataset) -> Result<AbstractWeights> {
        Self::from_record(&serde_json::from_str(json)?, ds)
    }
}

#[cfg(test)]
mod tests {
    use crate::dataset::{inject_uncertainty, synthetic, UncertaintySpec, UncertaintyTarget};
    use crate::learning::{fixed_point, AbstractWeights, AbstractWeightsRecord, RidgeConfig};

    #[test]
    fn json_round_trip_is_bit_exact() {
        let d = synthetic(12, 2, 0.7, 3);
        let spec = UncertaintySpec {
            target: UncertaintyTarget::Both(vec![2]),
            percentage: 0.25,
            radius: 0.07,
            seed: 5,
        };
        let ds = inject_uncertainty(&d, &spec).unwrap();
        let (w, diag) = fixed_point(&ds, &RidgeConfig::new(0.3)).unwrap();
        let json = w.to_json(&ds, Some(&diag)).unwrap();
        let back = AbstractWeights::from_json(&json, &ds).unwrap();
        let rec_a = w.to_record(&ds, Some(&diag)).unwrap();
        let rec_b = back.to_record(&ds, Some(&diag)).unwrap();
        assert_eq!(rec_a, rec_b);
        let parsed: AbstractWeightsRecord = serde_json::from_str(&json).unwrap();
        for (x, y) in parsed.w_r.iter().zip(w.w_r.iter()) {
            assert_eq!(x.to_bits(), y.to_bits());
        }
        for (fa, fb) in w.w_d.iter().zip(back.w_d.iter()) {
            for ((sa, ca), (sb, cb)) in fa.generators().zip(fb.generators()) {
                assert_eq!(sa, sb);
                assert_eq!(ca.to_bits(), cb.to_bits());
            }
        }
        assert_eq!(json, back.to_json(&ds, Some(&diag)).unwrap());
    }
}
