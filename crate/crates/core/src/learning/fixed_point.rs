use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::closed_form::{closed_form_symbolic_data, ridge_closed_form_real};
use super::system::{build_non_data_system, build_transform, solve_non_data, NonDataSystem};
use super::verify::{verify_fixed_point_residual, ResidualReport};
use super::RidgeConfig;
use crate::dataset::AbstractDataset;
use crate::linalg::max_abs;
use crate::zonotope::split::split_part_count;
use crate::zonotope::{
    box_join, split_combinations, AffineForm, Assignment, ErrorSymbolId, IntervalBox, Registry, ZVector,
};
use crate::{Error, Result};

/// Weight zonotope `w_r + w_d + A^-1 diag(k) e'`.
#[derive(Debug, Clone)]
pub struct AbstractWeights {
    pub w_r: DVector<f64>,
    /// Affine in data symbols only, zero centers.
    pub w_d: ZVector<AffineForm>,
    /// Box half-extents along the rows of `A`.
    pub k: DVector<f64>,
    pub a: DMatrix<f64>,
    pub a_inv: DMatrix<f64>,
    pub fresh: Vec<ErrorSymbolId>,
    pub lambda: f64,
    pub tolerance: f64,
    registry: Arc<Registry>,
}

impl AbstractWeights {
    #[allow(clippy::too_many_arguments)]
    pub(crate) fn assemble(
        w_r: DVector<f64>,
        w_d: ZVector<AffineForm>,
        k: DVector<f64>,
        a: DMatrix<f64>,
        a_inv: DMatrix<f64>,
        lambda: f64,
        tolerance: f64,
        registry: Arc<Registry>,
    ) -> Self {
        let fresh = registry.fresh_symbols(k.len());
        AbstractWeights {
            w_r,
            w_d,
            k,
            a,
            a_inv,
            fresh,
            lambda,
            tolerance,
            registry,
        }
    }

    pub fn d(&self) -> usize {
        self.w_r.len()
    }

    pub fn registry(&self) -> &Arc<Registry> {
        &self.registry
    }

    /// The full weight zonotope as one affine vector.
    pub fn zonotope(&self) -> ZVector<AffineForm> {
        let tag = self.registry.tag();
        ZVector::new(
            (0..self.d())
                .map(|j| {
                    let mut gens: Vec<(ErrorSymbolId, f64)> = self.w_d[j].generators().collect();
                    gens.extend(
                        self.fresh
                            .iter()
                            .enumerate()
                            .map(|(i, &s)| (s, self.a_inv[(j, i)] * self.k[i])),
                    );
                    AffineForm::from_generators(tag, self.w_r[j] + self.w_d[j].center(), gens)
                })
                .collect(),
        )
    }

    pub fn interval_box(&self) -> IntervalBox {
        self.zonotope().interval_box()
    }

    /// Weights `w_r + w_d(e)` at the center of the box.
    pub fn data_weights(&self, e: &impl Assignment) -> DVector<f64> {
        &self.w_r + self.w_d.evaluate(e)
    }

    pub fn contains(&self, e: &impl Assignment, w_star: &DVector<f64>) -> bool {
        contains_world_weights(self, e, w_star)
    }
}

/// Joint membership: `|A (w* - w_r - w_d(e))|_i <= k_i` up to tolerance.
pub fn contains_world_weights(w: &AbstractWeights, e: &impl Assignment, w_star: &DVector<f64>) -> bool {
    if w_star.len() != w.d() {
        return false;
    }
    let r = &w.a * (w_star - w.data_weights(e));
    let tol = w.tolerance * (1.0 + max_abs(w_star.iter().copied()));
    r.iter().zip(w.k.iter()).all(|(ri, ki)| ri.abs() <= ki + tol)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FixedPointDiagnostics {
    pub beta: f64,
    pub lambda_used: f64,
    /// Number of dataset parts trained; 1 when no split was needed.
    pub splits_used: usize,
    /// Pieces per split symbol (`m`).
    pub split_factor: usize,
    pub m_matrix_margin: f64,
    pub residual: Option<ResidualReport>,
    /// True when parts were box-joined, which drops correlation with the data.
    pub joined: bool,
    /// Largest `beta` over the split parts.
    pub max_part_beta: Option<f64>,
}

struct Unsplit {
    weights: AbstractWeights,
    system: NonDataSystem,
}

fn fit_unsplit(ds: &AbstractDataset, cfg: &RidgeConfig) -> Result<Unsplit> {
    let lambda = cfg.lambda;
    let w_r = ridge_closed_form_real(&ds.x_r, &ds.y_r, lambda)?;
    let w_d = closed_form_symbolic_data(ds, lambda, &w_r)?;
    let (a, a_inv) = build_transform(&ds.x_r, cfg)?;
    let system = build_non_data_system(ds, &w_r, &w_d, &a, &a_inv)?;
    // Without feature uncertainty the residual `delta` is identically zero.
    let k = if system.is_homogeneous() && !ds.has_feature_uncertainty() {
        DVector::zeros(ds.d())
    } else {
        solve_non_data(&system, lambda, cfg.tolerance)?
    };
    let weights = AbstractWeights::assemble(w_r, w_d, k, a, a_inv, lambda, cfg.tolerance, ds.registry().clone());
    Ok(Unsplit { weights, system })
}

/// Abstract fixed point of gradient descent on `ds`, splitting the
/// uncertain feature cells when `lambda < beta`.
pub fn fixed_point(ds: &AbstractDataset, cfg: &RidgeConfig) -> Result<(AbstractWeights, FixedPointDiagnostics)> {
    if ds.n() == 0 {
        return Err(Error::EmptyData);
    }
    if cfg.lambda < 0.0 {
        return Err(Error::Config(format!("lambda {} is negative", cfg.lambda)));
    }
    match fit_unsplit(ds, cfg) {
        Ok(u) => {
            let residual = if cfg.verify_residual {
                Some(verify_fixed_point_residual(ds, &u.weights, cfg)?)
            } else {
                None
            };
            let diag = FixedPointDiagnostics {
                beta: u.system.beta,
                lambda_used: cfg.lambda,
                splits_used: 1,
                split_factor: 1,
                m_matrix_margin: u.system.m_matrix_margin(cfg.lambda),
                residual,
                joined: false,
                max_part_beta: None,
            };
            Ok((u.weights, diag))
        }
        Err(Error::LambdaTooSmall { beta, .. }) => fit_split(ds, cfg, beta),
        Err(e) => Err(e),
    }
}

fn fit_split(ds: &AbstractDataset, cfg: &RidgeConfig, beta: f64) -> Result<(AbstractWeights, FixedPointDiagnostics)> {
    let w_r = ridge_closed_form_real(&ds.x_r, &ds.y_r, cfg.lambda)?;
    let w_d = closed_form_symbolic_data(ds, cfg.lambda, &w_r)?;
    let (a, a_inv) = build_transform(&ds.x_r, cfg)?;
    let system = build_non_data_system(ds, &w_r, &w_d, &a, &a_inv)?;
    let symbols = ds.feature_symbols();
    let mut m = determine_num_splits(&system, cfg.lambda, ds)?;
    let part_cfg = RidgeConfig {
        verify_residual: false,
        ..cfg.clone()
    };
    loop {
        let count = split_part_count(m, symbols.len(), cfg.split_budget)?;
        let scale = 1.0 / m as f64;
        let parts: Vec<Result<Unsplit>> = split_combinations(m, symbols.len())
            .into_par_iter()
            .map(|offsets| {
                let changes: Vec<_> = symbols.iter().copied().zip(offsets).collect();
                fit_unsplit(&ds.rescale_symbols(&changes, scale), &part_cfg)
            })
            .collect();
        if parts.iter().any(|p| matches!(p, Err(Error::LambdaTooSmall { .. }))) {
            m += 1;
            continue;
        }
        let parts = parts.into_iter().collect::<Result<Vec<_>>>()?;
        let margin = parts
            .iter()
            .map(|p| p.system.m_matrix_margin(cfg.lambda))
            .fold(f64::INFINITY, f64::min);
        let zonotopes: Vec<_> = parts.iter().map(|p| p.weights.zonotope()).collect();
        let joined = box_join(&zonotopes, ds.registry())?;
        let d = ds.d();
        let center = DVector::from_iterator(d, joined.iter().map(AffineForm::center));
        let k = DVector::from_iterator(d, joined.iter().map(AffineForm::radius));
        let weights = AbstractWeights::assemble(
            center,
            ZVector::new(vec![AffineForm::constant(0.0); d]),
            k,
            DMatrix::identity(d, d),
            DMatrix::identity(d, d),
            cfg.lambda,
            cfg.tolerance,
            ds.registry().clone(),
        );
        let diag = FixedPointDiagnostics {
            beta,
            lambda_used: cfg.lambda,
            splits_used: count,
            split_factor: m,
            m_matrix_margin: margin,
            residual: None,
            joined: true,
            max_part_beta: Some(parts.iter().map(|p| p.system.beta).fold(f64::NEG_INFINITY, f64::max)),
        };
        return Ok((weights, diag));
    }
}

/// Pieces per uncertain feature symbol so that each part's `beta` is
/// predicted to fall to `lambda`.
///
/// Splitting by `m` scales every feature-symbol coefficient by `1/m`, so
/// each `c'_ij` shrinks at least by `1/m`. Row `i` is then dominant once
/// `d c'_max / m <= lambda n + q_ii - sum_{j != i} |q_ij|`.
pub fn determine_num_splits(sys: &NonDataSystem, lambda: f64, ds: &AbstractDataset) -> Result<usize> {
    if sys.beta <= lambda {
        return Ok(1);
    }
    let c_max = sys.c_prime_max();
    if c_max == 0.0 {
        return Ok(1);
    }
    let d = sys.q.nrows();
    let n = sys.n as f64;
    let slack = (0..d)
        .map(|i| lambda * n + sys.q[(i, i)] - (0..d).filter(|&j| j != i).map(|j| sys.q[(i, j)].abs()).sum::<f64>())
        .fold(f64::INFINITY, f64::min);
    if !(slack > 0.0) {
        return Err(Error::SplitInfeasible(format!(
            "the real part alone is not diagonally dominant (slack {slack:e})"
        )));
    }
    if ds.feature_symbols().is_empty() {
        return Err(Error::SplitInfeasible("no uncertain feature cells to split".into()));
    }
    let mu = slack / (d as f64 * c_max);
    Ok(((1.0 / mu).ceil() as usize).max(1))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::{inject_uncertainty, synthetic, UncertaintySpec, UncertaintyTarget};
    use crate::oracle::{ridge_concrete, sample_worlds};

    #[test]
    fn certain_data_is_a_point() {
        let d = synthetic(12, 2, 0.2, 5);
        let ds = AbstractDataset::certain(d.x.clone(), d.y.clone());
        let (w, diag) = fixed_point(&ds, &RidgeConfig::new(0.1)).unwrap();
        assert_eq!(w.k, DVector::zeros(3));
        assert!(w.w_d.iter().all(|f| f.generators().count() == 0));
        let exact = ridge_concrete(&d.x, &d.y, 0.1).unwrap();
        assert!((&w.w_r - &exact).amax() < 1e-12);
        assert_eq!(diag.splits_used, 1);
        assert!(contains_world_weights(&w, &std::collections::HashMap::new(), &exact));
        let mut off = exact.clone();
        off[0] += 1e-3;
        assert!(!w.contains(&std::collections::HashMap::new(), &off));
    }

    #[test]
    fn label_only_has_no_box() {
        let d = synthetic(15, 2, 0.5, 1);
        let ds = inject_uncertainty(&d, &UncertaintySpec::labels(0.3, 0.1, 2)).unwrap();
        let (w, diag) = fixed_point(&ds, &RidgeConfig::new(0.05)).unwrap();
        assert_eq!(w.k, DVector::zeros(3));
        let r = diag.residual.unwrap();
        assert!(r.passes(), "{r:?}");
        assert_eq!(r.box_diameter, 0.0);
    }

    #[test]
    fn feature_uncertain_worlds_are_contained() {
        let d = synthetic(10, 1, 0.5, 2);
        let spec = UncertaintySpec {
            target: UncertaintyTarget::Both(vec![1]),
            percentage: 0.3,
            radius: 0.1,
            seed: 4,
        };
        let ds = inject_uncertainty(&d, &spec).unwrap();
        let (w, diag) = fixed_point(&ds, &RidgeConfig::new(0.1)).unwrap();
        assert_eq!(diag.splits_used, 1);
        assert!(w.k.iter().any(|&k| k > 0.0));
        assert!(diag.residual.unwrap().passes());
        for (e, x, y) in sample_worlds(&ds, 200, 7) {
            let ws = ridge_concrete(&x, &y, 0.1).unwrap();
            assert!(w.contains(&e, &ws));
        }
        // far outside the box along the first axis
        let mut out = w.w_r.clone();
        let kmax = max_abs(w.k.iter().copied());
        out += w.a_inv.column(0) * (10.0 * kmax);
        assert!(!w.contains(&std::collections::BTreeMap::new(), &out));
    }

    #[test]
    fn large_radius_triggers_splitting() {
        // one feature, two rows, wide uncertainty on a small value
        let x = DMatrix::from_row_slice(2, 1, &[0.2, 1.0]);
        let ds = AbstractDataset::builder(x, DVector::from_vec(vec![1.0, 1.0]))
            .feature_cell(0, 0, 1.0)
            .build();
        let cfg = RidgeConfig::new(0.05);
        let w_r = ridge_closed_form_real(&ds.x_r, &ds.y_r, cfg.lambda).unwrap();
        let w_d = closed_form_symbolic_data(&ds, cfg.lambda, &w_r).unwrap();
        let (a, ai) = build_transform(&ds.x_r, &cfg).unwrap();
        let sys = build_non_data_system(&ds, &w_r, &w_d, &a, &ai).unwrap();
        assert!(sys.beta > cfg.lambda);
        let m = determine_num_splits(&sys, cfg.lambda, &ds).unwrap();
        assert!(m > 1);
        let (w, diag) = fixed_point(&ds, &cfg).unwrap();
        assert!(diag.joined && diag.split_factor >= m);
        let bx = w.interval_box();
        for (_, x, y) in sample_worlds(&ds, 300, 1) {
            let ws = ridge_concrete(&x, &y, cfg.lambda).unwrap();
            assert!(bx.contains_with_tol(ws.as_slice(), 1e-9));
        }
    }

    #[test]
    fn split_budget_is_enforced() {
        let x = DMatrix::from_row_slice(2, 1, &[0.2, 1.0]);
        let ds = AbstractDataset::builder(x, DVector::from_vec(vec![1.0, 1.0]))
            .feature_cell(0, 0, 1.0)
            .build();
        let cfg = RidgeConfig {
            split_budget: 1,
            ..RidgeConfig::new(0.05)
        };
        assert!(matches!(fixed_point(&ds, &cfg), Err(Error::SplitBudgetExceeded { .. })));
    }

    #[test]
    fn split_count_is_one_when_feasible() {
        let d = synthetic(10, 1, 0.5, 2);
        let ds = AbstractDataset::certain(d.x.clone(), d.y.clone());
        let cfg = RidgeConfig::new(0.1);
        let w_r = ridge_closed_form_real(&ds.x_r, &ds.y_r, cfg.lambda).unwrap();
        let w_d = closed_form_symbolic_data(&ds, cfg.lambda, &w_r).unwrap();
        let (a, ai) = build_transform(&ds.x_r, &cfg).unwrap();
        let sys = build_non_data_system(&ds, &w_r, &w_d, &a, &ai).unwrap();
        assert_eq!(determine_num_splits(&sys, cfg.lambda, &ds).unwrap(), 1);
    }
}
