use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;

use super::config::ExperimentConfig;
use super::report::{RunReport, Stats, Table, Value};
use crate::dataset::{abstract_missing, domain_ranges, inject_uncertainty, train_test_split, AbstractDataset, Dataset};
use crate::inference::{
    certify_robustness, direction_label, loss_interval, parameter_intervals, predict_interval, LossFormula,
    PredictionInterval, PredictionMethod, RobustnessReport,
};
use crate::learning::{fixed_point, AbstractWeights, FixedPointDiagnostics};
use crate::oracle::{
    assignments, concrete_loss, interval_ridge_labels, label_intervals, oracle_ranges, ridge_concrete, world_count,
    WorldStrategy,
};
use crate::zonotope::Interval;
use crate::{Error, Result};

/// Command-line values that replace config entries.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub radius: Option<f64>,
    pub percentage: Option<f64>,
    pub lambda: Option<f64>,
    pub threshold: Option<f64>,
}

impl ExperimentConfig {
    /// A single value on the command line replaces the matching sweep grid.
    pub fn apply(&mut self, o: &Overrides) {
        if let Some(s) = o.seed {
            self.seeds = vec![s];
        }
        if let Some(r) = o.radius {
            self.uncertainty.radius = r;
            self.sweep.radius.clear();
        }
        if let Some(p) = o.percentage {
            self.uncertainty.percentage = p;
            self.sweep.percentage.clear();
        }
        if let Some(l) = o.lambda {
            self.ridge.lambda = l;
            self.sweep.lambda.clear();
        }
        if let Some(t) = o.threshold {
            self.threshold = t;
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
struct Trial {
    seed: u64,
    radius: f64,
    percentage: f64,
    lambda: f64,
}

struct Prepared {
    train: AbstractDataset,
    test_x: DMatrix<f64>,
    test_y: DVector<f64>,
    label_range: f64,
    warnings: Vec<String>,
}

fn complete_rows(d: &Dataset) -> Dataset {
    let keep: Vec<usize> = (0..d.n())
        .filter(|&i| !d.y[i].is_nan() && d.x.row(i).iter().all(|v| !v.is_nan()))
        .collect();
    d.rows(&keep)
}

fn prepare(cfg: &ExperimentConfig, data: &Dataset, t: &Trial, split: bool) -> Result<Prepared> {
    let mut warnings = Vec::new();
    let (train, test) = if split {
        train_test_split(data, cfg.split_ratio, t.seed)?
    } else {
        (data.clone(), data.clone())
    };
    let test = {
        let kept = complete_rows(&test);
        if split && kept.n() < test.n() {
            warnings.push(format!(
                "seed {}: dropped {} test rows with missing values",
                t.seed,
                test.n() - kept.n()
            ));
        }
        kept
    };
    if test.n() == 0 {
        return Err(Error::EmptyData);
    }
    let abstract_train = if train.has_missing() {
        abstract_missing(&train, &cfg.data.missing)?
    } else {
        inject_uncertainty(&train, &cfg.uncertainty_spec(data, t.radius, t.percentage, t.seed)?)?
    };
    Ok(Prepared {
        train: abstract_train,
        test_x: test.x,
        test_y: test.y,
        label_range: domain_ranges(data).label_range(),
        warnings,
    })
}

const DIAG_COLUMNS: [&str; 6] = ["beta", "splits", "m_margin", "phi_r", "phi_d", "box_residual"];

fn diag_values(d: &FixedPointDiagnostics) -> Vec<Value> {
    let r = d.residual.as_ref();
    vec![
        d.beta.into(),
        d.splits_used.into(),
        d.m_matrix_margin.into(),
        r.map(|r| r.phi_r).into(),
        r.map(|r| r.phi_d).into(),
        r.map(|r| r.box_diameter).into(),
    ]
}

fn columns(head: &[&'static str]) -> Vec<&'static str> {
    head.iter().copied().chain(DIAG_COLUMNS).collect()
}

fn trials(cfg: &ExperimentConfig, radii: &[f64], percentages: &[f64], lambdas: &[f64]) -> Vec<Trial> {
    let mut out = Vec::new();
    for &lambda in lambdas {
        for &radius in radii {
            for &percentage in percentages {
                for &seed in &cfg.seeds {
                    out.push(Trial {
                        seed,
                        radius,
                        percentage,
                        lambda,
                    });
                }
            }
        }
    }
    out
}

fn start(cfg: &ExperimentConfig) -> Result<Dataset> {
    cfg.validate()?;
    cfg.load_dataset()
}

struct TrialOutput {
    trial: Trial,
    row: Vec<Value>,
    warnings: Vec<String>,
    failures: usize,
}

fn run_trials(
    trials: Vec<Trial>,
    f: impl Fn(&Trial) -> Result<(Vec<Value>, Vec<String>, usize)> + Sync,
) -> Result<Vec<TrialOutput>> {
    trials
        .into_par_iter()
        .map(|trial| {
            let (row, warnings, failures) = f(&trial)?;
            Ok(TrialOutput {
                trial,
                row,
                warnings,
                failures,
            })
        })
        .collect()
}

/// Aggregates the named metrics over seeds, one summary row per grid point.
fn summarize(outputs: &[TrialOutput], rows: &Table, metrics: &[&str]) -> Table {
    let mut head = vec![
        "radius".to_string(),
        "percentage".to_string(),
        "lambda".to_string(),
        "seeds".to_string(),
    ];
    for m in metrics {
        head.extend([format!("{m}_mean"), format!("{m}_std"), format!("{m}_3sigma")]);
    }
    let mut table = Table {
        columns: head,
        rows: Vec::new(),
    };
    let mut keys: Vec<(f64, f64, f64)> = Vec::new();
    for o in outputs {
        let k = (o.trial.radius, o.trial.percentage, o.trial.lambda);
        if !keys.contains(&k) {
            keys.push(k);
        }
    }
    for key in keys {
        let idx: Vec<usize> = outputs
            .iter()
            .enumerate()
            .filter(|(_, o)| (o.trial.radius, o.trial.percentage, o.trial.lambda) == key)
            .map(|(i, _)| i)
            .collect();
        let mut row: Vec<Value> = vec![key.0.into(), key.1.into(), key.2.into(), idx.len().into()];
        for m in metrics {
            let c = rows.column(m).expect("metric column");
            let vals: Vec<f64> = idx.iter().filter_map(|&i| rows.rows[i][c].as_f64()).collect();
            if vals.is_empty() {
                row.extend([Value::Empty, Value::Empty, Value::Empty]);
            } else {
                let s = Stats::of(&vals);
                row.extend([s.mean.into(), s.std.into(), s.three_sigma.into()]);
            }
        }
        table.rows.push(row);
    }
    table
}

fn finish(command: &str, cfg: &ExperimentConfig, rows: Table, summary: Table, outputs: &[TrialOutput]) -> RunReport {
    RunReport {
        command: command.to_string(),
        config: cfg.clone(),
        rows,
        summary,
        warnings: outputs.iter().flat_map(|o| o.warnings.iter().cloned()).collect(),
        failures: outputs.iter().map(|o| o.failures).sum(),
    }
}

fn mean_width(r: &RobustnessReport) -> f64 {
    r.per_point.iter().map(|p| p.interval.width()).sum::<f64>() / r.per_point.len() as f64
}

/// Robustness ratio of the zonotope weights, plus the interval baseline when
/// only labels are uncertain.
pub fn cmd_certify(cfg: &ExperimentConfig) -> Result<RunReport> {
    let data = start(cfg)?;
    let head = columns(&[
        "seed",
        "radius",
        "percentage",
        "lambda",
        "threshold",
        "ratio",
        "baseline_ratio",
        "mean_width",
        "baseline_mean_width",
    ]);
    let list = trials(cfg, &cfg.radius_grid(), &cfg.percentage_grid(), &[cfg.ridge.lambda]);
    let outputs = run_trials(list, |t| {
        let p = prepare(cfg, &data, t, true)?;
        let threshold = cfg.threshold * p.label_range;
        let (w, diag) = fixed_point(&p.train, &cfg.ridge_config(t.lambda))?;
        let zono = certify_robustness(&p.test_x, &w, threshold)?;
        let baseline = if p.train.has_feature_uncertainty() {
            None
        } else {
            let b = interval_ridge_labels(&p.train.x_r, &label_intervals(&p.train)?, t.lambda)?;
            let ivs = (0..p.test_x.nrows())
                .map(|i| {
                    PredictionInterval::new(
                        b.predict(p.test_x.row(i).transpose().as_slice()),
                        PredictionMethod::IntervalBaseline,
                    )
                })
                .collect();
            Some(RobustnessReport::from_intervals(ivs, threshold)?)
        };
        let mut row: Vec<Value> = vec![
            t.seed.into(),
            t.radius.into(),
            t.percentage.into(),
            t.lambda.into(),
            threshold.into(),
            zono.ratio.into(),
            baseline.as_ref().map(|b| b.ratio).into(),
            mean_width(&zono).into(),
            baseline.as_ref().map(mean_width).into(),
        ];
        row.extend(diag_values(&diag));
        Ok((row, p.warnings, 0))
    })?;
    let mut rows = Table::new(&head);
    for o in &outputs {
        rows.push(o.row.clone());
    }
    let summary = summarize(&outputs, &rows, &["ratio", "baseline_ratio"]);
    Ok(finish("certify", cfg, rows, summary, &outputs))
}

fn within(outer: &Interval, inner: &Interval) -> bool {
    let tol = 1e-9 * (1.0 + outer.lo.abs().max(outer.hi.abs()));
    inner.lo >= outer.lo - tol && inner.hi <= outer.hi + tol
}

/// Zonotope test-loss range against enumerated and sampled worlds.
pub fn cmd_loss_range(cfg: &ExperimentConfig) -> Result<RunReport> {
    let data = start(cfg)?;
    let head = columns(&[
        "seed",
        "radius",
        "percentage",
        "lambda",
        "loss_lo",
        "loss_hi",
        "gt_method",
        "gt_worlds",
        "gt_lo",
        "gt_hi",
        "sample_lo",
        "sample_hi",
        "contained",
        "gap",
    ]);
    let list = trials(cfg, &cfg.radius_grid(), &cfg.percentage_grid(), &[cfg.ridge.lambda]);
    let outputs = run_trials(list, |t| {
        let mut p = prepare(cfg, &data, t, true)?;
        let (w, diag) = fixed_point(&p.train, &cfg.ridge_config(t.lambda))?;
        let zono = loss_interval(&p.test_x, &p.test_y, &w, t.lambda, LossFormula::Mse)?.interval();
        let strategy = cfg.oracle.world_strategy();
        let budget = cfg.oracle.budget as u128;
        let gt = match oracle_ranges(
            &p.train,
            t.lambda,
            &p.test_x,
            &p.test_y,
            strategy,
            budget,
            LossFormula::Mse,
        ) {
            Err(Error::EnumerationBudgetExceeded { worlds, .. }) => {
                p.warnings.push(format!(
                    "seed {}: {worlds} worlds exceed the budget, falling back to {} samples",
                    t.seed, cfg.oracle.samples
                ));
                let s = WorldStrategy::Uniform {
                    count: cfg.oracle.samples.max(1),
                    seed: t.seed,
                };
                oracle_ranges(&p.train, t.lambda, &p.test_x, &p.test_y, s, u128::MAX, LossFormula::Mse)?
            }
            other => other?,
        };
        let sample = if cfg.oracle.samples > 0 {
            let s = WorldStrategy::Uniform {
                count: cfg.oracle.samples,
                seed: t.seed,
            };
            Some(oracle_ranges(&p.train, t.lambda, &p.test_x, &p.test_y, s, u128::MAX, LossFormula::Mse)?.loss_range)
        } else {
            None
        };
        let contained = within(&zono, &gt.loss_range) && sample.as_ref().is_none_or(|s| within(&zono, s));
        let gap = (gt.loss_range.lo - zono.lo) + (zono.hi - gt.loss_range.hi);
        let method = match gt.strategy {
            WorldStrategy::Corner => "corner",
            WorldStrategy::Grid(_) => "grid",
            WorldStrategy::Uniform { .. } => "uniform",
        };
        let mut row: Vec<Value> = vec![
            t.seed.into(),
            t.radius.into(),
            t.percentage.into(),
            t.lambda.into(),
            zono.lo.into(),
            zono.hi.into(),
            method.into(),
            gt.worlds.into(),
            gt.loss_range.lo.into(),
            gt.loss_range.hi.into(),
            sample.map(|s| s.lo).into(),
            sample.map(|s| s.hi).into(),
            contained.into(),
            gap.into(),
        ];
        row.extend(diag_values(&diag));
        Ok((row, p.warnings, usize::from(!contained)))
    })?;
    let mut rows = Table::new(&head);
    for o in &outputs {
        rows.push(o.row.clone());
    }
    let summary = summarize(&outputs, &rows, &["loss_lo", "loss_hi", "gt_lo", "gt_hi", "gap"]);
    Ok(finish("loss-range", cfg, rows, summary, &outputs))
}

/// Robustness ratio and worst-case test loss over a lambda grid.
pub fn cmd_lambda_sweep(cfg: &ExperimentConfig) -> Result<RunReport> {
    let data = start(cfg)?;
    let head = columns(&[
        "seed",
        "radius",
        "percentage",
        "lambda",
        "ratio",
        "loss_lo",
        "worst_loss",
    ]);
    let list = trials(
        cfg,
        &[cfg.uncertainty.radius],
        &[cfg.uncertainty.percentage],
        &cfg.lambda_grid(),
    );
    let outputs = run_trials(list, |t| {
        let p = prepare(cfg, &data, t, true)?;
        let (w, diag) = fixed_point(&p.train, &cfg.ridge_config(t.lambda))?;
        let r = certify_robustness(&p.test_x, &w, cfg.threshold * p.label_range)?;
        let l = loss_interval(&p.test_x, &p.test_y, &w, t.lambda, LossFormula::Mse)?;
        let mut row: Vec<Value> = vec![
            t.seed.into(),
            t.radius.into(),
            t.percentage.into(),
            t.lambda.into(),
            r.ratio.into(),
            l.lo.into(),
            l.hi.into(),
        ];
        row.extend(diag_values(&diag));
        Ok((row, p.warnings, 0))
    })?;
    let mut rows = Table::new(&head);
    for o in &outputs {
        rows.push(o.row.clone());
    }
    let mut summary = summarize(&outputs, &rows, &["ratio", "worst_loss"]);
    let c = summary.column("worst_loss_mean").expect("column");
    let best = summary
        .rows
        .iter()
        .enumerate()
        .filter_map(|(i, r)| r[c].as_f64().map(|v| (i, v)))
        .min_by(|a, b| a.1.total_cmp(&b.1))
        .map(|(i, _)| i);
    summary.columns.push("best_worst_loss".into());
    for (i, r) in summary.rows.iter_mut().enumerate() {
        r.push((Some(i) == best).into());
    }
    Ok(finish("lambda-sweep", cfg, rows, summary, &outputs))
}

/// Checks every sampled or enumerated world against the zonotope results.
/// `oracle.shrink < 1` scales the boxes down to confirm the check can fail.
pub fn cmd_oracle_check(cfg: &ExperimentConfig) -> Result<RunReport> {
    let data = start(cfg)?;
    let head = columns(&[
        "seed",
        "radius",
        "percentage",
        "lambda",
        "shrink",
        "worlds",
        "weight_failures",
        "prediction_failures",
        "loss_failures",
        "residual_ok",
    ]);
    let list = trials(cfg, &cfg.radius_grid(), &cfg.percentage_grid(), &[cfg.ridge.lambda]);
    let outputs = run_trials(list, |t| {
        let p = prepare(cfg, &data, t, true)?;
        let (mut w, diag) = fixed_point(&p.train, &cfg.ridge_config(t.lambda))?;
        w.k *= cfg.oracle.shrink;
        let (worlds, checked) = check_worlds(cfg, &p, &w, &diag, t)?;
        let failures = checked.0 + checked.1 + checked.2;
        let mut row: Vec<Value> = vec![
            t.seed.into(),
            t.radius.into(),
            t.percentage.into(),
            t.lambda.into(),
            cfg.oracle.shrink.into(),
            worlds.into(),
            checked.0.into(),
            checked.1.into(),
            checked.2.into(),
            diag.residual.as_ref().map(|r| r.passes()).into(),
        ];
        row.extend(diag_values(&diag));
        Ok((row, p.warnings, failures))
    })?;
    let mut rows = Table::new(&head);
    for o in &outputs {
        rows.push(o.row.clone());
    }
    let summary = summarize(
        &outputs,
        &rows,
        &["weight_failures", "prediction_failures", "loss_failures"],
    );
    Ok(finish("oracle-check", cfg, rows, summary, &outputs))
}

fn check_worlds(
    cfg: &ExperimentConfig,
    p: &Prepared,
    w: &AbstractWeights,
    diag: &FixedPointDiagnostics,
    t: &Trial,
) -> Result<(usize, (usize, usize, usize))> {
    let symbols = p.train.data_symbols();
    let budget = cfg.oracle.budget as u128;
    let mut worlds: Vec<_> = Vec::new();
    if world_count(WorldStrategy::Corner, symbols.len()) <= budget {
        worlds.extend(assignments(symbols.clone(), WorldStrategy::Corner, budget)?);
    }
    let samples = WorldStrategy::Uniform {
        count: cfg.oracle.samples,
        seed: t.seed,
    };
    worlds.extend(assignments(symbols, samples, u128::MAX)?);

    let predictions: Vec<Interval> = (0..p.test_x.nrows())
        .map(|i| predict_interval(p.test_x.row(i).transpose().as_slice(), w).map(|iv| iv.interval()))
        .collect::<Result<_>>()?;
    let loss = loss_interval(&p.test_x, &p.test_y, w, t.lambda, LossFormula::Mse)?.interval();
    let weight_box = w.interval_box();

    let counts = worlds
        .par_iter()
        .map(|e| -> Result<(usize, usize, usize)> {
            let (x, y) = p.train.materialize(e);
            let ws = ridge_concrete(&x, &y, t.lambda)?;
            let inside = if diag.joined {
                weight_box.contains_with_tol(ws.as_slice(), w.tolerance * (1.0 + ws.amax()))
            } else {
                w.contains(e, &ws)
            };
            let preds = &p.test_x * &ws;
            let pred_fail = preds
                .iter()
                .zip(&predictions)
                .filter(|(v, iv)| !iv.contains_with_tol(**v, 1e-9 * (1.0 + v.abs())))
                .count();
            let l = concrete_loss(&p.test_x, &p.test_y, &ws, t.lambda, LossFormula::Mse);
            let loss_fail = !loss.contains_with_tol(l, 1e-9 * (1.0 + l));
            Ok((usize::from(!inside), pred_fail, usize::from(loss_fail)))
        })
        .try_reduce(|| (0, 0, 0), |a, b| Ok((a.0 + b.0, a.1 + b.1, a.2 + b.2)))?;
    Ok((worlds.len(), counts))
}

/// Per-coefficient intervals and sign conclusiveness on the full dataset.
pub fn cmd_params(cfg: &ExperimentConfig) -> Result<RunReport> {
    let data = start(cfg)?;
    let head = columns(&[
        "seed",
        "radius",
        "percentage",
        "lambda",
        "index",
        "name",
        "lo",
        "hi",
        "center",
        "direction",
    ]);
    let list = trials(
        cfg,
        &[cfg.uncertainty.radius],
        &[cfg.uncertainty.percentage],
        &[cfg.ridge.lambda],
    );
    let per_trial: Vec<(Trial, Vec<Vec<Value>>, Vec<String>)> = list
        .into_par_iter()
        .map(|t| {
            let p = prepare(cfg, &data, &t, false)?;
            let (w, diag) = fixed_point(&p.train, &cfg.ridge_config(t.lambda))?;
            let params = parameter_intervals(&w).with_names(&data.columns);
            let rows = params
                .parameters
                .iter()
                .map(|q| {
                    let mut row: Vec<Value> = vec![
                        t.seed.into(),
                        t.radius.into(),
                        t.percentage.into(),
                        t.lambda.into(),
                        q.index.into(),
                        q.name.clone().into(),
                        q.lo.into(),
                        q.hi.into(),
                        w.w_r[q.index].into(),
                        direction_label(q.direction).into(),
                    ];
                    row.extend(diag_values(&diag));
                    row
                })
                .collect();
            Ok((t, rows, p.warnings))
        })
        .collect::<Result<_>>()?;
    let mut rows = Table::new(&head);
    for (_, r, _) in &per_trial {
        for row in r {
            rows.push(row.clone());
        }
    }
    let mut summary = Table::new(&["index", "name", "lo_min", "hi_max", "conclusive_seeds", "seeds"]);
    let (ci, clo, chi, cdir) = (
        rows.column("index").unwrap(),
        rows.column("lo").unwrap(),
        rows.column("hi").unwrap(),
        rows.column("direction").unwrap(),
    );
    for (j, name) in data.columns.iter().enumerate() {
        let mine: Vec<&Vec<Value>> = rows.rows.iter().filter(|r| r[ci].as_f64() == Some(j as f64)).collect();
        let lo = mine
            .iter()
            .filter_map(|r| r[clo].as_f64())
            .fold(f64::INFINITY, f64::min);
        let hi = mine
            .iter()
            .filter_map(|r| r[chi].as_f64())
            .fold(f64::NEG_INFINITY, f64::max);
        let conclusive = mine
            .iter()
            .filter(|r| r[cdir] != Value::from(direction_label(crate::inference::Direction::Inconclusive)))
            .count();
        summary.push(vec![
            j.into(),
            name.as_str().into(),
            lo.into(),
            hi.into(),
            conclusive.into(),
            mine.len().into(),
        ]);
    }
    Ok(RunReport {
        command: "params".into(),
        config: cfg.clone(),
        rows,
        summary,
        warnings: per_trial.into_iter().flat_map(|(_, _, w)| w).collect(),
        failures: 0,
    })
}
