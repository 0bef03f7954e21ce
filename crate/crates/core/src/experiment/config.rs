use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::dataset::{self, Dataset, UncertaintySpec, UncertaintyTarget};
use crate::learning::{RidgeConfig, Transform};
use crate::oracle::{WorldStrategy, DEFAULT_WORLD_BUDGET};
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SyntheticSource {
    pub n: usize,
    pub features: usize,
    pub noise: f64,
    pub seed: u64,
}

impl Default for SyntheticSource {
    fn default() -> Self {
        SyntheticSource {
            n: 60,
            features: 2,
            noise: 1.0,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DataSection {
    /// CSV file; relative paths resolve against the config file.
    pub path: Option<PathBuf>,
    pub label: Option<String>,
    pub features: Option<Vec<String>>,
    /// Generated data, used when `path` is absent.
    pub synthetic: Option<SyntheticSource>,
    /// Declared `[lo, hi]` for columns with missing cells.
    pub missing: BTreeMap<String, (f64, f64)>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TargetKind {
    Labels,
    Features,
    Both,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct UncertaintySection {
    pub target: TargetKind,
    /// Feature column names for `features` and `both`.
    pub columns: Vec<String>,
    pub percentage: f64,
    pub radius: f64,
}

impl Default for UncertaintySection {
    fn default() -> Self {
        UncertaintySection {
            target: TargetKind::Labels,
            columns: Vec::new(),
            percentage: 0.1,
            radius: 0.05,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TransformKind {
    Svd,
    Identity,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RidgeSection {
    pub lambda: f64,
    pub transform: TransformKind,
    pub split_budget: usize,
    pub tolerance: f64,
    pub verify_residual: bool,
}

impl Default for RidgeSection {
    fn default() -> Self {
        let r = RidgeConfig::default();
        RidgeSection {
            lambda: r.lambda,
            transform: TransformKind::Svd,
            split_budget: r.split_budget,
            tolerance: r.tolerance,
            verify_residual: r.verify_residual,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SweepSection {
    pub radius: Vec<f64>,
    pub percentage: Vec<f64>,
    pub lambda: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StrategyKind {
    Corner,
    Grid,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OracleSection {
    pub strategy: StrategyKind,
    /// Uniform samples per run.
    pub samples: usize,
    pub budget: u64,
    /// Multiplies the box sizes before checking; values below 1 must make
    /// the check fail on feature-uncertain data.
    pub shrink: f64,
}

impl Default for OracleSection {
    fn default() -> Self {
        OracleSection {
            strategy: StrategyKind::Corner,
            samples: 1000,
            budget: DEFAULT_WORLD_BUDGET as u64,
            shrink: 1.0,
        }
    }
}

impl OracleSection {
    pub fn world_strategy(&self) -> WorldStrategy {
        match self.strategy {
            StrategyKind::Corner => WorldStrategy::Corner,
            StrategyKind::Grid => WorldStrategy::Grid(3),
        }
    }
}

/// Experiment description, read from TOML.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub data: DataSection,
    pub split_ratio: f64,
    pub seeds: Vec<u64>,
    /// Robustness threshold as a fraction of the label range.
    pub threshold: f64,
    pub uncertainty: UncertaintySection,
    pub ridge: RidgeSection,
    pub sweep: SweepSection,
    pub oracle: OracleSection,
    #[serde(skip)]
    pub base_dir: Option<PathBuf>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            data: DataSection::default(),
            split_ratio: 0.8,
            seeds: vec![0, 1, 2, 3, 4],
            threshold: 0.05,
            uncertainty: UncertaintySection::default(),
            ridge: RidgeSection::default(),
            sweep: SweepSection::default(),
            oracle: OracleSection::default(),
            base_dir: None,
        }
    }
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
            path: path.to_path_buf(),
            source,
        })?;
        let mut cfg = Self::from_toml(&text)?;
        cfg.base_dir = path.parent().map(Path::to_path_buf);
        Ok(cfg)
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn validate(&self) -> Result<()> {
        if self.seeds.is_empty() {
            return Err(Error::Config("at least one seed is required".into()));
        }
        let mut seen = self.seeds.clone();
        seen.sort_unstable();
        seen.dedup();
        if seen.len() != self.seeds.len() {
            return Err(Error::Config("seeds must be distinct".into()));
        }
        if !(self.threshold > 0.0) {
            return Err(Error::Config(format!("threshold {} must be positive", self.threshold)));
        }
        if self.ridge.lambda < 0.0 || self.sweep.lambda.iter().any(|&l| l < 0.0) {
            return Err(Error::Config("lambda must be nonnegative".into()));
        }
        if self.uncertainty.target != TargetKind::Labels && self.uncertainty.columns.is_empty() {
            return Err(Error::Config("feature uncertainty needs `uncertainty.columns`".into()));
        }
        if self.data.path.is_none() && self.data.synthetic.is_none() {
            return Err(Error::Config("set `data.path` or `[data.synthetic]`".into()));
        }
        Ok(())
    }

    pub fn load_dataset(&self) -> Result<Dataset> {
        match (&self.data.path, &self.data.synthetic) {
            (Some(p), _) => {
                let path = match &self.base_dir {
                    Some(dir) if p.is_relative() => dir.join(p),
                    _ => p.clone(),
                };
                let label = self
                    .data
                    .label
                    .as_deref()
                    .ok_or_else(|| Error::Config("`data.label` is required with `data.path`".into()))?;
                dataset::load_csv(path, label, self.data.features.as_deref())
            }
            (None, Some(s)) => Ok(dataset::synthetic(s.n, s.features, s.noise, s.seed)),
            (None, None) => Err(Error::Config("set `data.path` or `[data.synthetic]`".into())),
        }
    }

    pub fn ridge_config(&self, lambda: f64) -> RidgeConfig {
        RidgeConfig {
            lambda,
            transform: match self.ridge.transform {
                TransformKind::Svd => Transform::SvdOfCovariance,
                TransformKind::Identity => Transform::Identity,
            },
            split_budget: self.ridge.split_budget,
            tolerance: self.ridge.tolerance,
            verify_residual: self.ridge.verify_residual,
        }
    }

    pub fn uncertainty_spec(&self, data: &Dataset, radius: f64, percentage: f64, seed: u64) -> Result<UncertaintySpec> {
        let cols = self
            .uncertainty
            .columns
            .iter()
            .map(|c| data.column_index(c).ok_or_else(|| Error::MissingColumn(c.clone())))
            .collect::<Result<Vec<_>>>()?;
        let target = match self.uncertainty.target {
            TargetKind::Labels => UncertaintyTarget::Labels,
            TargetKind::Features => UncertaintyTarget::Features(cols),
            TargetKind::Both => UncertaintyTarget::Both(cols),
        };
        Ok(UncertaintySpec {
            target,
            percentage,
            radius,
            seed,
        })
    }

    pub fn radius_grid(&self) -> Vec<f64> {
        non_empty_or(&self.sweep.radius, self.uncertainty.radius)
    }

    pub fn percentage_grid(&self) -> Vec<f64> {
        non_empty_or(&self.sweep.percentage, self.uncertainty.percentage)
    }

    pub fn lambda_grid(&self) -> Vec<f64> {
        non_empty_or(&self.sweep.lambda, self.ridge.lambda)
    }
}

fn non_empty_or(v: &[f64], x: f64) -> Vec<f64> {
    if v.is_empty() {
        vec![x]
    } else {
        v.to_vec()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_sections_and_defaults() {
        let cfg = ExperimentConfig::from_toml(
            r#"
            seeds = [1, 2]
            threshold = 0.1

            [data]
            path = "mpg.csv"
            label = "mpg"

            [data.missing]
            horsepower = [40.0, 230.0]

            [uncertainty]
            target = "both"
            columns = ["weight"]
            radius = 0.02

            [ridge]
            lambda = 0.5
            transform = "identity"

            [sweep]
            radius = [0.01, 0.02]
            "#,
        )
        .unwrap();
        assert_eq!(cfg.seeds, vec![1, 2]);
        assert_eq!(cfg.uncertainty.target, TargetKind::Both);
        assert_eq!(cfg.uncertainty.percentage, 0.1);
        assert_eq!(cfg.data.missing["horsepower"], (40.0, 230.0));
        assert_eq!(cfg.radius_grid(), vec![0.01, 0.02]);
        assert_eq!(cfg.lambda_grid(), vec![0.5]);
        assert_eq!(cfg.ridge_config(0.5).transform, Transform::Identity);
        cfg.validate().unwrap();
    }

    #[test]
    fn rejects_unknown_keys_and_bad_values() {
        assert!(matches!(
            ExperimentConfig::from_toml("bogus = 1"),
            Err(Error::Config(_))
        ));
        let mut cfg = ExperimentConfig {
            data: DataSection {
                synthetic: Some(SyntheticSource::default()),
                ..Default::default()
            },
            ..Default::default()
        };
        cfg.validate().unwrap();
        cfg.seeds = vec![1, 1];
        assert!(cfg.validate().is_err());
        cfg.seeds = vec![];
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn toml_round_trip() {
        let cfg = ExperimentConfig {
            data: DataSection {
                synthetic: Some(SyntheticSource::default()),
                ..Default::default()
            },
            ..Default::default()
        };
        let back = ExperimentConfig::from_toml(&cfg.to_toml().unwrap()).unwrap();
        assert_eq!(cfg, back);
    }
}
