//! Concrete regression data and its abstraction into a zonotope dataset.
//!
//! An [`AbstractDataset`] splits the uncertain training set into real centers
//! `(x_r, y_r)` and symbolic parts `(x_s, y_s)`. Every uncertain cell gets its
//! own data symbol, so a world is an assignment of `[-1, 1]` values to those
//! symbols and the materialized dataset is `x_r + x_s(e)`, `y_r + y_s(e)`.

use std::collections::BTreeMap;
use std::path::Path;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::zonotope::{Assignment, ErrorSymbolId, Interval, PolyForm, Registry, ZMatrix, ZVector};
use crate::{Error, Result};

pub const BIAS_COLUMN: &str = "bias";

/// Tabular regression data. Column 0 of `x` is the constant-1 bias column;
/// missing cells are NaN.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub x: DMatrix<f64>,
    pub y: DVector<f64>,
    /// One name per column of `x`, starting with [`BIAS_COLUMN`].
    pub columns: Vec<String>,
    pub label: String,
}

impl Dataset {
    /// Builds a dataset from raw features; the bias column is prepended.
    pub fn new(
        features: &DMatrix<f64>,
        y: DVector<f64>,
        feature_names: Vec<String>,
        label: impl Into<String>,
    ) -> Result<Self> {
        if features.nrows() == 0 || y.is_empty() {
            return Err(Error::EmptyData);
        }
        if features.nrows() != y.len() || feature_names.len() != features.ncols() {
            return Err(Error::ShapeMismatch {
                expected: format!("{} rows, {} names", features.nrows(), features.ncols()),
                found: format!("{} labels, {} names", y.len(), feature_names.len()),
            });
        }
        let n = features.nrows();
        let mut x = DMatrix::from_element(n, features.ncols() + 1, 1.0);
        x.columns_mut(1, features.ncols()).copy_from(features);
        let mut columns = vec![BIAS_COLUMN.to_string()];
        columns.extend(feature_names);
        Ok(Dataset {
            x,
            y,
            columns,
            label: label.into(),
        })
    }

    pub fn n(&self) -> usize {
        self.x.nrows()
    }

    pub fn d(&self) -> usize {
        self.x.ncols()
    }

    pub fn has_missing(&self) -> bool {
        self.x.iter().chain(self.y.iter()).any(|v| v.is_nan())
    }

    pub fn rows(&self, idx: &[usize]) -> Dataset {
        Dataset {
            x: self.x.select_rows(idx),
            y: self.y.select_rows(idx),
            columns: self.columns.clone(),
            label: self.label.clone(),
        }
    }

    pub fn column_index(&self, name: &str) -> Option<usize> {
        self.columns.iter().position(|c| c == name)
    }
}

fn parse_cell(raw: &str) -> Option<Option<f64>> {
    let t = raw.trim();
    if t.is_empty() || t == "?" {
        return Some(None);
    }
    t.parse::<f64>().ok().map(Some)
}

/// Reads a comma-separated file with a header row.
///
/// `features` selects columns by name; `None` uses every column except the
/// label. Empty fields and `?` are read as missing.
pub fn load_csv(path: impl AsRef<Path>, label: &str, features: Option<&[String]>) -> Result<Dataset> {
    let path = path.as_ref();
    let file = std::fs::File::open(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let mut reader = csv::ReaderBuilder::new().has_headers(true).from_reader(file);
    let header: Vec<String> = reader.headers()?.iter().map(|h| h.trim().to_string()).collect();
    let label_idx = header
        .iter()
        .position(|h| h == label)
        .ok_or_else(|| Error::MissingColumn(label.to_string()))?;
    let feature_idx: Vec<usize> = match features {
        Some(names) => names
            .iter()
            .map(|n| {
                header
                    .iter()
                    .position(|h| h == n)
                    .ok_or_else(|| Error::MissingColumn(n.clone()))
            })
            .collect::<Result<_>>()?,
        None => (0..header.len()).filter(|&i| i != label_idx).collect(),
    };

    let mut xs: Vec<f64> = Vec::new();
    let mut ys: Vec<f64> = Vec::new();
    for (row, record) in reader.records().enumerate() {
        let record = record?;
        let get = |i: usize| -> Result<f64> {
            let raw = record.get(i).unwrap_or("");
            parse_cell(raw)
                .map(|v| v.unwrap_or(f64::NAN))
                .ok_or_else(|| Error::NonNumeric {
                    row,
                    column: header[i].clone(),
                    value: raw.to_string(),
                })
        };
        for &i in &feature_idx {
            xs.push(get(i)?);
        }
        ys.push(get(label_idx)?);
    }
    if ys.is_empty() {
        return Err(Error::EmptyData);
    }
    let n = ys.len();
    let features = DMatrix::from_row_slice(n, feature_idx.len(), &xs);
    Dataset::new(
        &features,
        DVector::from_vec(ys),
        feature_idx.iter().map(|&i| header[i].clone()).collect(),
        label,
    )
}

/// Seeded shuffle split; the train side gets `round(ratio * n)` rows. Rows
/// keep their original order within each side.
pub fn train_test_split(d: &Dataset, ratio: f64, seed: u64) -> Result<(Dataset, Dataset)> {
    if !(ratio > 0.0 && ratio < 1.0) {
        return Err(Error::InvalidSplit(format!("ratio {ratio} not in (0, 1)")));
    }
    let n = d.n();
    let n_train = (ratio * n as f64).round() as usize;
    if n_train == 0 || n_train == n {
        return Err(Error::InvalidSplit(format!(
            "{n} rows at ratio {ratio} leaves one side empty"
        )));
    }
    let mut idx: Vec<usize> = (0..n).collect();
    idx.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    let (mut train, mut test) = (idx[..n_train].to_vec(), idx[n_train..].to_vec());
    train.sort_unstable();
    test.sort_unstable();
    Ok((d.rows(&train), d.rows(&test)))
}

/// Observed per-column range, ignoring missing cells.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DomainRange {
    /// One entry per column of `x`; the bias column is reported as `[1, 1]`.
    pub columns: Vec<Interval>,
    pub label: Interval,
}

impl DomainRange {
    pub fn column_range(&self, c: usize) -> f64 {
        self.columns[c].width()
    }

    pub fn label_range(&self) -> f64 {
        self.label.width()
    }
}

fn observed(values: impl Iterator<Item = f64>) -> Interval {
    let (lo, hi) = values
        .filter(|v| !v.is_nan())
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| (lo.min(v), hi.max(v)));
    if lo > hi {
        Interval::point(0.0)
    } else {
        Interval::new(lo, hi)
    }
}

pub fn domain_ranges(d: &Dataset) -> DomainRange {
    let mut columns = vec![Interval::point(1.0)];
    columns.extend((1..d.d()).map(|c| observed(d.x.column(c).iter().copied())));
    DomainRange {
        columns,
        label: observed(d.y.iter().copied()),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum UncertaintyTarget {
    Labels,
    /// Feature column indices into `x` (never 0, the bias).
    Features(Vec<usize>),
    /// Labels plus the given feature columns, on the same rows.
    Both(Vec<usize>),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UncertaintySpec {
    pub target: UncertaintyTarget,
    /// Fraction of rows made uncertain.
    pub percentage: f64,
    /// Interval width as a fraction of the column's domain range.
    pub radius: f64,
    pub seed: u64,
}

impl UncertaintySpec {
    pub fn labels(percentage: f64, radius: f64, seed: u64) -> Self {
        UncertaintySpec {
            target: UncertaintyTarget::Labels,
            percentage,
            radius,
            seed,
        }
    }

    fn validate(&self, d: usize) -> Result<()> {
        if !(0.0..=1.0).contains(&self.percentage) {
            return Err(Error::InvalidUncertainty(format!(
                "percentage {} not in [0, 1]",
                self.percentage
            )));
        }
        if !(self.radius >= 0.0) {
            return Err(Error::InvalidUncertainty(format!("radius {} is negative", self.radius)));
        }
        for &c in self.feature_columns() {
            if c == 0 {
                return Err(Error::InvalidUncertainty("the bias column cannot be uncertain".into()));
            }
            if c >= d {
                return Err(Error::InvalidUncertainty(format!("column {c} out of range (d = {d})")));
            }
        }
        Ok(())
    }

    pub fn feature_columns(&self) -> &[usize] {
        match &self.target {
            UncertaintyTarget::Labels => &[],
            UncertaintyTarget::Features(c) | UncertaintyTarget::Both(c) => c,
        }
    }

    pub fn targets_labels(&self) -> bool {
        matches!(self.target, UncertaintyTarget::Labels | UncertaintyTarget::Both(_))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CellColumn {
    Feature(usize),
    Label,
}

/// The training-set cell an uncertain data symbol belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Cell {
    pub row: usize,
    pub column: CellColumn,
}

/// Uncertain training data `x_r + x_s`, `y_r + y_s`.
#[derive(Debug, Clone)]
pub struct AbstractDataset {
    pub x_r: DMatrix<f64>,
    pub x_s: ZMatrix,
    pub y_r: DVector<f64>,
    pub y_s: ZVector,
    registry: Arc<Registry>,
    provenance: BTreeMap<ErrorSymbolId, Cell>,
}

impl AbstractDataset {
    /// A dataset without uncertainty.
    pub fn certain(x: DMatrix<f64>, y: DVector<f64>) -> Self {
        AbstractDatasetBuilder::new(x, y).build()
    }

    pub fn builder(x: DMatrix<f64>, y: DVector<f64>) -> AbstractDatasetBuilder {
        AbstractDatasetBuilder::new(x, y)
    }

    pub fn n(&self) -> usize {
        self.x_r.nrows()
    }

    pub fn d(&self) -> usize {
        self.x_r.ncols()
    }

    pub fn registry(&self) -> &Arc<Registry> {
        &self.registry
    }

    pub fn provenance(&self) -> &BTreeMap<ErrorSymbolId, Cell> {
        &self.provenance
    }

    pub fn symbol_for(&self, cell: Cell) -> Option<ErrorSymbolId> {
        self.provenance.iter().find(|(_, c)| **c == cell).map(|(s, _)| *s)
    }

    pub fn data_symbols(&self) -> Vec<ErrorSymbolId> {
        self.provenance.keys().copied().collect()
    }

    /// Data symbols that occur in a feature cell.
    pub fn feature_symbols(&self) -> Vec<ErrorSymbolId> {
        self.provenance
            .iter()
            .filter(|(_, c)| c.column != CellColumn::Label)
            .map(|(s, _)| *s)
            .collect()
    }

    pub fn has_feature_uncertainty(&self) -> bool {
        !self.x_s.is_zero()
    }

    pub fn x_hat(&self) -> ZMatrix {
        ZMatrix::from_reals(&self.x_r)
            .checked_add(&self.x_s)
            .expect("same shape and registry")
    }

    pub fn y_hat(&self) -> ZVector {
        ZVector::from_reals(&self.y_r)
            .checked_add(&self.y_s)
            .expect("same shape and registry")
    }

    /// The concrete dataset of world `e`.
    pub fn materialize(&self, e: &impl Assignment) -> (DMatrix<f64>, DVector<f64>) {
        (&self.x_r + self.x_s.evaluate(e), &self.y_r + self.y_s.evaluate(e))
    }

    /// Declared interval of a cell.
    pub fn cell_interval(&self, cell: Cell) -> Interval {
        match cell.column {
            CellColumn::Feature(c) => {
                let f = self.x_s.get(cell.row, c);
                let r = f.abs_coefficient_sum();
                let x = self.x_r[(cell.row, c)];
                Interval::new(x - r, x + r)
            }
            CellColumn::Label => {
                let r = self.y_s[cell.row].abs_coefficient_sum();
                let y = self.y_r[cell.row];
                Interval::new(y - r, y + r)
            }
        }
    }

    /// Same dataset with symbol `s`'s cell re-centred by `offset * g` and its
    /// coefficient `g` scaled by `scale`. Used by splitting.
    pub(crate) fn rescale_symbols(&self, changes: &[(ErrorSymbolId, f64)], scale: f64) -> AbstractDataset {
        let mut out = self.clone();
        for &(s, offset) in changes {
            let Some(cell) = self.provenance.get(&s) else { continue };
            match cell.column {
                CellColumn::Feature(c) => {
                    let f = self.x_s.get(cell.row, c);
                    let g = f.linear_coefficient(s);
                    out.x_r[(cell.row, c)] += offset * g;
                    out.x_s.set(cell.row, c, f.scale(scale));
                }
                CellColumn::Label => {
                    let f = &self.y_s[cell.row];
                    let g = f.linear_coefficient(s);
                    out.y_r[cell.row] += offset * g;
                    let mut entries = out.y_s.into_entries();
                    entries[cell.row] = f.scale(scale);
                    out.y_s = ZVector::new(entries);
                }
            }
        }
        out
    }

    /// Scales every data-symbol coefficient by `s`, keeping centers.
    pub fn scale_uncertainty(&self, s: f64) -> AbstractDataset {
        let mut out = self.clone();
        out.x_s = ZMatrix::from_fn(self.n(), self.d(), |i, j| self.x_s.get(i, j).scale(s));
        out.y_s = self.y_s.scale(s);
        out
    }
}

/// Programmatic construction of an [`AbstractDataset`], one fresh data symbol
/// per declared cell.
pub struct AbstractDatasetBuilder {
    x_r: DMatrix<f64>,
    y_r: DVector<f64>,
    x_s: ZMatrix,
    y_s: Vec<PolyForm>,
    registry: Arc<Registry>,
    provenance: BTreeMap<ErrorSymbolId, Cell>,
}

impl AbstractDatasetBuilder {
    pub fn new(x: DMatrix<f64>, y: DVector<f64>) -> Self {
        assert_eq!(x.nrows(), y.len(), "feature/label row mismatch");
        let (n, d) = x.shape();
        AbstractDatasetBuilder {
            x_r: x,
            y_r: y,
            x_s: ZMatrix::zeros(n, d),
            y_s: vec![PolyForm::zero(); n],
            registry: Registry::new(),
            provenance: BTreeMap::new(),
        }
    }

    /// Feature cell `(row, col)` becomes `center +- half_width`.
    pub fn feature_cell(mut self, row: usize, col: usize, half_width: f64) -> Self {
        let s = self.registry.data_symbol();
        self.x_s
            .set(row, col, PolyForm::affine(self.registry.tag(), 0.0, s, half_width));
        self.provenance.insert(
            s,
            Cell {
                row,
                column: CellColumn::Feature(col),
            },
        );
        self
    }

    /// Feature cell `(row, col)` becomes the interval `[lo, hi]`.
    pub fn feature_interval(mut self, row: usize, col: usize, lo: f64, hi: f64) -> Self {
        self.x_r[(row, col)] = 0.5 * (lo + hi);
        self.feature_cell(row, col, 0.5 * (hi - lo))
    }

    pub fn label_cell(mut self, row: usize, half_width: f64) -> Self {
        let s = self.registry.data_symbol();
        self.y_s[row] = PolyForm::affine(self.registry.tag(), 0.0, s, half_width);
        self.provenance.insert(
            s,
            Cell {
                row,
                column: CellColumn::Label,
            },
        );
        self
    }

    pub fn label_interval(mut self, row: usize, lo: f64, hi: f64) -> Self {
        self.y_r[row] = 0.5 * (lo + hi);
        self.label_cell(row, 0.5 * (hi - lo))
    }

    pub fn build(self) -> AbstractDataset {
        AbstractDataset {
            x_r: self.x_r,
            x_s: self.x_s,
            y_r: self.y_r,
            y_s: ZVector::new(self.y_s),
            registry: self.registry,
            provenance: self.provenance,
        }
    }
}

/// Marks `ceil(percentage * n)` seeded rows uncertain. Each targeted cell
/// keeps its observed value as center and gets a data symbol with coefficient
/// `radius * range(column) / 2`. Labels and features share the row set.
pub fn inject_uncertainty(d: &Dataset, spec: &UncertaintySpec) -> Result<AbstractDataset> {
    spec.validate(d.d())?;
    if d.has_missing() {
        return Err(Error::InvalidUncertainty(
            "dataset has missing cells; abstract them with abstract_missing".into(),
        ));
    }
    let ranges = domain_ranges(d);
    let n = d.n();
    let count = ((spec.percentage * n as f64).ceil() as usize).min(n);
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let mut rows: Vec<usize> = (0..n).collect();
    rows.shuffle(&mut rng);
    rows.truncate(count);
    rows.sort_unstable();

    let mut b = AbstractDataset::builder(d.x.clone(), d.y.clone());
    for &r in &rows {
        for &c in spec.feature_columns() {
            b = b.feature_cell(r, c, spec.radius * ranges.column_range(c) / 2.0);
        }
        if spec.targets_labels() {
            b = b.label_cell(r, spec.radius * ranges.label_range() / 2.0);
        }
    }
    Ok(b.build())
}

/// Declared `[lo, hi]` ranges for columns that contain missing cells, keyed by
/// column name (the label name is allowed).
pub type MissingRanges = BTreeMap<String, (f64, f64)>;

/// Each missing cell becomes `lo + (hi - lo) / 2 +- (hi - lo) / 2` over a new
/// data symbol; observed cells are copied.
pub fn abstract_missing(d: &Dataset, ranges: &MissingRanges) -> Result<AbstractDataset> {
    let range_for = |row: usize, name: &str| -> Result<(f64, f64)> {
        ranges.get(name).copied().ok_or_else(|| Error::UndeclaredMissing {
            row,
            column: name.to_string(),
        })
    };
    let mut b = AbstractDataset::builder(d.x.clone(), d.y.clone());
    for r in 0..d.n() {
        for c in 0..d.d() {
            if d.x[(r, c)].is_nan() {
                let (lo, hi) = range_for(r, &d.columns[c])?;
                b = b.feature_interval(r, c, lo, hi);
            }
        }
        if d.y[r].is_nan() {
            let (lo, hi) = range_for(r, &d.label)?;
            b = b.label_interval(r, lo, hi);
        }
    }
    Ok(b.build())
}

/// Range from a set of imputer estimates, `[min a_i, max a_i]`.
pub fn imputation_range(estimates: &[f64]) -> Option<(f64, f64)> {
    let iv = observed(estimates.iter().copied());
    (!estimates.is_empty()).then_some((iv.lo, iv.hi))
}

/// `y = x . w + noise` with features drawn uniformly from `[0, 10)`.
pub fn synthetic(n: usize, features: usize, noise: f64, seed: u64) -> Dataset {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let weights: Vec<f64> = (0..=features).map(|_| rng.random_range(-2.0..2.0)).collect();
    let x = DMatrix::from_fn(n, features, |_, _| rng.random_range(0.0..10.0));
    let y = DVector::from_fn(n, |i, _| {
        weights[0]
            + (0..features).map(|j| weights[j + 1] * x[(i, j)]).sum::<f64>()
            + noise * rng.random_range(-1.0..1.0)
    });
    let names = (1..=features).map(|j| format!("x{j}")).collect();
    Dataset::new(&x, y, names, "y").expect("synthetic data is well-formed")
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::HashMap;
    use std::io::Write;

    fn write_csv(contents: &str) -> tempfile::NamedTempFile {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        f.write_all(contents.as_bytes()).unwrap();
        f
    }

    #[test]
    fn loads_numeric_csv_with_bias() {
        let f = write_csv("a,b,y\n1,2,3\n4,5,6\n7,8,9\n");
        let d = load_csv(f.path(), "y", None).unwrap();
        assert_eq!(d.n(), 3);
        assert_eq!(d.d(), 3);
        assert_eq!(d.columns, ["bias", "a", "b"]);
        assert!(d.x.column(0).iter().all(|&v| v == 1.0));
        assert_eq!(d.x[(2, 2)], 8.0);
        assert_eq!(d.y[1], 6.0);
    }

    #[test]
    fn header_only_is_empty() {
        let f = write_csv("a,y\n");
        assert!(matches!(load_csv(f.path(), "y", None), Err(Error::EmptyData)));
    }

    #[test]
    fn csv_errors() {
        let f = write_csv("a,y\n1,x\n");
        assert!(matches!(load_csv(f.path(), "y", None), Err(Error::NonNumeric { .. })));
        assert!(matches!(load_csv(f.path(), "z", None), Err(Error::MissingColumn(_))));
        assert!(matches!(
            load_csv("/nonexistent/file.csv", "y", None),
            Err(Error::Io { .. })
        ));
    }

    #[test]
    fn missing_markers_and_feature_selection() {
        let f = write_csv("a,b,y\n1,?,3\n,5,6\n");
        let d = load_csv(f.path(), "y", Some(&["b".to_string()])).unwrap();
        assert_eq!(d.d(), 2);
        assert!(d.x[(0, 1)].is_nan());
        let all = load_csv(f.path(), "y", None).unwrap();
        assert!(all.x[(1, 1)].is_nan());
        assert!(all.has_missing());
    }

    #[test]
    fn split_sizes_and_determinism() {
        let d = synthetic(10, 1, 0.0, 1);
        let (tr, te) = train_test_split(&d, 0.8, 3).unwrap();
        assert_eq!((tr.n(), te.n()), (8, 2));
        let (tr2, _) = train_test_split(&d, 0.8, 3).unwrap();
        assert_eq!(tr, tr2);
        let big = synthetic(392, 1, 0.0, 1);
        let (tr, te) = train_test_split(&big, 0.8, 9).unwrap();
        // round(0.8 * 392) = round(313.6)
        assert_eq!((tr.n(), te.n()), (314, 78));
        assert!(train_test_split(&synthetic(2, 1, 0.0, 1), 0.1, 0).is_err());
        assert!(train_test_split(&d, 1.0, 0).is_err());
    }

    #[test]
    fn split_is_a_disjoint_cover() {
        let d = synthetic(17, 1, 0.0, 2);
        let (tr, te) = train_test_split(&d, 0.7, 5).unwrap();
        let mut ys: Vec<f64> = tr.y.iter().chain(te.y.iter()).copied().collect();
        let mut orig: Vec<f64> = d.y.iter().copied().collect();
        ys.sort_by(f64::total_cmp);
        orig.sort_by(f64::total_cmp);
        assert_eq!(ys, orig);
    }

    #[test]
    fn domain_ranges_exclude_bias() {
        let x = DMatrix::from_row_slice(2, 2, &[0.0, 3.0, 10.0, 3.0]);
        let d = Dataset::new(&x, DVector::from_vec(vec![1.0, 2.0]), vec!["a".into(), "b".into()], "y").unwrap();
        let r = domain_ranges(&d);
        assert_eq!(r.column_range(0), 0.0);
        assert_eq!(r.column_range(1), 10.0);
        assert_eq!(r.column_range(2), 0.0);
        assert_eq!(r.label_range(), 1.0);
    }

    #[test]
    fn zero_percentage_is_certain() {
        let d = synthetic(20, 2, 0.1, 3);
        let a = inject_uncertainty(&d, &UncertaintySpec::labels(0.0, 0.1, 1)).unwrap();
        assert!(a.x_s.is_zero());
        assert!(a.y_s.iter().all(PolyForm::is_constant));
        assert!(a.data_symbols().is_empty());
    }

    #[test]
    fn zero_radius_prunes_to_zero_forms() {
        let d = synthetic(20, 2, 0.1, 3);
        let spec = UncertaintySpec {
            target: UncertaintyTarget::Both(vec![1]),
            percentage: 0.5,
            radius: 0.0,
            seed: 4,
        };
        let a = inject_uncertainty(&d, &spec).unwrap();
        assert_eq!(a.data_symbols().len(), 20);
        assert!(a.x_s.is_zero());
        assert!(a.y_s.iter().all(PolyForm::is_constant));
    }

    #[test]
    fn single_cell_half_width() {
        let x = DMatrix::from_row_slice(2, 1, &[0.0, 10.0]);
        let d = Dataset::new(&x, DVector::from_vec(vec![1.0, 2.0]), vec!["a".into()], "y").unwrap();
        let spec = UncertaintySpec {
            target: UncertaintyTarget::Features(vec![1]),
            percentage: 0.5,
            radius: 0.1,
            seed: 0,
        };
        let a = inject_uncertainty(&d, &spec).unwrap();
        let (&s, cell) = a.provenance().iter().next().unwrap();
        let CellColumn::Feature(c) = cell.column else { panic!() };
        assert_eq!(c, 1);
        assert!((a.x_s.get(cell.row, 1).linear_coefficient(s) - 0.5).abs() < 1e-15);
        let iv = a.cell_interval(*cell);
        assert!((iv.width() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn bias_cannot_be_targeted() {
        let d = synthetic(5, 1, 0.0, 0);
        let spec = UncertaintySpec {
            target: UncertaintyTarget::Features(vec![0]),
            percentage: 1.0,
            radius: 0.1,
            seed: 0,
        };
        assert!(matches!(
            inject_uncertainty(&d, &spec),
            Err(Error::InvalidUncertainty(_))
        ));
    }

    #[test]
    fn injection_is_seed_deterministic() {
        let d = synthetic(30, 2, 0.5, 1);
        let spec = UncertaintySpec {
            target: UncertaintyTarget::Both(vec![1, 2]),
            percentage: 0.3,
            radius: 0.05,
            seed: 77,
        };
        let a = inject_uncertainty(&d, &spec).unwrap();
        let b = inject_uncertainty(&d, &spec).unwrap();
        assert_eq!(
            a.provenance().values().collect::<Vec<_>>(),
            b.provenance().values().collect::<Vec<_>>()
        );
        assert_eq!(a.x_s.centers(), b.x_s.centers());
        for (fa, fb) in a.x_s.entries().iter().zip(b.x_s.entries()) {
            assert_eq!(fa.abs_coefficient_sum().to_bits(), fb.abs_coefficient_sum().to_bits());
        }
        // 9 rows x (2 features + label)
        assert_eq!(a.data_symbols().len(), 27);
    }

    #[test]
    fn symbols_occupy_exactly_one_cell_and_corners_hit_endpoints() {
        let d = synthetic(12, 2, 0.5, 9);
        let spec = UncertaintySpec {
            target: UncertaintyTarget::Both(vec![2]),
            percentage: 0.5,
            radius: 0.2,
            seed: 3,
        };
        let a = inject_uncertainty(&d, &spec).unwrap();
        for &s in a.provenance().keys() {
            let cells = a
                .x_s
                .entries()
                .iter()
                .chain(a.y_s.iter())
                .filter(|f| f.linear_coefficient(s) != 0.0)
                .count();
            assert_eq!(cells, 1);
        }
        let ones: HashMap<_, _> = a.data_symbols().into_iter().map(|s| (s, 1.0)).collect();
        let (x, y) = a.materialize(&ones);
        for cell in a.provenance().values() {
            let iv = a.cell_interval(*cell);
            let v = match cell.column {
                CellColumn::Feature(c) => x[(cell.row, c)],
                CellColumn::Label => y[cell.row],
            };
            assert!((v - iv.hi).abs() < 1e-12);
        }
    }

    #[test]
    fn missing_cells_become_intervals() {
        let nan = f64::NAN;
        let x = DMatrix::from_row_slice(3, 2, &[3.0, nan, 1.0, 6.0, nan, 9.0]);
        let d = Dataset::new(
            &x,
            DVector::from_vec(vec![1.0, 2.0, 3.0]),
            vec!["a".into(), "b".into()],
            "y",
        )
        .unwrap();
        let ranges: MissingRanges = [("a".to_string(), (0.0, 10.0)), ("b".to_string(), (0.0, 10.0))].into();
        let a = abstract_missing(&d, &ranges).unwrap();
        assert_eq!(a.data_symbols().len(), 2);
        for (&s, cell) in a.provenance() {
            let CellColumn::Feature(c) = cell.column else { panic!() };
            assert_eq!(a.x_r[(cell.row, c)], 5.0);
            assert_eq!(a.x_s.get(cell.row, c).linear_coefficient(s), 5.0);
        }
        assert_eq!(a.x_r[(1, 1)], 1.0);
        let partial: MissingRanges = [("a".to_string(), (0.0, 10.0))].into();
        assert!(matches!(
            abstract_missing(&d, &partial),
            Err(Error::UndeclaredMissing { .. })
        ));
    }

    #[test]
    fn no_missing_cells_means_no_symbols() {
        let d = synthetic(4, 2, 0.0, 0);
        let a = abstract_missing(&d, &MissingRanges::new()).unwrap();
        assert!(a.x_s.is_zero());
    }

    #[test]
    fn imputation_range_spans_estimates() {
        assert_eq!(imputation_range(&[3.0, 1.5, 2.0]), Some((1.5, 3.0)));
        assert_eq!(imputation_range(&[]), None);
    }
}
