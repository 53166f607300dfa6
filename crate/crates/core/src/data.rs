//! Tabular data loading: CSV parsing, one-hot expansion of categorical
//! columns, target standardization and deterministic k-fold splits.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fs::File;
use std::io::Read;
use std::path::Path;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Non-numeric columns with at most this many distinct values are inferred
/// as categorical.
pub const MAX_INFERRED_CATEGORIES: usize = 32;

pub const NUM_FOLDS: usize = 5;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FeatureKind {
    Binary,
    Continuous,
    CategoricalExpanded,
}

/// Kind of a source CSV column, before categorical expansion.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SourceKind {
    Binary,
    Continuous,
    Categorical,
}

impl std::str::FromStr for SourceKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "binary" => Ok(SourceKind::Binary),
            "continuous" => Ok(SourceKind::Continuous),
            "categorical" => Ok(SourceKind::Categorical),
            other => Err(Error::Config(format!("unknown column kind `{other}`"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Task {
    Binary,
    Multiclass,
    Regression,
}

impl std::str::FromStr for Task {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "binary" => Ok(Task::Binary),
            "multiclass" => Ok(Task::Multiclass),
            "regression" => Ok(Task::Regression),
            other => Err(Error::Config(format!("unknown task `{other}`"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FeatureColumn {
    pub name: String,
    pub kind: FeatureKind,
    pub group_id: Option<usize>,
    pub category_label: Option<String>,
}

#[derive(Serialize, Deserialize)]
struct SchemaRepr {
    columns: Vec<FeatureColumn>,
    groups: Vec<String>,
}

/// Names, kinds and one-hot group membership of every input column.
///
/// Column order is the CSV order and is significant: patches are contiguous
/// column windows.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(try_from = "SchemaRepr", into = "SchemaRepr")]
pub struct FeatureSchema {
    columns: Vec<FeatureColumn>,
    /// Source feature name of each one-hot group, indexed by group id.
    groups: Vec<String>,
    index: HashMap<String, usize>,
}

impl PartialEq for FeatureSchema {
    fn eq(&self, other: &Self) -> bool {
        self.columns == other.columns && self.groups == other.groups
    }
}

impl TryFrom<SchemaRepr> for FeatureSchema {
    type Error = Error;

    fn try_from(r: SchemaRepr) -> Result<Self> {
        FeatureSchema::new(r.columns, r.groups)
    }
}

impl From<FeatureSchema> for SchemaRepr {
    fn from(s: FeatureSchema) -> Self {
        SchemaRepr {
            columns: s.columns,
            groups: s.groups,
        }
    }
}

impl FeatureSchema {
    pub fn new(columns: Vec<FeatureColumn>, groups: Vec<String>) -> Result<Self> {
        let mut index = HashMap::with_capacity(columns.len());
        for (i, c) in columns.iter().enumerate() {
            if index.insert(c.name.clone(), i).is_some() {
                return Err(Error::Schema(format!("duplicate column name `{}`", c.name)));
            }
            match (c.kind, c.group_id) {
                (FeatureKind::CategoricalExpanded, Some(g)) if g < groups.len() => {}
                (FeatureKind::CategoricalExpanded, _) => {
                    return Err(Error::Schema(format!(
                        "categorical column `{}` has no valid group id",
                        c.name
                    )))
                }
                (_, Some(_)) => {
                    return Err(Error::Schema(format!(
                        "non-categorical column `{}` carries a group id",
                        c.name
                    )))
                }
                _ => {}
            }
        }
        Ok(FeatureSchema {
            columns,
            groups,
            index,
        })
    }

    /// Schema of `n` binary columns with the given names.
    pub fn binary<S: AsRef<str>>(names: &[S]) -> Result<Self> {
        let columns = names
            .iter()
            .map(|n| FeatureColumn {
                name: n.as_ref().to_string(),
                kind: FeatureKind::Binary,
                group_id: None,
                category_label: None,
            })
            .collect();
        FeatureSchema::new(columns, Vec::new())
    }

    pub fn columns(&self) -> &[FeatureColumn] {
        &self.columns
    }

    pub fn column(&self, i: usize) -> &FeatureColumn {
        &self.columns[i]
    }

    pub fn len(&self) -> usize {
        self.columns.len()
    }

    pub fn is_empty(&self) -> bool {
        self.columns.is_empty()
    }

    pub fn column_index(&self, name: &str) -> Option<usize> {
        self.index.get(name).copied()
    }

    pub fn num_groups(&self) -> usize {
        self.groups.len()
    }

    pub fn group_source(&self, group_id: usize) -> &str {
        &self.groups[group_id]
    }

    pub fn group_members(&self, group_id: usize) -> Vec<usize> {
        self.columns
            .iter()
            .enumerate()
            .filter(|(_, c)| c.group_id == Some(group_id))
            .map(|(i, _)| i)
            .collect()
    }

    /// Encode a CSV with the same source columns as the training file into a
    /// row-major feature matrix. Unknown or missing categories encode as an
    /// all-zero group; the target column, if present, is ignored.
    pub fn encode_csv<P: AsRef<Path>>(&self, path: P) -> Result<(Vec<f64>, usize)> {
        let mut rdr = csv::ReaderBuilder::new()
            .trim(csv::Trim::All)
            .from_path(path)?;
        let header: Vec<String> = rdr.headers()?.iter().map(str::to_string).collect();
        let group_by_source: HashMap<&str, usize> = self
            .groups
            .iter()
            .enumerate()
            .map(|(g, s)| (s.as_str(), g))
            .collect();
        let category_index: HashMap<(usize, &str), usize> = self
            .columns
            .iter()
            .enumerate()
            .filter_map(|(i, c)| Some(((c.group_id?, c.category_label.as_deref()?), i)))
            .collect();
        enum Slot {
            Direct(usize),
            Group(usize),
            Skip,
        }
        let slots: Vec<Slot> = header
            .iter()
            .map(|h| {
                if let Some(i) = self.column_index(h) {
                    Slot::Direct(i)
                } else if let Some(&g) = group_by_source.get(h.as_str()) {
                    Slot::Group(g)
                } else {
                    Slot::Skip
                }
            })
            .collect();
        for (i, c) in self.columns.iter().enumerate() {
            let present = match c.group_id {
                Some(g) => header.iter().any(|h| h == &self.groups[g]),
                None => header.iter().any(|h| h == &c.name),
            };
            if !present {
                return Err(Error::Schema(format!(
                    "column `{}` (feature {i}) missing from input",
                    c.group_id.map(|g| self.groups[g].as_str()).unwrap_or(&c.name)
                )));
            }
        }
        let l = self.len();
        let mut x = Vec::new();
        let mut rows = 0;
        for (r, rec) in rdr.records().enumerate() {
            let rec = rec?;
            let mut row = vec![0.0; l];
            for (slot, (value, name)) in slots.iter().zip(rec.iter().zip(&header)) {
                match *slot {
                    Slot::Direct(i) => row[i] = parse_number(value, r + 1, name)?,
                    Slot::Group(g) => {
                        if let Some(&i) = category_index.get(&(g, value)) {
                            row[i] = 1.0;
                        }
                    }
                    Slot::Skip => {}
                }
            }
            x.extend_from_slice(&row);
            rows += 1;
        }
        Ok((x, rows))
    }
}

/// Affine standardization of regression targets.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TargetScaler {
    pub mean: f64,
    pub std: f64,
}

impl TargetScaler {
    pub fn fit<I: IntoIterator<Item = f64>>(values: I) -> Self {
        let v: Vec<f64> = values.into_iter().collect();
        if v.is_empty() {
            return TargetScaler { mean: 0.0, std: 1.0 };
        }
        let n = v.len() as f64;
        let mean = v.iter().sum::<f64>() / n;
        let var = v.iter().map(|t| (t - mean) * (t - mean)).sum::<f64>() / n;
        let std = if var > 0.0 { var.sqrt() } else { 1.0 };
        TargetScaler { mean, std }
    }

    pub fn forward(&self, v: f64) -> f64 {
        (v - self.mean) / self.std
    }

    pub fn inverse(&self, v: f64) -> f64 {
        v * self.std + self.mean
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum Targets {
    Classes { labels: Vec<usize>, names: Vec<String> },
    /// Raw real targets in original units.
    Real(Vec<f64>),
}

#[derive(Clone, Debug)]
pub struct Dataset {
    x: Vec<f64>,
    rows: usize,
    schema: FeatureSchema,
    targets: Targets,
    task: Task,
    scaler: Option<TargetScaler>,
}

impl Dataset {
    /// Build a dataset from a row-major matrix. Binary and one-hot columns must
    /// hold only 0/1; one-hot exclusivity is reported by [`validate_onehot`]
    /// rather than enforced here.
    pub fn new(x: Vec<f64>, schema: FeatureSchema, targets: Targets) -> Result<Self> {
        let l = schema.len();
        let n = match &targets {
            Targets::Classes { labels, .. } => labels.len(),
            Targets::Real(v) => v.len(),
        };
        if x.len() != n * l {
            return Err(Error::Input(format!(
                "matrix has {} values, expected {n} rows x {l} columns",
                x.len()
            )));
        }
        for (j, c) in schema.columns().iter().enumerate() {
            if c.kind == FeatureKind::Continuous {
                continue;
            }
            for r in 0..n {
                let v = x[r * l + j];
                if v != 0.0 && v != 1.0 {
                    return Err(Error::Parse {
                        row: r + 1,
                        column: c.name.clone(),
                        message: format!("binary column holds {v}"),
                    });
                }
            }
        }
        let (task, scaler) = match &targets {
            Targets::Classes { labels, names } => {
                if let Some(bad) = labels.iter().find(|&&c| c >= names.len()) {
                    return Err(Error::Input(format!("class index {bad} out of range")));
                }
                let task = if names.len() <= 2 {
                    Task::Binary
                } else {
                    Task::Multiclass
                };
                (task, None)
            }
            Targets::Real(v) => (Task::Regression, Some(TargetScaler::fit(v.iter().copied()))),
        };
        Ok(Dataset {
            x,
            rows: n,
            schema,
            targets,
            task,
            scaler,
        })
    }

    pub fn num_rows(&self) -> usize {
        self.rows
    }

    /// Feature count `L`.
    pub fn num_features(&self) -> usize {
        self.schema.len()
    }

    /// Class count `C`; `None` for regression.
    pub fn num_classes(&self) -> Option<usize> {
        match &self.targets {
            Targets::Classes { names, .. } => Some(names.len().max(2)),
            Targets::Real(_) => None,
        }
    }

    pub fn task(&self) -> Task {
        self.task
    }

    pub fn schema(&self) -> &FeatureSchema {
        &self.schema
    }

    pub fn targets(&self) -> &Targets {
        &self.targets
    }

    pub fn matrix(&self) -> &[f64] {
        &self.x
    }

    pub fn row(&self, i: usize) -> &[f64] {
        let l = self.schema.len();
        &self.x[i * l..(i + 1) * l]
    }

    pub fn class(&self, i: usize) -> usize {
        match &self.targets {
            Targets::Classes { labels, .. } => labels[i],
            Targets::Real(_) => panic!("class() on a regression dataset"),
        }
    }

    /// Standardized regression target of row `i`.
    pub fn target(&self, i: usize) -> f64 {
        match (&self.targets, &self.scaler) {
            (Targets::Real(v), Some(s)) => s.forward(v[i]),
            _ => panic!("target() on a classification dataset"),
        }
    }

    pub fn target_scaler(&self) -> Option<TargetScaler> {
        self.scaler
    }

    /// Refit the target standardization on the given rows (a training fold).
    pub fn refit_target_scaler(&mut self, rows: &[usize]) {
        if let Targets::Real(v) = &self.targets {
            self.scaler = Some(TargetScaler::fit(rows.iter().map(|&r| v[r])));
        }
    }
}

#[derive(Clone, Debug, Default)]
pub struct LoadOptions {
    pub target: String,
    pub task: Option<Task>,
    pub kinds: BTreeMap<String, SourceKind>,
}

impl LoadOptions {
    pub fn new(target: &str) -> Self {
        LoadOptions {
            target: target.to_string(),
            ..Default::default()
        }
    }

    pub fn kind(mut self, column: &str, kind: SourceKind) -> Self {
        self.kinds.insert(column.to_string(), kind);
        self
    }

    pub fn task(mut self, task: Task) -> Self {
        self.task = Some(task);
        self
    }
}

fn is_missing(v: &str) -> bool {
    v.is_empty() || v == "?" || v == "NA"
}

fn parse_number(v: &str, row: usize, column: &str) -> Result<f64> {
    if is_missing(v) {
        return Err(Error::Parse {
            row,
            column: column.to_string(),
            message: "missing value".into(),
        });
    }
    match v.parse::<f64>() {
        Ok(x) if x.is_finite() => Ok(x),
        _ => Err(Error::Parse {
            row,
            column: column.to_string(),
            message: format!("`{v}` is not a finite number"),
        }),
    }
}

struct ColumnScan {
    all_numeric: bool,
    all_binary: bool,
    any_missing: bool,
    labels: BTreeSet<String>,
    label_overflow: bool,
}

/// Load a CSV file (header row, comma separated, UTF-8).
pub fn load_csv<P: AsRef<Path>>(path: P, opts: &LoadOptions) -> Result<Dataset> {
    let path = path.as_ref();
    load_with(
        || -> Result<csv::Reader<File>> {
            Ok(csv::ReaderBuilder::new()
                .trim(csv::Trim::All)
                .from_path(path)?)
        },
        opts,
    )
}

/// [`load_csv`] over in-memory CSV text.
pub fn load_csv_str(text: &str, opts: &LoadOptions) -> Result<Dataset> {
    load_with(
        || -> Result<csv::Reader<&[u8]>> {
            Ok(csv::ReaderBuilder::new()
                .trim(csv::Trim::All)
                .from_reader(text.as_bytes()))
        },
        opts,
    )
}

fn load_with<R: Read, F: Fn() -> Result<csv::Reader<R>>>(
    open: F,
    opts: &LoadOptions,
) -> Result<Dataset> {
    let mut rdr = open()?;
    let header: Vec<String> = match rdr.headers() {
        Ok(h) if !h.is_empty() && !(h.len() == 1 && h[0].is_empty()) => {
            h.iter().map(str::to_string).collect()
        }
        Ok(_) => return Err(Error::Input("empty file".into())),
        Err(e) => return Err(e.into()),
    };
    let target = header
        .iter()
        .position(|h| h == &opts.target)
        .ok_or_else(|| Error::Config(format!("target column `{}` not found", opts.target)))?;
    for name in opts.kinds.keys() {
        if !header.contains(name) {
            return Err(Error::Config(format!("declared column `{name}` not in header")));
        }
    }

    // First pass: infer kinds and collect category labels.
    let mut scans: Vec<ColumnScan> = header
        .iter()
        .map(|_| ColumnScan {
            all_numeric: true,
            all_binary: true,
            any_missing: false,
            labels: BTreeSet::new(),
            label_overflow: false,
        })
        .collect();
    let mut rows = 0usize;
    for rec in rdr.records() {
        let rec = rec?;
        if rec.len() != header.len() {
            return Err(Error::Input(format!(
                "row {} has {} fields, header has {}",
                rows + 1,
                rec.len(),
                header.len()
            )));
        }
        for (j, v) in rec.iter().enumerate() {
            let s = &mut scans[j];
            let declared_cat = opts.kinds.get(&header[j]) == Some(&SourceKind::Categorical);
            if is_missing(v) {
                s.any_missing = true;
                continue;
            }
            match v.parse::<f64>() {
                Ok(x) if x.is_finite() => {
                    if x != 0.0 && x != 1.0 {
                        s.all_binary = false;
                    }
                }
                _ => {
                    s.all_numeric = false;
                    s.all_binary = false;
                }
            }
            let cap = if declared_cat || j == target {
                usize::MAX
            } else {
                MAX_INFERRED_CATEGORIES
            };
            if !s.label_overflow && !s.labels.contains(v) {
                if s.labels.len() >= cap {
                    s.label_overflow = true;
                } else {
                    s.labels.insert(v.to_string());
                }
            }
        }
        rows += 1;
    }
    if rows == 0 {
        return Err(Error::Input("empty file: no data rows".into()));
    }

    let mut kinds = Vec::with_capacity(header.len());
    for (j, name) in header.iter().enumerate() {
        if j == target {
            kinds.push(None);
            continue;
        }
        let s = &scans[j];
        let kind = match opts.kinds.get(name) {
            Some(k) => *k,
            None if s.all_numeric && s.all_binary && !s.any_missing => SourceKind::Binary,
            None if s.all_numeric => SourceKind::Continuous,
            None if !s.label_overflow => SourceKind::Categorical,
            None => SourceKind::Continuous,
        };
        kinds.push(Some(kind));
    }

    // Schema construction.
    let mut columns = Vec::new();
    let mut groups = Vec::new();
    // For each source column: Direct(feature index) or Group(label -> feature index).
    enum Slot {
        Target,
        Direct(usize),
        Group(HashMap<String, usize>),
    }
    let mut slots = Vec::with_capacity(header.len());
    for (j, name) in header.iter().enumerate() {
        match kinds[j] {
            None => slots.push(Slot::Target),
            Some(SourceKind::Categorical) => {
                let g = groups.len();
                groups.push(name.clone());
                let mut map = HashMap::new();
                for label in &scans[j].labels {
                    map.insert(label.clone(), columns.len());
                    columns.push(FeatureColumn {
                        name: format!("{name}={label}"),
                        kind: FeatureKind::CategoricalExpanded,
                        group_id: Some(g),
                        category_label: Some(label.clone()),
                    });
                }
                slots.push(Slot::Group(map));
            }
            Some(k) => {
                slots.push(Slot::Direct(columns.len()));
                columns.push(FeatureColumn {
                    name: name.clone(),
                    kind: if k == SourceKind::Binary {
                        FeatureKind::Binary
                    } else {
                        FeatureKind::Continuous
                    },
                    group_id: None,
                    category_label: None,
                });
            }
        }
    }
    let schema = FeatureSchema::new(columns, groups)?;
    let l = schema.len();

    let task = match opts.task {
        Some(t) => t,
        None => {
            let s = &scans[target];
            if s.all_numeric && (s.label_overflow || s.labels.len() > MAX_INFERRED_CATEGORIES) {
                Task::Regression
            } else {
                Task::Binary
            }
        }
    };
    let class_names: Vec<String> = if task == Task::Regression {
        Vec::new()
    } else {
        let mut names: Vec<String> = scans[target].labels.iter().cloned().collect();
        if scans[target].all_numeric {
            names.sort_by(|a, b| {
                a.parse::<f64>()
                    .unwrap()
                    .total_cmp(&b.parse::<f64>().unwrap())
            });
        }
        names
    };
    let class_of: HashMap<&str, usize> = class_names
        .iter()
        .enumerate()
        .map(|(i, n)| (n.as_str(), i))
        .collect();

    // Second pass: parse values.
    let mut rdr = open()?;
    let mut x = vec![0.0; rows * l];
    let mut labels = Vec::new();
    let mut reals = Vec::new();
    for (r, rec) in rdr.records().enumerate() {
        let rec = rec?;
        let out = &mut x[r * l..(r + 1) * l];
        for (j, v) in rec.iter().enumerate() {
            match &slots[j] {
                Slot::Target => {
                    if task == Task::Regression {
                        reals.push(parse_number(v, r + 1, &header[j])?);
                    } else {
                        let c = class_of.get(v).ok_or_else(|| Error::Parse {
                            row: r + 1,
                            column: header[j].clone(),
                            message: "missing target".into(),
                        })?;
                        labels.push(*c);
                    }
                }
                Slot::Direct(i) => {
                    let value = parse_number(v, r + 1, &header[j])?;
                    if schema.column(*i).kind == FeatureKind::Binary && value != 0.0 && value != 1.0
                    {
                        return Err(Error::Parse {
                            row: r + 1,
                            column: header[j].clone(),
                            message: format!("binary column holds {v}"),
                        });
                    }
                    out[*i] = value;
                }
                Slot::Group(map) => {
                    if !is_missing(v) {
                        out[map[v]] = 1.0;
                    }
                }
            }
        }
    }

    let targets = if task == Task::Regression {
        Targets::Real(reals)
    } else {
        Targets::Classes {
            labels,
            names: class_names,
        }
    };
    let mut ds = Dataset::new(x, schema, targets)?;
    if let Some(t) = opts.task {
        if t != Task::Regression {
            ds.task = t;
        }
    }
    Ok(ds)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Fold {
    pub train: Vec<usize>,
    pub test: Vec<usize>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SplitPlan {
    pub folds: Vec<Fold>,
    pub seed: u64,
}

/// Five 80/20 folds over a seeded shuffle of the rows.
pub fn kfold_split(dataset: &Dataset, seed: u64) -> Result<SplitPlan> {
    kfold_split_rows(dataset.num_rows(), seed)
}

pub fn kfold_split_rows(rows: usize, seed: u64) -> Result<SplitPlan> {
    if rows < 2 * NUM_FOLDS {
        return Err(Error::Input(format!(
            "{rows} rows is too few for {NUM_FOLDS}-fold splitting"
        )));
    }
    let mut order: Vec<usize> = (0..rows).collect();
    order.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    let folds = (0..NUM_FOLDS)
        .map(|k| {
            let lo = k * rows / NUM_FOLDS;
            let hi = (k + 1) * rows / NUM_FOLDS;
            let mut test = order[lo..hi].to_vec();
            let mut train: Vec<usize> = order[..lo].iter().chain(&order[hi..]).copied().collect();
            test.sort_unstable();
            train.sort_unstable();
            Fold { train, test }
        })
        .collect();
    Ok(SplitPlan { folds, seed })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct OneHotViolation {
    pub row: usize,
    pub group_id: usize,
    pub group: String,
}

/// Every (row, group) where two or more columns of a one-hot group are set.
pub fn validate_onehot(dataset: &Dataset) -> Vec<OneHotViolation> {
    let schema = dataset.schema();
    let members: Vec<Vec<usize>> = (0..schema.num_groups())
        .map(|g| schema.group_members(g))
        .collect();
    let mut out = Vec::new();
    for r in 0..dataset.num_rows() {
        let row = dataset.row(r);
        for (g, cols) in members.iter().enumerate() {
            if cols.iter().filter(|&&c| row[c] != 0.0).count() >= 2 {
                out.push(OneHotViolation {
                    row: r,
                    group_id: g,
                    group: schema.group_source(g).to_string(),
                });
            }
        }
    }
    out
}

/// Whether a single encoded row satisfies every one-hot constraint.
pub fn row_is_onehot_valid(schema: &FeatureSchema, row: &[f64]) -> bool {
    let mut hot = vec![0u32; schema.num_groups()];
    for (c, v) in schema.columns().iter().zip(row) {
        if let Some(g) = c.group_id {
            if *v != 0.0 {
                if *v != 1.0 {
                    return false;
                }
                hot[g] += 1;
            }
        } else if c.kind == FeatureKind::Binary && *v != 0.0 && *v != 1.0 {
            return false;
        }
    }
    hot.iter().all(|&h| h <= 1)
}

#[cfg(test)]
mod tests {
    use super::*;

    const COUNTRIES: &str = "age,country,label\n\
        34,US,1\n\
        51,UK,0\n\
        22,PE,1\n\
        40,,0\n";

    #[test]
    fn categorical_expands_into_one_group() {
        let ds = load_csv_str(COUNTRIES, &LoadOptions::new("label")).unwrap();
        assert_eq!(ds.num_features(), 4);
        let s = ds.schema();
        assert_eq!(s.column(0).kind, FeatureKind::Continuous);
        let g: Vec<_> = (1..4).map(|i| s.column(i).group_id).collect();
        assert_eq!(g, vec![Some(0), Some(0), Some(0)]);
        assert_eq!(s.group_source(0), "country");
        assert_eq!(s.column(1).name, "country=PE");
        // Missing categorical encodes as an all-zero group.
        assert_eq!(&ds.row(3)[1..], &[0.0, 0.0, 0.0]);
        assert_eq!(ds.row(0), &[34.0, 0.0, 0.0, 1.0]);
        assert_eq!(ds.task(), Task::Binary);
        assert_eq!(ds.num_classes(), Some(2));
    }

    #[test]
    fn group_sums_are_zero_or_one() {
        let ds = load_csv_str(COUNTRIES, &LoadOptions::new("label")).unwrap();
        for r in 0..ds.num_rows() {
            let sum: f64 = ds.row(r)[1..].iter().sum();
            let expected = if r == 3 { 0.0 } else { 1.0 };
            assert_eq!(sum, expected);
        }
        assert!(validate_onehot(&ds).is_empty());
    }

    #[test]
    fn missing_target_is_config_error() {
        let err = load_csv_str(COUNTRIES, &LoadOptions::new("income")).unwrap_err();
        assert!(matches!(err, Error::Config(_)), "{err}");
    }

    #[test]
    fn empty_file_is_input_error() {
        assert!(matches!(
            load_csv_str("", &LoadOptions::new("y")).unwrap_err(),
            Error::Input(_)
        ));
        assert!(matches!(
            load_csv_str("a,y\n", &LoadOptions::new("y")).unwrap_err(),
            Error::Input(_)
        ));
    }

    #[test]
    fn non_numeric_continuous_names_row_and_column() {
        let text = "a,y\n1.5,0\n2.5,1\nabc,0\n";
        let opts = LoadOptions::new("y").kind("a", SourceKind::Continuous);
        match load_csv_str(text, &opts).unwrap_err() {
            Error::Parse { row, column, .. } => {
                assert_eq!(row, 3);
                assert_eq!(column, "a");
            }
            e => panic!("unexpected {e}"),
        }
    }

    #[test]
    fn missing_continuous_is_rejected() {
        let text = "a,y\n1.5,0\n,1\n";
        assert!(matches!(
            load_csv_str(text, &LoadOptions::new("y")).unwrap_err(),
            Error::Parse { row: 2, .. }
        ));
    }

    #[test]
    fn kind_inference() {
        let text = "b,c,k,y\n0,1.5,x,0\n1,2,y,1\n1,7,x,0\n";
        let ds = load_csv_str(text, &LoadOptions::new("y")).unwrap();
        let kinds: Vec<_> = ds.schema().columns().iter().map(|c| c.kind).collect();
        assert_eq!(
            kinds,
            vec![
                FeatureKind::Binary,
                FeatureKind::Continuous,
                FeatureKind::CategoricalExpanded,
                FeatureKind::CategoricalExpanded
            ]
        );
        // Declared kinds override inference.
        let opts = LoadOptions::new("y").kind("b", SourceKind::Continuous);
        let ds = load_csv_str(text, &opts).unwrap();
        assert_eq!(ds.schema().column(0).kind, FeatureKind::Continuous);
    }

    #[test]
    fn too_many_labels_fall_back_to_continuous() {
        let mut text = String::from("k,y\n");
        for i in 0..40 {
            text.push_str(&format!("v{i},{}\n", i % 2));
        }
        assert!(matches!(
            load_csv_str(&text, &LoadOptions::new("y")).unwrap_err(),
            Error::Parse { row: 1, .. }
        ));
        let opts = LoadOptions::new("y").kind("k", SourceKind::Categorical);
        assert_eq!(load_csv_str(&text, &opts).unwrap().num_features(), 40);
    }

    #[test]
    fn regression_targets_are_standardized() {
        let mut text = String::from("a,y\n");
        for i in 0..50 {
            text.push_str(&format!("{},{}\n", i % 7, 3.0 * i as f64 + 0.25));
        }
        let mut ds = load_csv_str(&text, &LoadOptions::new("y")).unwrap();
        assert_eq!(ds.task(), Task::Regression);
        assert_eq!(ds.num_classes(), None);
        let plan = kfold_split(&ds, 3).unwrap();
        let train = &plan.folds[0].train;
        ds.refit_target_scaler(train);
        let n = train.len() as f64;
        let mean = train.iter().map(|&r| ds.target(r)).sum::<f64>() / n;
        let var = train
            .iter()
            .map(|&r| (ds.target(r) - mean).powi(2))
            .sum::<f64>()
            / n;
        assert!(mean.abs() < 1e-9);
        assert!((var - 1.0).abs() < 1e-9);
        let s = ds.target_scaler().unwrap();
        assert!((s.inverse(ds.target(4)) - 12.25).abs() < 1e-9);
    }

    #[test]
    fn kfold_sizes() {
        let plan = kfold_split_rows(100, 7).unwrap();
        assert_eq!(plan.folds.len(), 5);
        for f in &plan.folds {
            assert_eq!(f.test.len(), 20);
            assert_eq!(f.train.len(), 80);
        }
        let plan = kfold_split_rows(101, 7).unwrap();
        let mut all: Vec<usize> = Vec::new();
        for f in &plan.folds {
            assert!(f.test.len() == 20 || f.test.len() == 21);
            assert_eq!(f.test.len() + f.train.len(), 101);
            assert!(f.test.iter().all(|t| f.train.binary_search(t).is_err()));
            all.extend(&f.test);
        }
        all.sort_unstable();
        assert_eq!(all, (0..101).collect::<Vec<_>>());
        assert_eq!(kfold_split_rows(101, 7).unwrap(), plan);
        assert_ne!(kfold_split_rows(101, 8).unwrap(), plan);
        assert!(matches!(kfold_split_rows(9, 0), Err(Error::Input(_))));
    }

    #[test]
    fn onehot_violation_is_reported() {
        let ds = load_csv_str(COUNTRIES, &LoadOptions::new("label")).unwrap();
        let mut x = ds.matrix().to_vec();
        // Row 1 born in both UK and US.
        x[4 + 3] = 1.0;
        let bad = Dataset::new(x, ds.schema().clone(), ds.targets().clone()).unwrap();
        let v = validate_onehot(&bad);
        assert_eq!(
            v,
            vec![OneHotViolation {
                row: 1,
                group_id: 0,
                group: "country".into()
            }]
        );
        assert!(!row_is_onehot_valid(bad.schema(), bad.row(1)));
        assert!(row_is_onehot_valid(bad.schema(), bad.row(0)));
    }

    #[test]
    fn schema_rejects_duplicates_and_stray_groups() {
        assert!(FeatureSchema::binary(&["a", "a"]).is_err());
        let cols = vec![FeatureColumn {
            name: "a".into(),
            kind: FeatureKind::Binary,
            group_id: Some(0),
            category_label: None,
        }];
        assert!(FeatureSchema::new(cols, vec!["g".into()]).is_err());
    }

    #[test]
    fn schema_serde_roundtrip() {
        let ds = load_csv_str(COUNTRIES, &LoadOptions::new("label")).unwrap();
        let json = serde_json::to_string(ds.schema()).unwrap();
        let back: FeatureSchema = serde_json::from_str(&json).unwrap();
        assert_eq!(&back, ds.schema());
        assert_eq!(back.column_index("country=UK"), Some(2));
    }
}
