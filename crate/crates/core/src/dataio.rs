//! Dataset ingestion, splitting and on-disk formats.
//!
//! Datasets come from headered, numeric-only CSV files. Ensembles and rule
//! models are stored as versioned JSON; regularization paths are written as
//! flat CSV tables.

use std::collections::HashSet;
use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::Path;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::approx::PathResult;
use crate::ensemble::TreeEnsemble;
use crate::error::{Error, Result};

/// Version written into every JSON artifact; loaders reject anything else.
pub const SCHEMA_VERSION: u32 = 1;

const MISSING_MARKERS: [&str; 4] = ["", "NA", "NaN", "?"];

/// Dense numeric dataset, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    features: Vec<f64>,
    response: Vec<f64>,
    feature_names: Vec<String>,
    row_ids: Vec<usize>,
}

impl Dataset {
    pub fn new(
        features: Vec<f64>,
        response: Vec<f64>,
        feature_names: Vec<String>,
        row_ids: Vec<usize>,
    ) -> Result<Self> {
        let n = response.len();
        let p = feature_names.len();
        if n == 0 {
            return Err(Error::Empty("dataset has no rows".into()));
        }
        if p == 0 {
            return Err(Error::Empty("dataset has no features".into()));
        }
        if features.len() != n * p {
            return Err(Error::Dimension {
                expected: n * p,
                found: features.len(),
            });
        }
        if row_ids.len() != n {
            return Err(Error::Dimension {
                expected: n,
                found: row_ids.len(),
            });
        }
        let mut seen = HashSet::new();
        for name in &feature_names {
            if !seen.insert(name.as_str()) {
                return Err(Error::DuplicateFeature(name.clone()));
            }
        }
        if features.iter().chain(&response).any(|v| !v.is_finite()) {
            return Err(Error::InvalidArgument("non-finite value in dataset".into()));
        }
        Ok(Self {
            features,
            response,
            feature_names,
            row_ids,
        })
    }

    /// Builds a dataset from row vectors with generated feature names `x0..`.
    pub fn from_rows(rows: &[Vec<f64>], response: Vec<f64>) -> Result<Self> {
        let p = rows.first().map_or(0, Vec::len);
        let mut features = Vec::with_capacity(rows.len() * p);
        for row in rows {
            if row.len() != p {
                return Err(Error::Dimension {
                    expected: p,
                    found: row.len(),
                });
            }
            features.extend_from_slice(row);
        }
        let names = (0..p).map(|j| format!("x{j}")).collect();
        let ids = (0..rows.len()).collect();
        Self::new(features, response, names, ids)
    }

    pub fn n_rows(&self) -> usize {
        self.response.len()
    }

    pub fn n_features(&self) -> usize {
        self.feature_names.len()
    }

    pub fn row(&self, k: usize) -> &[f64] {
        let p = self.n_features();
        &self.features[k * p..(k + 1) * p]
    }

    pub fn value(&self, k: usize, j: usize) -> f64 {
        self.features[k * self.n_features() + j]
    }

    pub fn response(&self) -> &[f64] {
        &self.response
    }

    pub fn feature_names(&self) -> &[String] {
        &self.feature_names
    }

    pub fn row_ids(&self) -> &[usize] {
        &self.row_ids
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> + '_ {
        self.features.chunks_exact(self.n_features())
    }

    /// Rows at `indices`, in that order.
    pub fn subset(&self, indices: &[usize]) -> Result<Self> {
        let p = self.n_features();
        let mut features = Vec::with_capacity(indices.len() * p);
        let mut response = Vec::with_capacity(indices.len());
        let mut row_ids = Vec::with_capacity(indices.len());
        for &k in indices {
            if k >= self.n_rows() {
                return Err(Error::InvalidArgument(format!("row {k} out of range")));
            }
            features.extend_from_slice(self.row(k));
            response.push(self.response[k]);
            row_ids.push(self.row_ids[k]);
        }
        Self::new(features, response, self.feature_names.clone(), row_ids)
    }
}

/// Result of [`load_csv`]: the parsed dataset plus the count of rejected rows.
#[derive(Debug, Clone)]
pub struct CsvLoad {
    pub dataset: Dataset,
    pub skipped_rows: usize,
}

/// Reads a headered numeric CSV. Rows with a missing cell are dropped and counted.
pub fn load_csv(path: impl AsRef<Path>, target: &str) -> Result<CsvLoad> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    read_csv(BufReader::new(file), target)
}

pub fn read_csv<R: std::io::Read>(reader: R, target: &str) -> Result<CsvLoad> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_reader(reader);
    let headers = rdr.headers()?.clone();
    if headers.is_empty() {
        return Err(Error::Empty("csv has no header".into()));
    }
    let target_idx = headers
        .iter()
        .position(|h| h == target)
        .ok_or_else(|| Error::MissingTarget(target.to_string()))?;
    let feature_names: Vec<String> = headers
        .iter()
        .enumerate()
        .filter(|&(j, _)| j != target_idx)
        .map(|(_, h)| h.to_string())
        .collect();

    let mut features = Vec::new();
    let mut response = Vec::new();
    let mut row_ids = Vec::new();
    let mut skipped = 0usize;
    let mut scratch = Vec::with_capacity(headers.len());
    for (row_no, record) in rdr.records().enumerate() {
        let record = record?;
        let line = record.position().map_or(0, |p| p.line());
        scratch.clear();
        let mut missing = false;
        for (j, cell) in record.iter().enumerate() {
            if MISSING_MARKERS.contains(&cell) {
                missing = true;
                continue;
            }
            match cell.parse::<f64>() {
                Ok(v) if v.is_finite() => scratch.push(v),
                _ => {
                    return Err(Error::NonNumeric {
                        column: headers.get(j).unwrap_or("?").to_string(),
                        value: cell.to_string(),
                        line,
                    })
                }
            }
        }
        if missing || record.len() != headers.len() {
            skipped += 1;
            continue;
        }
        for (j, &v) in scratch.iter().enumerate() {
            if j == target_idx {
                response.push(v);
            } else {
                features.push(v);
            }
        }
        row_ids.push(row_no);
    }
    if response.is_empty() {
        return Err(Error::Empty("csv has no complete data rows".into()));
    }
    if skipped > 0 {
        log::warn!("skipped {skipped} row(s) with missing cells");
    }
    let dataset = Dataset::new(features, response, feature_names, row_ids)?;
    Ok(CsvLoad {
        dataset,
        skipped_rows: skipped,
    })
}

/// Writes a dataset back out as CSV, target column last.
pub fn write_csv(ds: &Dataset, target: &str, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let file = File::create(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let mut wtr = csv::Writer::from_writer(BufWriter::new(file));
    let mut header: Vec<&str> = ds.feature_names().iter().map(String::as_str).collect();
    header.push(target);
    wtr.write_record(&header)?;
    for (k, row) in ds.rows().enumerate() {
        let mut rec: Vec<String> = row.iter().map(|v| v.to_string()).collect();
        rec.push(ds.response()[k].to_string());
        wtr.write_record(&rec)?;
    }
    wtr.flush().map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    Ok(())
}

/// Train/validation/test partition sizes: validation and test get
/// `floor(n * fraction)`, train takes the remainder.
pub fn split_sizes(n: usize, fractions: (f64, f64, f64)) -> Result<(usize, usize, usize)> {
    let (tr, va, te) = fractions;
    if !(tr > 0.0 && va > 0.0 && te > 0.0) {
        return Err(Error::InvalidArgument("split fractions must be positive".into()));
    }
    if ((tr + va + te) - 1.0).abs() > 1e-9 {
        return Err(Error::InvalidArgument("split fractions must sum to 1".into()));
    }
    let valid = (n as f64 * va + 1e-9).floor() as usize;
    let test = (n as f64 * te + 1e-9).floor() as usize;
    let train = n.saturating_sub(valid + test);
    if train == 0 || valid == 0 || test == 0 {
        return Err(Error::InvalidArgument(format!(
            "split of {n} rows leaves an empty partition ({train}/{valid}/{test})"
        )));
    }
    Ok((train, valid, test))
}

/// Seeded shuffle followed by a contiguous cut into train/validation/test.
pub fn split(
    ds: &Dataset,
    fractions: (f64, f64, f64),
    seed: u64,
) -> Result<(Dataset, Dataset, Dataset)> {
    let n = ds.n_rows();
    let (train, valid, _) = split_sizes(n, fractions)?;
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    let (a, rest) = order.split_at(train);
    let (b, c) = rest.split_at(valid);
    Ok((ds.subset(a)?, ds.subset(b)?, ds.subset(c)?))
}

#[derive(Serialize, Deserialize)]
struct Versioned<T> {
    schema_version: u32,
    #[serde(flatten)]
    body: T,
}

fn write_json<T: Serialize>(value: &T, path: &Path) -> Result<()> {
    let file = File::create(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let mut w = BufWriter::new(file);
    serde_json::to_writer_pretty(&mut w, value)?;
    w.flush().map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}

fn parse_versioned<T: for<'de> Deserialize<'de>>(text: &str) -> Result<T> {
    #[derive(Deserialize)]
    struct Probe {
        schema_version: u32,
    }
    let probe: Probe = serde_json::from_str(text)?;
    if probe.schema_version != SCHEMA_VERSION {
        return Err(Error::SchemaVersion {
            found: probe.schema_version,
            expected: SCHEMA_VERSION,
        });
    }
    let v: Versioned<T> = serde_json::from_str(text)?;
    Ok(v.body)
}

fn read_text(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}

pub fn ensemble_to_json(e: &TreeEnsemble) -> Result<String> {
    Ok(serde_json::to_string_pretty(&Versioned {
        schema_version: SCHEMA_VERSION,
        body: e,
    })?)
}

pub fn ensemble_from_json(text: &str) -> Result<TreeEnsemble> {
    let mut e: TreeEnsemble = parse_versioned(text)?;
    e.finish_load()?;
    Ok(e)
}

pub fn save_ensemble(e: &TreeEnsemble, path: impl AsRef<Path>) -> Result<()> {
    write_json(
        &Versioned {
            schema_version: SCHEMA_VERSION,
            body: e,
        },
        path.as_ref(),
    )
}

/// Loads an ensemble; training-row membership is not stored and must be
/// restored with [`TreeEnsemble::assign_rows`] before building a rule space.
pub fn load_ensemble(path: impl AsRef<Path>) -> Result<TreeEnsemble> {
    ensemble_from_json(&read_text(path.as_ref())?)
}

/// Comparison used in a rule condition.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Op {
    #[serde(rename = "<=")]
    Le,
    #[serde(rename = ">")]
    Gt,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Condition {
    pub feature: usize,
    pub op: Op,
    pub threshold: f64,
}

impl Condition {
    pub fn holds(&self, x: &[f64]) -> bool {
        match self.op {
            Op::Le => x[self.feature] <= self.threshold,
            Op::Gt => x[self.feature] > self.threshold,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Rule {
    pub conditions: Vec<Condition>,
    pub node_mean: f64,
    pub weight: f64,
    /// Source position in the ensemble (tree index, node id).
    pub tree: usize,
    pub node: usize,
}

impl Rule {
    pub fn contribution(&self) -> f64 {
        self.weight * self.node_mean
    }

    pub fn applies(&self, x: &[f64]) -> bool {
        self.conditions.iter().all(|c| c.holds(x))
    }

    /// True when every feature's conditions leave a nonempty interval.
    pub fn is_consistent(&self) -> bool {
        let mut bounds: Vec<(usize, f64, f64)> = Vec::new();
        for c in &self.conditions {
            let entry = match bounds.iter_mut().find(|b| b.0 == c.feature) {
                Some(b) => b,
                None => {
                    bounds.push((c.feature, f64::NEG_INFINITY, f64::INFINITY));
                    bounds.last_mut().unwrap()
                }
            };
            match c.op {
                Op::Le => entry.2 = entry.2.min(c.threshold),
                Op::Gt => entry.1 = entry.1.max(c.threshold),
            }
        }
        bounds.iter().all(|&(_, lo, hi)| lo < hi)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelMetadata {
    pub scheme: String,
    pub budget: Option<f64>,
    pub lambda: Option<f64>,
    pub gamma: f64,
    pub solver: String,
    pub gap: f64,
}

/// A pruned, weighted rule set. Predictions are
/// `intercept + sum(weight * node_mean * 1{conditions hold})`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RuleModel {
    pub rules: Vec<Rule>,
    pub intercept: f64,
    #[serde(default)]
    pub feature_names: Vec<String>,
    pub metadata: ModelMetadata,
}

impl RuleModel {
    pub fn predict_row(&self, x: &[f64]) -> f64 {
        self.intercept
            + self
                .rules
                .iter()
                .filter(|r| r.applies(x))
                .map(Rule::contribution)
                .sum::<f64>()
    }

    pub fn predict(&self, ds: &Dataset) -> Result<Vec<f64>> {
        let max_feature = self
            .rules
            .iter()
            .flat_map(|r| r.conditions.iter().map(|c| c.feature))
            .max();
        if let Some(j) = max_feature {
            if j >= ds.n_features() {
                return Err(Error::Dimension {
                    expected: j + 1,
                    found: ds.n_features(),
                });
            }
        }
        Ok(ds.rows().map(|x| self.predict_row(x)).collect())
    }

    pub fn validate(&self) -> Result<()> {
        for (i, r) in self.rules.iter().enumerate() {
            if !r.is_consistent() {
                return Err(Error::InvalidArgument(format!(
                    "rule {i} has contradictory conditions"
                )));
            }
            if !(r.weight.is_finite() && r.node_mean.is_finite()) {
                return Err(Error::InvalidArgument(format!("rule {i} is not finite")));
            }
        }
        Ok(())
    }
}

pub fn save_rule_model(model: &RuleModel, path: impl AsRef<Path>) -> Result<()> {
    write_json(
        &Versioned {
            schema_version: SCHEMA_VERSION,
            body: model,
        },
        path.as_ref(),
    )
}

pub fn rule_model_from_json(text: &str) -> Result<RuleModel> {
    let model: RuleModel = parse_versioned(text)?;
    model.validate()?;
    Ok(model)
}

pub fn load_rule_model(path: impl AsRef<Path>) -> Result<RuleModel> {
    rule_model_from_json(&read_text(path.as_ref())?)
}

pub const PATH_CSV_HEADER: [&str; 7] = [
    "lambda",
    "K_effective",
    "num_rules",
    "sum_depth",
    "num_features",
    "train_obj",
    "valid_r2",
];

/// One row per path point; `valid_r2` is empty when no validation data was scored.
pub fn write_path_csv<W: Write>(path: &PathResult, out: W) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(out);
    wtr.write_record(PATH_CSV_HEADER)?;
    for p in &path.points {
        wtr.write_record([
            p.lambda.to_string(),
            p.attribute_sum.to_string(),
            p.num_rules.to_string(),
            p.sum_depth.to_string(),
            p.num_features.to_string(),
            p.penalized_objective.to_string(),
            p.valid_r2.map(|v| v.to_string()).unwrap_or_default(),
        ])?;
    }
    wtr.flush().map_err(|source| Error::Io {
        path: "<path csv>".into(),
        source,
    })?;
    Ok(())
}

pub fn save_path_csv(path: &PathResult, file: impl AsRef<Path>) -> Result<()> {
    let file = file.as_ref();
    let f = File::create(file).map_err(|source| Error::Io {
        path: file.to_path_buf(),
        source,
    })?;
    write_path_csv(path, BufWriter::new(f))
}
