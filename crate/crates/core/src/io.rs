//! File formats: measure specifications and experiment configs (JSON),
//! point sets (CSV).

use serde::{Deserialize, Serialize};
use std::io::Read;
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::frechet::SampleSet;
use crate::geometry::{BookPoint, BookShape};
use crate::measures::{BookMeasure, LeafComponent, LeafFamily, SpineComponent, SpineFamily};

/// Tolerance on the weights of a measure file summing to one. Weights
/// within it are renormalized.
pub const SPEC_WEIGHT_TOLERANCE: f64 = 1e-9;

/// A leaf entry of a measure file: `{"w": …, "family": …, "params": {…}}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LeafSpec {
    pub w: f64,
    #[serde(flatten)]
    pub component: LeafFamily,
}

/// A measure file.
///
/// ```json
/// {
///   "d": 1, "K": 3, "w0": 0.1,
///   "spine": {"family": "gaussian", "params": {"mean": [0], "cov": [[1]]}},
///   "leaves": [
///     {"w": 0.3, "family": "half_normal_product",
///      "params": {"radial": {"law": "half_normal", "sigma": 1.0}}},
///     …
///   ]
/// }
/// ```
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MeasureSpec {
    pub d: usize,
    #[serde(rename = "K", alias = "k")]
    pub leaves_count: usize,
    #[serde(default)]
    pub w0: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub spine: Option<SpineFamily>,
    pub leaves: Vec<LeafSpec>,
}

impl MeasureSpec {
    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn from_path(path: &Path) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    /// Validates and builds the measure.
    pub fn build(&self) -> Result<BookMeasure> {
        let shape = BookShape::new(self.d, self.leaves_count)?;
        if self.leaves.len() != self.leaves_count {
            return Err(Error::InvalidWeights(format!(
                "K = {} but {} leaves given",
                self.leaves_count,
                self.leaves.len()
            )));
        }
        let total: f64 = self.w0 + self.leaves.iter().map(|l| l.w).sum::<f64>();
        if !((total - 1.0).abs() <= SPEC_WEIGHT_TOLERANCE) {
            return Err(Error::InvalidWeights(format!(
                "weights sum to {total}, expected 1"
            )));
        }
        let spine = match &self.spine {
            Some(family) => SpineComponent::new(family.clone(), self.d)?,
            None if self.w0 == 0.0 => SpineComponent::origin(self.d),
            None => {
                return Err(Error::InvalidComponent(
                    "w0 > 0 requires a spine component".into(),
                ))
            }
        };
        let leaves = self
            .leaves
            .iter()
            .map(|l| {
                Ok((
                    l.w / total,
                    LeafComponent::new(l.component.clone(), self.d)?,
                ))
            })
            .collect::<Result<Vec<_>>>()?;
        BookMeasure::new(shape, self.w0 / total, spine, leaves)
    }
}

/// Reads a point-set CSV with header `leaf,x0,y1,…,yd`.
///
/// `leaf = 0` with `x0 = 0` is a spine point; `leaf ∈ 1..=K` needs `x0 > 0`.
/// When `leaves` is `None`, `K` is the largest leaf index present, but at
/// least 3. Row numbers in errors count the header as row 1.
pub fn read_points_csv<R: Read>(input: R, leaves: Option<usize>) -> Result<SampleSet> {
    let mut reader = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_reader(input);
    let header = reader.headers()?.clone();
    let names: Vec<&str> = header.iter().collect();
    let d = names.len().saturating_sub(2);
    let expected: Vec<String> = ["leaf".to_string(), "x0".to_string()]
        .into_iter()
        .chain((1..=d).map(|i| format!("y{i}")))
        .collect();
    if names.len() < 2 || names != expected {
        return Err(Error::BadRow {
            row: 1,
            message: format!("header must be {}", expected.join(",")),
        });
    }

    let mut raw = Vec::new();
    for (i, record) in reader.records().enumerate() {
        let row = i + 2;
        let record = record.map_err(|e| Error::BadRow {
            row,
            message: e.to_string(),
        })?;
        if record.len() != d + 2 {
            return Err(Error::BadRow {
                row,
                message: format!("expected {} fields, got {}", d + 2, record.len()),
            });
        }
        let leaf: usize = record[0].parse().map_err(|_| Error::BadRow {
            row,
            message: format!("bad leaf index {:?}", &record[0]),
        })?;
        let mut coords = Vec::with_capacity(d + 1);
        for field in record.iter().skip(1) {
            let v: f64 = field.parse().map_err(|_| Error::BadRow {
                row,
                message: format!("bad number {field:?}"),
            })?;
            if !v.is_finite() {
                return Err(Error::BadRow {
                    row,
                    message: format!("non-finite value {field:?}"),
                });
            }
            coords.push(v);
        }
        if leaf == 0 && coords[0] != 0.0 {
            return Err(Error::BadRow {
                row,
                message: "spine rows (leaf = 0) need x0 = 0".into(),
            });
        }
        if leaf > 0 && !(coords[0] > 0.0) {
            return Err(Error::BadRow {
                row,
                message: "leaf rows need x0 > 0".into(),
            });
        }
        raw.push((row, leaf, coords));
    }
    if raw.is_empty() {
        return Err(Error::EmptySample);
    }
    let max_leaf = raw.iter().map(|(_, l, _)| *l).max().unwrap_or(0);
    let k = leaves.unwrap_or(max_leaf.max(3));
    let shape = BookShape::new(d, k)?;
    let points = raw
        .into_iter()
        .map(|(row, leaf, c)| {
            let p = if leaf == 0 {
                BookPoint::spine(shape, c[1..].to_vec())
            } else {
                BookPoint::leaf(shape, leaf, c[0], c[1..].to_vec())
            };
            p.map_err(|e| Error::BadRow {
                row,
                message: e.to_string(),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    SampleSet::new(shape, points)
}

/// Inline measure or a path to a measure file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum MeasureSource {
    Path(PathBuf),
    Inline(MeasureSpec),
}

impl MeasureSource {
    /// Relative paths are resolved against `base`.
    pub fn load(&self, base: Option<&Path>) -> Result<MeasureSpec> {
        match self {
            MeasureSource::Inline(spec) => Ok(spec.clone()),
            MeasureSource::Path(p) => {
                let full = match base {
                    Some(dir) if p.is_relative() => dir.join(p),
                    _ => p.clone(),
                };
                MeasureSpec::from_path(&full)
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ExperimentMode {
    Lln,
    Clt,
}

/// Experiment config:
/// `{measure, mode: "lln" | "clt", seed, n | checkpoints, M, alpha?, workers?}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub measure: MeasureSource,
    pub mode: ExperimentMode,
    pub seed: u64,
    #[serde(default, rename = "N", alias = "n")]
    pub sample_size: Option<usize>,
    #[serde(default)]
    pub checkpoints: Option<Vec<usize>>,
    #[serde(rename = "M", alias = "replicates")]
    pub replicates: usize,
    #[serde(default)]
    pub alpha: Option<f64>,
    #[serde(default)]
    pub workers: Option<usize>,
}

impl ExperimentConfig {
    pub fn from_path(path: &Path) -> Result<Self> {
        Ok(serde_json::from_str(&std::fs::read_to_string(path)?)?)
    }
}
