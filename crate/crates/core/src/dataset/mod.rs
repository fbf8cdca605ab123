//! Multi-label datasets: loading, normalization, splitting and summary statistics.
//!
//! Labels are stored internally as `-1`/`+1` regardless of the on-disk encoding.

mod arff;
mod csv;

use std::collections::HashSet;

use ndarray::{Array1, Array2, ArrayView2, Axis};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use self::arff::{load_arff, parse_arff, parse_mulan_xml, LabelSpec};
pub use self::csv::{load_csv, parse_csv, write_csv};

/// Features `X` (n x d) with labels `Y` (n x q, entries in {-1, +1}).
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    features: Array2<f64>,
    labels: Array2<i8>,
    feature_names: Vec<String>,
    label_names: Vec<String>,
}

impl Dataset {
    /// Builds a dataset with generated names `f0..` and `l0..`.
    pub fn new(features: Array2<f64>, labels: Array2<i8>) -> Result<Self> {
        let feature_names = (0..features.ncols()).map(|j| format!("f{j}")).collect();
        let label_names = (0..labels.ncols()).map(|j| format!("l{j}")).collect();
        Self::with_names(features, labels, feature_names, label_names)
    }

    pub fn with_names(
        features: Array2<f64>,
        labels: Array2<i8>,
        feature_names: Vec<String>,
        label_names: Vec<String>,
    ) -> Result<Self> {
        let (n, d) = features.dim();
        if n == 0 || d == 0 || labels.ncols() == 0 {
            return Err(Error::Validation(format!(
                "dataset needs n, d, q >= 1 (got n={n}, d={d}, q={})",
                labels.ncols()
            )));
        }
        if labels.nrows() != n {
            return Err(Error::Validation(format!(
                "{n} feature rows but {} label rows",
                labels.nrows()
            )));
        }
        if feature_names.len() != d || label_names.len() != labels.ncols() {
            return Err(Error::Validation("name count does not match matrix width".into()));
        }
        if let Some(((i, j), v)) = features.indexed_iter().find(|(_, v)| !v.is_finite()) {
            return Err(Error::Validation(format!("non-finite feature {v} at row {i}, column {j}")));
        }
        if let Some(((i, j), v)) = labels.indexed_iter().find(|(_, &v)| v != 1 && v != -1) {
            return Err(Error::Validation(format!("label {v} at row {i}, column {j} is not -1/+1")));
        }
        Ok(Dataset {
            features,
            labels,
            feature_names,
            label_names,
        })
    }

    pub fn features(&self) -> &Array2<f64> {
        &self.features
    }

    pub fn labels(&self) -> &Array2<i8> {
        &self.labels
    }

    /// Labels as a real matrix, the form the solvers consume.
    pub fn labels_f64(&self) -> Array2<f64> {
        self.labels.mapv(f64::from)
    }

    pub fn feature_names(&self) -> &[String] {
        &self.feature_names
    }

    pub fn label_names(&self) -> &[String] {
        &self.label_names
    }

    pub fn num_examples(&self) -> usize {
        self.features.nrows()
    }

    pub fn num_features(&self) -> usize {
        self.features.ncols()
    }

    pub fn num_labels(&self) -> usize {
        self.labels.ncols()
    }

    /// Rows `indices`, in the given order.
    pub fn select(&self, indices: &[usize]) -> Result<Dataset> {
        if let Some(&bad) = indices.iter().find(|&&i| i >= self.num_examples()) {
            return Err(Error::Validation(format!("row index {bad} out of range")));
        }
        Dataset::with_names(
            self.features.select(Axis(0), indices),
            self.labels.select(Axis(0), indices),
            self.feature_names.clone(),
            self.label_names.clone(),
        )
    }

    /// Same labels and names, new feature values.
    pub(crate) fn with_features(&self, features: Array2<f64>) -> Result<Dataset> {
        Dataset::with_names(
            features,
            self.labels.clone(),
            self.feature_names.clone(),
            self.label_names.clone(),
        )
    }
}

/// Summary characteristics of a multi-label dataset.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetMeta {
    pub num_examples: usize,
    pub num_features: usize,
    pub num_labels: usize,
    pub label_cardinality: f64,
    pub label_density: f64,
    pub distinct_label_sets: usize,
    pub proportion_distinct: f64,
}

pub fn compute_stats(data: &Dataset) -> DatasetMeta {
    let n = data.num_examples();
    let q = data.num_labels();
    let relevant = data.labels().iter().filter(|&&v| v == 1).count();
    let label_cardinality = relevant as f64 / n as f64;
    let distinct: HashSet<Vec<i8>> = data.labels().rows().into_iter().map(|r| r.to_vec()).collect();
    DatasetMeta {
        num_examples: n,
        num_features: data.num_features(),
        num_labels: q,
        label_cardinality,
        label_density: label_cardinality / q as f64,
        distinct_label_sets: distinct.len(),
        proportion_distinct: distinct.len() as f64 / n as f64,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NormMethod {
    None,
    #[default]
    ZScore,
    MinMax,
}

impl std::str::FromStr for NormMethod {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "none" => Ok(NormMethod::None),
            "zscore" => Ok(NormMethod::ZScore),
            "minmax" => Ok(NormMethod::MinMax),
            other => Err(Error::Config(format!("unknown normalization {other:?}"))),
        }
    }
}

/// Per-feature affine map `x -> (x - center) / scale`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NormStats {
    pub center: Array1<f64>,
    pub scale: Array1<f64>,
}

impl NormStats {
    pub fn identity(d: usize) -> Self {
        NormStats {
            center: Array1::zeros(d),
            scale: Array1::ones(d),
        }
    }

    pub fn dim(&self) -> usize {
        self.center.len()
    }

    pub fn fit(features: ArrayView2<'_, f64>, method: NormMethod) -> Self {
        let d = features.ncols();
        match method {
            NormMethod::None => NormStats::identity(d),
            NormMethod::ZScore => {
                let center = features.mean_axis(Axis(0)).expect("n >= 1");
                let scale = features
                    .std_axis(Axis(0), 0.0)
                    .mapv(|s| if s > 0.0 && s.is_finite() { s } else { 1.0 });
                NormStats { center, scale }
            }
            NormMethod::MinMax => {
                let mut center = Array1::zeros(d);
                let mut scale = Array1::ones(d);
                for (j, col) in features.columns().into_iter().enumerate() {
                    let lo = col.iter().copied().fold(f64::INFINITY, f64::min);
                    let hi = col.iter().copied().fold(f64::NEG_INFINITY, f64::max);
                    center[j] = lo;
                    if hi > lo {
                        scale[j] = hi - lo;
                    }
                }
                NormStats { center, scale }
            }
        }
    }

    pub fn apply(&self, features: ArrayView2<'_, f64>) -> Result<Array2<f64>> {
        self.check_width(features.ncols())?;
        Ok((&features - &self.center) / &self.scale)
    }

    pub fn invert(&self, normalized: ArrayView2<'_, f64>) -> Result<Array2<f64>> {
        self.check_width(normalized.ncols())?;
        Ok(&normalized * &self.scale + &self.center)
    }

    fn check_width(&self, d: usize) -> Result<()> {
        if d != self.dim() {
            return Err(Error::Validation(format!(
                "normalization fitted on {} features, got {d}",
                self.dim()
            )));
        }
        Ok(())
    }
}

/// Fits normalization on `data` and returns the transformed copy with its stats.
pub fn normalize(data: &Dataset, method: NormMethod) -> Result<(Dataset, NormStats)> {
    let stats = NormStats::fit(data.features().view(), method);
    let features = stats.apply(data.features().view())?;
    Ok((data.with_features(features)?, stats))
}

/// Shuffled train/test row indices, each part sorted ascending.
///
/// The permutation comes from a ChaCha8 generator seeded with `seed`.
pub fn split_indices(n: usize, train_fraction: f64, seed: u64) -> Result<(Vec<usize>, Vec<usize>)> {
    if !(train_fraction > 0.0 && train_fraction < 1.0) {
        return Err(Error::Config(format!("train fraction {train_fraction} not in (0, 1)")));
    }
    let n_train = (train_fraction * n as f64).round() as usize;
    if n_train == 0 || n_train >= n {
        return Err(Error::Config(format!(
            "train fraction {train_fraction} of {n} rows leaves an empty part"
        )));
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    let mut train = order[..n_train].to_vec();
    let mut test = order[n_train..].to_vec();
    train.sort_unstable();
    test.sort_unstable();
    Ok((train, test))
}

pub fn random_split(data: &Dataset, train_fraction: f64, seed: u64) -> Result<(Dataset, Dataset)> {
    let (train, test) = split_indices(data.num_examples(), train_fraction, seed)?;
    Ok((data.select(&train)?, data.select(&test)?))
}

/// Maps an on-disk label value to the internal encoding.
pub(crate) fn remap_label(v: f64) -> Option<i8> {
    if v == 1.0 {
        Some(1)
    } else if v == 0.0 || v == -1.0 {
        Some(-1)
    } else {
        None
    }
}
