//! Experimental protocol: k-fold cross-validated grid search inside repeated
//! random train/test splits.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::time::Instant;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::augment::KMeansConfig;
use crate::dataset::{split_indices, Dataset, NormMethod};
use crate::error::{Error, Result};
use crate::metrics::{evaluate, MetricKind, MetricReport};
use crate::pipeline::{fit, FitCache, KernelKind, TrainConfig};
use crate::solver::Hyperparams;

/// Candidate values for every hyperparameter.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub alpha_values: Vec<f64>,
    pub beta_values: Vec<f64>,
    pub gamma_values: Vec<f64>,
    pub cluster_values: Vec<usize>,
    pub kernel_kind: KernelKind,
}

fn powers_of_ten(lo: i32, hi: i32) -> Vec<f64> {
    (lo..=hi).map(|e| 10f64.powi(e)).collect()
}

impl GridSpec {
    /// α, β, γ ∈ {10⁻³, …, 10³} and c ∈ {2³, …, 2⁸}.
    pub fn full() -> Self {
        GridSpec {
            alpha_values: powers_of_ten(-3, 3),
            beta_values: powers_of_ten(-3, 3),
            gamma_values: powers_of_ten(-3, 3),
            cluster_values: (3..=8).map(|e| 1usize << e).collect(),
            kernel_kind: KernelKind::Gaussian,
        }
    }

    /// 3 x 3 x 3 x 3 grid used by default at desk scale.
    pub fn reduced() -> Self {
        GridSpec {
            alpha_values: powers_of_ten(-2, 0),
            beta_values: powers_of_ten(-1, 1),
            gamma_values: powers_of_ten(-2, 0),
            cluster_values: vec![8, 32, 128],
            kernel_kind: KernelKind::Gaussian,
        }
    }

    pub fn single(hp: Hyperparams, kernel_kind: KernelKind) -> Self {
        GridSpec {
            alpha_values: vec![hp.alpha],
            beta_values: vec![hp.beta],
            gamma_values: vec![hp.gamma],
            cluster_values: vec![hp.num_clusters],
            kernel_kind,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.alpha_values.is_empty()
            || self.beta_values.is_empty()
            || self.gamma_values.is_empty()
            || self.cluster_values.is_empty()
        {
            return Err(Error::Config("every grid sequence must be non-empty".into()));
        }
        for hp in self.points() {
            hp.validate()?;
        }
        Ok(())
    }

    /// Grid points, α outermost and c innermost.
    pub fn points(&self) -> Vec<Hyperparams> {
        let mut out = Vec::new();
        for &alpha in &self.alpha_values {
            for &beta in &self.beta_values {
                for &gamma in &self.gamma_values {
                    for &num_clusters in &self.cluster_values {
                        out.push(Hyperparams {
                            alpha,
                            beta,
                            gamma,
                            num_clusters,
                        });
                    }
                }
            }
        }
        out
    }

    /// Reads `alpha`, `beta`, `gamma`, `clusters` and `kernel` keys, keeping
    /// `self`'s values for absent keys.
    pub fn with_overrides(mut self, config: &BTreeMap<String, String>) -> Result<Self> {
        if let Some(v) = config.get("alpha") {
            self.alpha_values = parse_list(v)?;
        }
        if let Some(v) = config.get("beta") {
            self.beta_values = parse_list(v)?;
        }
        if let Some(v) = config.get("gamma") {
            self.gamma_values = parse_list(v)?;
        }
        if let Some(v) = config.get("clusters") {
            self.cluster_values = parse_list(v)?;
        }
        if let Some(v) = config.get("kernel") {
            self.kernel_kind = v.parse()?;
        }
        self.validate()?;
        Ok(self)
    }
}

/// Parses `key = value` lines; `#` starts a comment line.
pub fn parse_key_values(text: &str) -> Result<BTreeMap<String, String>> {
    let mut out = BTreeMap::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| Error::Config(format!("config line {}: expected key = value", idx + 1)))?;
        out.insert(key.trim().replace('-', "_"), value.trim().to_string());
    }
    Ok(out)
}

/// Comma-separated values.
pub fn parse_list<T: std::str::FromStr>(text: &str) -> Result<Vec<T>> {
    text.split(',')
        .map(|s| {
            s.trim()
                .parse::<T>()
                .map_err(|_| Error::Config(format!("cannot parse {:?} in list {text:?}", s.trim())))
        })
        .collect()
}

/// Everything about the protocol that is not a searched hyperparameter.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProtocolConfig {
    pub folds: usize,
    pub select_metric: MetricKind,
    pub normalization: NormMethod,
    pub kmeans: KMeansConfig,
}

impl Default for ProtocolConfig {
    fn default() -> Self {
        ProtocolConfig {
            folds: 5,
            select_metric: MetricKind::AveragePrecision,
            normalization: NormMethod::ZScore,
            kmeans: KMeansConfig::default(),
        }
    }
}

/// SplitMix64 step: deterministic sub-seed for `(base, stream)`.
pub fn derive_seed(base: u64, stream: u64) -> u64 {
    let mut z = base ^ stream.wrapping_mul(0x9e37_79b9_7f4a_7c15);
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

const FOLD_STREAM: u64 = 1;
const KMEANS_STREAM: u64 = 2;
const SEARCH_STREAM: u64 = 3;

/// Validation-row indices of each fold; fold sizes differ by at most one.
pub fn fold_indices(n: usize, folds: usize, seed: u64) -> Result<Vec<Vec<usize>>> {
    if folds < 2 || folds > n {
        return Err(Error::Config(format!("{folds} folds over {n} rows: need 2 <= folds <= n")));
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut ChaCha8Rng::seed_from_u64(derive_seed(seed, FOLD_STREAM)));
    let (base, extra) = (n / folds, n % folds);
    let mut start = 0;
    Ok((0..folds)
        .map(|f| {
            let len = base + usize::from(f < extra);
            let mut part = order[start..start + len].to_vec();
            part.sort_unstable();
            start += len;
            part
        })
        .collect())
}

fn train_config(hp: Hyperparams, kernel: KernelKind, protocol: &ProtocolConfig, seed: u64) -> TrainConfig {
    TrainConfig {
        hyperparams: hp,
        kernel,
        normalization: protocol.normalization,
        kmeans: protocol.kmeans,
        seed: derive_seed(seed, KMEANS_STREAM),
    }
}

/// `select_metric` on every fold for every point, indexed `[point][fold]`.
///
/// Each fold shares one [`FitCache`] across the points, so normalization,
/// bandwidth, kernel factorization and clustering are computed once per fold
/// (and cluster count) instead of once per point.
fn fold_scores(
    train: &Dataset,
    points: &[Hyperparams],
    kernel: KernelKind,
    protocol: &ProtocolConfig,
    seed: u64,
) -> Result<Vec<Vec<Result<f64>>>> {
    let n = train.num_examples();
    let folds = fold_indices(n, protocol.folds, seed)?;
    let kmeans_seed = derive_seed(seed, KMEANS_STREAM);
    let per_fold: Vec<Vec<Result<f64>>> = folds
        .par_iter()
        .map(|val| -> Result<Vec<Result<f64>>> {
            let mut is_val = vec![false; n];
            for &i in val {
                is_val[i] = true;
            }
            let fit_rows: Vec<usize> = (0..n).filter(|&i| !is_val[i]).collect();
            let held_out = train.select(val)?;
            let mut cache = FitCache::new(
                &train.select(&fit_rows)?,
                kernel,
                protocol.normalization,
                protocol.kmeans,
                kmeans_seed,
            )?;
            Ok(points
                .iter()
                .map(|hp| {
                    let scores = cache.fit(hp)?.predict_scores(held_out.features())?;
                    protocol.select_metric.compute(scores.view(), held_out.labels().view())
                })
                .collect())
        })
        .collect::<Result<_>>()?;
    let mut by_point: Vec<Vec<Result<f64>>> = points.iter().map(|_| Vec::with_capacity(folds.len())).collect();
    for fold in per_fold {
        for (slot, score) in by_point.iter_mut().zip(fold) {
            slot.push(score);
        }
    }
    Ok(by_point)
}

/// Per-fold validation scores of `select_metric`.
pub fn cross_validate_folds(
    train: &Dataset,
    hp: &Hyperparams,
    kernel: KernelKind,
    protocol: &ProtocolConfig,
    seed: u64,
) -> Result<Vec<f64>> {
    fold_scores(train, std::slice::from_ref(hp), kernel, protocol, seed)?
        .pop()
        .expect("one point")
        .into_iter()
        .collect()
}

/// Mean validation score of `select_metric` over `folds` folds.
pub fn cross_validate(
    train: &Dataset,
    hp: &Hyperparams,
    kernel: KernelKind,
    folds: usize,
    seed: u64,
    select_metric: MetricKind,
) -> Result<f64> {
    let protocol = ProtocolConfig {
        folds,
        select_metric,
        ..ProtocolConfig::default()
    };
    let scores = cross_validate_folds(train, hp, kernel, &protocol, seed)?;
    Ok(scores.iter().sum::<f64>() / scores.len() as f64)
}

/// Cross-validation outcome for one grid point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridPointResult {
    pub params: Hyperparams,
    pub fold_scores: Vec<f64>,
    pub mean_score: Option<f64>,
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridSearchResult {
    pub best: Hyperparams,
    pub best_score: Option<f64>,
    pub surface: Vec<GridPointResult>,
}

fn lexicographic(a: &Hyperparams, b: &Hyperparams) -> std::cmp::Ordering {
    a.alpha
        .total_cmp(&b.alpha)
        .then(a.beta.total_cmp(&b.beta))
        .then(a.gamma.total_cmp(&b.gamma))
        .then(a.num_clusters.cmp(&b.num_clusters))
}

/// Best grid point by mean CV score; ties go to the smallest `(α, β, γ, c)`.
///
/// Every point sees the same folds and clustering seed, so a point's score does
/// not depend on where it sits in the grid. A single-point grid is returned
/// without cross-validation.
pub fn grid_search(
    train: &Dataset,
    grid: &GridSpec,
    protocol: &ProtocolConfig,
    seed: u64,
) -> Result<GridSearchResult> {
    grid.validate()?;
    let points = grid.points();
    if points.len() == 1 {
        return Ok(GridSearchResult {
            best: points[0],
            best_score: None,
            surface: Vec::new(),
        });
    }
    let surface: Vec<GridPointResult> = fold_scores(train, &points, grid.kernel_kind, protocol, seed)?
        .into_iter()
        .zip(&points)
        .map(|(scores, hp)| match scores.into_iter().collect::<Result<Vec<f64>>>() {
            Ok(fold_scores) => GridPointResult {
                params: *hp,
                mean_score: Some(fold_scores.iter().sum::<f64>() / fold_scores.len() as f64),
                fold_scores,
                error: None,
            },
            Err(e) => GridPointResult {
                params: *hp,
                fold_scores: Vec::new(),
                mean_score: None,
                error: Some(e.to_string()),
            },
        })
        .collect();

    let higher = protocol.select_metric.higher_is_better();
    let best = surface
        .iter()
        .filter_map(|r| r.mean_score.map(|s| (r, s)))
        .min_by(|(a, sa), (b, sb)| {
            let by_score = if higher { sb.total_cmp(sa) } else { sa.total_cmp(sb) };
            by_score.then_with(|| lexicographic(&a.params, &b.params))
        })
        .map(|(r, s)| (r.params, s));
    match best {
        Some((best, score)) => Ok(GridSearchResult {
            best,
            best_score: Some(score),
            surface,
        }),
        None => Err(Error::Config(format!(
            "every grid point failed; first error: {}",
            surface[0].error.as_deref().unwrap_or("unknown")
        ))),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialResult {
    pub seed: u64,
    pub chosen_params: Hyperparams,
    pub metrics: MetricReport,
    pub fit_seconds: f64,
    pub predict_seconds: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MeanStd {
    pub mean: f64,
    pub std: f64,
}

/// Mean and sample standard deviation (0 for a single value).
pub fn mean_std(values: &[f64]) -> MeanStd {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let std = if values.len() > 1 {
        (values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt()
    } else {
        0.0
    };
    MeanStd { mean, std }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub trials: Vec<TrialResult>,
    /// Keyed by metric name.
    pub summary: BTreeMap<String, MeanStd>,
    /// Grid-search surfaces, one per trial (empty for single-point grids).
    #[serde(skip)]
    pub surfaces: Vec<Vec<GridPointResult>>,
}

impl RunReport {
    /// One row per grid point per fold per trial.
    pub fn surface_csv(&self) -> String {
        let mut out = String::from("trial,alpha,beta,gamma,clusters,fold,score,error\n");
        for (t, surface) in self.surfaces.iter().enumerate() {
            for point in surface {
                let p = &point.params;
                if let Some(err) = &point.error {
                    let _ = writeln!(
                        out,
                        "{t},{},{},{},{},,,\"{}\"",
                        p.alpha,
                        p.beta,
                        p.gamma,
                        p.num_clusters,
                        err.replace('"', "'")
                    );
                }
                for (f, s) in point.fold_scores.iter().enumerate() {
                    let _ = writeln!(out, "{t},{},{},{},{},{f},{s},", p.alpha, p.beta, p.gamma, p.num_clusters);
                }
            }
        }
        out
    }

    /// Metric table in `mean±std` form.
    pub fn summary_table(&self) -> String {
        let mut out = String::new();
        for m in MetricKind::ALL {
            if let Some(ms) = self.summary.get(m.name()) {
                let arrow = if m.higher_is_better() { "↑" } else { "↓" };
                let _ = writeln!(out, "{:<20}{:.3}±{:.3}", format!("{}{arrow}", m.name()), ms.mean, ms.std);
            }
        }
        out
    }
}

/// Trial `t` splits with seed `base_seed + t`, grid-searches on the training
/// part, refits the chosen point on the whole training part, and scores the
/// held-out part.
pub fn repeated_trials(
    data: &Dataset,
    grid: &GridSpec,
    protocol: &ProtocolConfig,
    repeats: usize,
    train_fraction: f64,
    base_seed: u64,
) -> Result<RunReport> {
    if repeats == 0 {
        return Err(Error::Config("repeats must be >= 1".into()));
    }
    grid.validate()?;
    let mut trials = Vec::with_capacity(repeats);
    let mut surfaces = Vec::with_capacity(repeats);
    for t in 0..repeats {
        let seed = base_seed.wrapping_add(t as u64);
        let run_trial = || -> Result<(TrialResult, Vec<GridPointResult>)> {
            let (train_idx, test_idx) = split_indices(data.num_examples(), train_fraction, seed)?;
            let train = data.select(&train_idx)?;
            let test = data.select(&test_idx)?;
            let search = grid_search(&train, grid, protocol, derive_seed(seed, SEARCH_STREAM))?;

            let started = Instant::now();
            let fitted = fit(&train, &train_config(search.best, grid.kernel_kind, protocol, seed))?;
            let fit_seconds = started.elapsed().as_secs_f64();
            let started = Instant::now();
            let scores = fitted.predict_scores(test.features())?;
            let predict_seconds = started.elapsed().as_secs_f64();
            let metrics = evaluate(scores.view(), test.labels().view())?;
            Ok((
                TrialResult {
                    seed,
                    chosen_params: search.best,
                    metrics,
                    fit_seconds,
                    predict_seconds,
                },
                search.surface,
            ))
        };
        let (trial, surface) = run_trial().map_err(|e| match e {
            Error::Config(m) => Error::Config(format!("trial {t} (seed {seed}): {m}")),
            Error::Numerical(m) => Error::Numerical(format!("trial {t} (seed {seed}): {m}")),
            Error::UndefinedMetric(m) => Error::UndefinedMetric(format!("trial {t} (seed {seed}): {m}")),
            other => other,
        })?;
        trials.push(trial);
        surfaces.push(surface);
    }
    let summary = MetricKind::ALL
        .into_iter()
        .map(|m| {
            let values: Vec<f64> = trials.iter().map(|t| m.get(&t.metrics)).collect();
            (m.name().to_string(), mean_std(&values))
        })
        .collect();
    Ok(RunReport {
        trials,
        summary,
        surfaces,
    })
}
