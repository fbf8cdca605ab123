//! End-to-end training: normalize, cluster, build virtual examples, solve.

use std::collections::BTreeMap;
use std::str::FromStr;

use ndarray::Array2;
use serde::{Deserialize, Serialize};

use crate::augment::{kmeans_with, make_virtual_examples, Augmentation, KMeansConfig};
use crate::dataset::{normalize, Dataset, NormMethod, NormStats};
use crate::error::{Error, Result};
use crate::solver::{
    gaussian_sigma, Hyperparams, KernelBasis, KernelProblem, KernelSpec, KernelSystem, LinearProblem, LinearSystem,
    Model, Params,
};

/// Model family: the linear model, or the kernel model with a Gaussian kernel
/// whose bandwidth is the mean pairwise training distance.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum KernelKind {
    #[default]
    Gaussian,
    Linear,
}

impl FromStr for KernelKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "gaussian" | "rbf" => Ok(KernelKind::Gaussian),
            "linear" => Ok(KernelKind::Linear),
            other => Err(Error::Config(format!("unknown kernel {other:?}"))),
        }
    }
}

impl std::fmt::Display for KernelKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            KernelKind::Gaussian => "gaussian",
            KernelKind::Linear => "linear",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrainConfig {
    pub hyperparams: Hyperparams,
    pub kernel: KernelKind,
    pub normalization: NormMethod,
    pub kmeans: KMeansConfig,
    pub seed: u64,
}

impl TrainConfig {
    pub fn new(hyperparams: Hyperparams, kernel: KernelKind) -> Self {
        TrainConfig {
            hyperparams,
            kernel,
            normalization: NormMethod::default(),
            kmeans: KMeansConfig::default(),
            seed: 42,
        }
    }
}

/// A trained model plus the intermediate artifacts of its fit.
#[derive(Debug, Clone)]
pub struct Fitted {
    pub model: Model,
    pub augmentation: Augmentation,
    pub sigma: Option<f64>,
    /// Training data after normalization, as seen by the solver.
    pub normalized: Dataset,
}

impl Fitted {
    pub fn cluster_sizes(&self) -> Vec<usize> {
        self.augmentation.assignment.sizes()
    }

    pub fn predict_scores(&self, features: &Array2<f64>) -> Result<Array2<f64>> {
        self.model.predict_scores(features.view())
    }

    /// Objective value of the fitted parameters on the normalized training data.
    pub fn objective(&self, hp: &Hyperparams) -> Result<f64> {
        match &self.model {
            Model::Linear(m) => LinearProblem::new(&self.normalized, &self.augmentation)?.objective(
                &Params {
                    coef: m.weights.clone(),
                    bias: m.bias.clone(),
                },
                hp,
            ),
            Model::Kernel(m) => KernelProblem::new(&self.normalized, &self.augmentation, &m.spec)?.objective(
                &Params {
                    coef: m.coefficients.clone(),
                    bias: m.bias.clone(),
                },
                hp,
            ),
        }
    }
}

/// Fits on `train`; every statistic (normalization, clusters, bandwidth) comes
/// from `train` alone.
pub fn fit(train: &Dataset, config: &TrainConfig) -> Result<Fitted> {
    config.hyperparams.validate()?;
    FitCache::new(train, config.kernel, config.normalization, config.kmeans, config.seed)?.fit(&config.hyperparams)
}

enum System {
    Linear(LinearSystem),
    Kernel(KernelSystem),
}

/// Training-set work shared by every hyperparameter setting: normalization,
/// bandwidth and kernel basis up front, and one clustering per cluster count
/// on first use.
///
/// `FitCache::new(..).fit(hp)` is exactly [`fit`]; reusing one cache across a
/// grid only skips repeated work.
pub struct FitCache {
    normalized: Dataset,
    stats: NormStats,
    sigma: Option<f64>,
    basis: Option<KernelBasis>,
    kmeans: KMeansConfig,
    seed: u64,
    systems: BTreeMap<usize, (Augmentation, System)>,
}

impl FitCache {
    pub fn new(
        train: &Dataset,
        kernel: KernelKind,
        normalization: NormMethod,
        kmeans: KMeansConfig,
        seed: u64,
    ) -> Result<Self> {
        let (normalized, stats) = normalize(train, normalization)?;
        let (sigma, basis) = match kernel {
            KernelKind::Linear => (None, None),
            KernelKind::Gaussian => {
                let sigma = gaussian_sigma(normalized.features().view())?;
                let basis = KernelBasis::new(&normalized, &KernelSpec::gaussian(sigma)?)?;
                (Some(sigma), Some(basis))
            }
        };
        Ok(FitCache {
            normalized,
            stats,
            sigma,
            basis,
            kmeans,
            seed,
            systems: BTreeMap::new(),
        })
    }

    pub fn fit(&mut self, hp: &Hyperparams) -> Result<Fitted> {
        hp.validate()?;
        let c = hp.num_clusters;
        if c > self.normalized.num_examples() {
            return Err(Error::Config(format!(
                "{c} clusters requested but only {} training instances",
                self.normalized.num_examples()
            )));
        }
        if !self.systems.contains_key(&c) {
            let run = kmeans_with(self.normalized.features().view(), c, self.seed, &self.kmeans)?;
            let augmentation = make_virtual_examples(&self.normalized, &run.assignment)?;
            let system = match &self.basis {
                None => System::Linear(LinearSystem::new(&self.normalized, &augmentation)?),
                Some(basis) => System::Kernel(basis.system(&augmentation)?),
            };
            self.systems.insert(c, (augmentation, system));
        }
        let (augmentation, system) = &self.systems[&c];
        let mut model: Model = match system {
            System::Linear(s) => s.solve(hp)?.into(),
            System::Kernel(s) => s.solve(hp)?.into(),
        };
        model.set_norm_stats(self.stats.clone());
        Ok(Fitted {
            model,
            augmentation: augmentation.clone(),
            sigma: self.sigma,
            normalized: self.normalized.clone(),
        })
    }
}
