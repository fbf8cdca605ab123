use ndarray::{Array2, ArrayView1, ArrayView2, Axis};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Row count above which the bandwidth heuristic works on a fixed subsample.
pub const SIGMA_SUBSAMPLE: usize = 3000;
const SIGMA_SEED: u64 = 0x5eed_516a;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum KernelSpec {
    /// `exp(−‖a − b‖² / (2σ²))`
    Gaussian { sigma: f64 },
    /// `⟨a, b⟩`
    Linear,
}

impl KernelSpec {
    pub fn gaussian(sigma: f64) -> Result<Self> {
        let spec = KernelSpec::Gaussian { sigma };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            KernelSpec::Gaussian { sigma } if !(sigma > 0.0 && sigma.is_finite()) => {
                Err(Error::Config(format!("gaussian sigma {sigma} must be finite and > 0")))
            }
            _ => Ok(()),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            KernelSpec::Gaussian { .. } => "gaussian",
            KernelSpec::Linear => "linear",
        }
    }

    pub fn sigma(&self) -> Option<f64> {
        match *self {
            KernelSpec::Gaussian { sigma } => Some(sigma),
            KernelSpec::Linear => None,
        }
    }

    pub fn eval(&self, a: ArrayView1<'_, f64>, b: ArrayView1<'_, f64>) -> f64 {
        match *self {
            KernelSpec::Gaussian { sigma } => {
                let sq: f64 = a.iter().zip(b.iter()).map(|(x, y)| (x - y) * (x - y)).sum();
                (-sq / (2.0 * sigma * sigma)).exp()
            }
            KernelSpec::Linear => a.dot(&b),
        }
    }
}

/// Mean Euclidean distance over all unordered row pairs.
///
/// Above [`SIGMA_SUBSAMPLE`] rows the mean is taken over a fixed-seed random
/// subset of that many rows.
pub fn gaussian_sigma(features: ArrayView2<'_, f64>) -> Result<f64> {
    let n = features.nrows();
    if n < 2 {
        return Err(Error::Config(format!("bandwidth heuristic needs >= 2 rows, got {n}")));
    }
    let rows = if n > SIGMA_SUBSAMPLE {
        let mut rng = ChaCha8Rng::seed_from_u64(SIGMA_SEED);
        let mut idx = rand::seq::index::sample(&mut rng, n, SIGMA_SUBSAMPLE).into_vec();
        idx.sort_unstable();
        features.select(Axis(0), &idx)
    } else {
        features.to_owned()
    };
    let m = rows.nrows();
    let total: f64 = (0..m)
        .into_par_iter()
        .map(|i| {
            let a = rows.row(i);
            (i + 1..m)
                .map(|j| {
                    a.iter()
                        .zip(rows.row(j).iter())
                        .map(|(x, y)| (x - y) * (x - y))
                        .sum::<f64>()
                        .sqrt()
                })
                .sum::<f64>()
        })
        .collect::<Vec<_>>()
        .into_iter()
        .sum();
    let sigma = total / (m * (m - 1) / 2) as f64;
    if !(sigma > 0.0) {
        return Err(Error::DegenerateData("all instances coincide; pairwise distance is 0".into()));
    }
    Ok(sigma)
}

/// Entry (i, j) is `κ(a_i, b_j)`.
pub fn kernel_matrix(
    rows_a: ArrayView2<'_, f64>,
    rows_b: ArrayView2<'_, f64>,
    spec: &KernelSpec,
) -> Result<Array2<f64>> {
    if rows_a.ncols() != rows_b.ncols() {
        return Err(Error::Validation(format!(
            "kernel inputs have {} and {} columns",
            rows_a.ncols(),
            rows_b.ncols()
        )));
    }
    spec.validate()?;
    if let KernelSpec::Linear = spec {
        return Ok(rows_a.dot(&rows_b.t()));
    }
    let (m, n) = (rows_a.nrows(), rows_b.nrows());
    let mut out = Array2::zeros((m, n));
    out.axis_iter_mut(Axis(0))
        .into_par_iter()
        .enumerate()
        .for_each(|(i, mut row)| {
            let a = rows_a.row(i);
            for j in 0..n {
                row[j] = spec.eval(a, rows_b.row(j));
            }
        });
    Ok(out)
}
