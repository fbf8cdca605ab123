//! Isotropic Gaussian blobs with per-blob label templates.
//!
//! Each blob gets a random center and a random `-1/+1` label template.
//! Instance `i` belongs to blob `i mod blobs`; its features are the blob
//! center plus isotropic noise and its labels are the template with every
//! entry flipped independently with probability `flip_prob`.

use ndarray::{Array1, Array2};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::dataset::Dataset;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BlobConfig {
    pub n: usize,
    pub d: usize,
    pub q: usize,
    pub blobs: usize,
    pub flip_prob: f64,
    /// Standard deviation of the blob-center coordinates.
    pub center_spread: f64,
    /// Standard deviation of the per-instance noise.
    pub blob_std: f64,
    /// Probability that a template entry is +1.
    pub label_density: f64,
}

impl Default for BlobConfig {
    fn default() -> Self {
        BlobConfig {
            n: 400,
            d: 10,
            q: 6,
            blobs: 8,
            flip_prob: 0.05,
            center_spread: 1.5,
            blob_std: 1.0,
            label_density: 0.4,
        }
    }
}

pub fn generate(config: &BlobConfig, seed: u64) -> Result<Dataset> {
    let BlobConfig {
        n,
        d,
        q,
        blobs,
        flip_prob,
        center_spread,
        blob_std,
        label_density,
    } = *config;
    if n == 0 || d == 0 || q == 0 || blobs == 0 {
        return Err(Error::Config("n, d, q and blobs must all be >= 1".into()));
    }
    for (name, p) in [("flip_prob", flip_prob), ("label_density", label_density)] {
        if !(0.0..=1.0).contains(&p) {
            return Err(Error::Config(format!("{name} = {p} is not a probability")));
        }
    }
    let center_dist = Normal::new(0.0, center_spread)
        .map_err(|e| Error::Config(format!("center_spread: {e}")))?;
    let noise = Normal::new(0.0, blob_std).map_err(|e| Error::Config(format!("blob_std: {e}")))?;

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let centers = Array2::from_shape_fn((blobs, d), |_| center_dist.sample(&mut rng));
    let templates: Vec<Array1<i8>> = (0..blobs)
        .map(|_| Array1::from_shape_fn(q, |_| if rng.random_bool(label_density) { 1 } else { -1 }))
        .collect();

    let mut features = Array2::zeros((n, d));
    let mut labels = Array2::zeros((n, q));
    for i in 0..n {
        let b = i % blobs;
        for j in 0..d {
            features[[i, j]] = centers[[b, j]] + noise.sample(&mut rng);
        }
        for k in 0..q {
            let v = templates[b][k];
            labels[[i, k]] = if rng.random_bool(flip_prob) { -v } else { v };
        }
    }
    Dataset::new(features, labels)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn shape_and_determinism() {
        let cfg = BlobConfig::default();
        let a = generate(&cfg, 9).unwrap();
        assert_eq!((a.num_examples(), a.num_features(), a.num_labels()), (400, 10, 6));
        assert_eq!(a, generate(&cfg, 9).unwrap());
        assert_ne!(a, generate(&cfg, 10).unwrap());
    }

    #[test]
    fn no_flips_means_blob_members_share_labels() {
        let cfg = BlobConfig { n: 40, blobs: 4, flip_prob: 0.0, ..BlobConfig::default() };
        let data = generate(&cfg, 3).unwrap();
        for i in 4..40 {
            assert_eq!(data.labels().row(i), data.labels().row(i % 4));
        }
    }
}
