//! Multi-label learning with cluster-center data augmentation.
//!
//! The training instances are grouped with k-means; every cluster contributes
//! a virtual example whose features are the cluster mean and whose labels are
//! the mean of the members' `-1/+1` label vectors. A regularized least-squares
//! model (linear, or kernelized through the representer form) is then fitted in
//! closed form on the real and virtual examples jointly, with an extra penalty
//! tying each instance's output to its cluster center's output.
//!
//! Modules:
//! - [`dataset`]: ARFF/CSV loading, normalization, splits, dataset statistics.
//! - [`augment`]: k-means and virtual-example construction.
//! - [`solver`]: objectives, gradients, closed-form solvers, prediction, model files.
//! - [`metrics`]: one-error, Hamming loss, ranking loss, coverage, average precision.
//! - [`stats`]: average ranks, Friedman statistics, Nemenyi critical difference.
//! - [`harness`]: cross-validated grid search and repeated random-split trials.
//! - [`synthetic`]: a Gaussian-blob multi-label generator.

pub mod augment;
pub mod dataset;
mod error;
pub mod harness;
pub mod linalg;
pub mod metrics;
pub mod pipeline;
pub mod solver;
pub mod stats;
pub mod synthetic;

pub use error::{Error, ErrorClass, Result};

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    pub struct Introduction;
    #[doc = include_str!("../../../book/src/augmentation.md")]
    pub struct Augmentation;
    #[doc = include_str!("../../../book/src/solver.md")]
    pub struct Solver;
    #[doc = include_str!("../../../book/src/kernel.md")]
    pub struct Kernel;
    #[doc = include_str!("../../../book/src/metrics.md")]
    pub struct Metrics;
    #[doc = include_str!("../../../book/src/stats.md")]
    pub struct Stats;
    #[doc = include_str!("../../../book/src/protocol.md")]
    pub struct Protocol;
    #[doc = include_str!("../../../book/src/cli.md")]
    pub struct Cli;
}
