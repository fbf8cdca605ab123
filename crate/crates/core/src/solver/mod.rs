//! The regularized least-squares model on real plus virtual examples.
//!
//! For features `X`, labels `Y`, centers `Z`, soft labels `T` and expanded
//! centers `Ẑ`, the linear model minimizes
//!
//! ```text
//! ½‖XW + 1bᵀ − Y‖² + (α/2)‖ZW + 1bᵀ − T‖² + (β/2)‖W‖² + (γ/2)‖(X − Ẑ)W‖²
//! ```
//!
//! and the kernel model replaces `XW` by `KA` (and `ZW`, `ẐW` by `K̃A`, `K̂A`)
//! with `‖W‖²` becoming `tr(AᵀKA)`. Both are solved in closed form.

mod closed_form;
mod kernel;
mod kernelized;
mod linear;
mod model_file;

use ndarray::{Array1, Array2, ArrayView2};
use serde::{Deserialize, Serialize};

use crate::augment::Augmentation;
use crate::dataset::Dataset;
use crate::error::{Error, Result};

pub use self::kernel::{gaussian_sigma, kernel_matrix, KernelSpec, SIGMA_SUBSAMPLE};
pub use self::kernelized::{solve_kernel, KernelBasis, KernelModel, KernelProblem, KernelSystem, PIVOT_TOLERANCE};
pub use self::linear::{solve_linear, LinearModel, LinearProblem, LinearSystem};
pub use self::model_file::{Model, FORMAT_VERSION};

/// Trade-offs for the virtual-example loss (`alpha`), the weight penalty
/// (`beta`), the cluster-output penalty (`gamma`), and the cluster count.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Hyperparams {
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
    pub num_clusters: usize,
}

impl Hyperparams {
    pub fn new(alpha: f64, beta: f64, gamma: f64, num_clusters: usize) -> Result<Self> {
        let hp = Hyperparams {
            alpha,
            beta,
            gamma,
            num_clusters,
        };
        hp.validate()?;
        Ok(hp)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.alpha >= 0.0 && self.alpha.is_finite()) {
            return Err(Error::Config(format!("alpha = {} must be finite and >= 0", self.alpha)));
        }
        if !(self.beta > 0.0 && self.beta.is_finite()) {
            return Err(Error::Config(format!("beta = {} must be finite and > 0", self.beta)));
        }
        if !(self.gamma >= 0.0 && self.gamma.is_finite()) {
            return Err(Error::Config(format!("gamma = {} must be finite and >= 0", self.gamma)));
        }
        if self.num_clusters == 0 {
            return Err(Error::Config("cluster count must be >= 1".into()));
        }
        Ok(())
    }
}

/// Model parameters: `coef` is `W` (d x q) for the linear form or `A` (n x q)
/// for the kernel form.
#[derive(Debug, Clone, PartialEq)]
pub struct Params {
    pub coef: Array2<f64>,
    pub bias: Array1<f64>,
}

/// Objective value at `params`. `spec = None` selects the linear form.
pub fn objective(
    params: &Params,
    data: &Dataset,
    aug: &Augmentation,
    hp: &Hyperparams,
    spec: Option<&KernelSpec>,
) -> Result<f64> {
    match spec {
        None => LinearProblem::new(data, aug)?.objective(params, hp),
        Some(spec) => KernelProblem::new(data, aug, spec)?.objective(params, hp),
    }
}

/// Analytic gradient `(∂/∂coef, ∂/∂bias)` at `params`.
pub fn gradient(
    params: &Params,
    data: &Dataset,
    aug: &Augmentation,
    hp: &Hyperparams,
    spec: Option<&KernelSpec>,
) -> Result<(Array2<f64>, Array1<f64>)> {
    match spec {
        None => LinearProblem::new(data, aug)?.gradient(params, hp),
        Some(spec) => KernelProblem::new(data, aug, spec)?.gradient(params, hp),
    }
}

/// Elementwise sign with `sign(0) = +1`.
pub fn predict_labels(scores: ArrayView2<'_, f64>) -> Array2<i8> {
    scores.mapv(|v| if v >= 0.0 { 1 } else { -1 })
}

fn check_bias(bias: &Array1<f64>, q: usize) -> Result<()> {
    if bias.len() != q {
        return Err(Error::Validation(format!("bias has length {}, expected {q}", bias.len())));
    }
    Ok(())
}
