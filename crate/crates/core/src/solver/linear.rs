use ndarray::{Array1, Array2, ArrayView2};
use serde::{Deserialize, Serialize};

use super::closed_form::ClosedForm;
use super::{check_bias, Hyperparams, Params};
use crate::augment::{expand_centers, Augmentation};
use crate::dataset::{Dataset, NormStats};
use crate::error::{Error, Result};

/// Linear scorer `x ↦ Wᵀ norm(x) + b`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinearModel {
    pub weights: Array2<f64>,
    pub bias: Array1<f64>,
    pub norm_stats: NormStats,
    /// Number of training rows the model was fitted on.
    pub train_rows: usize,
}

impl LinearModel {
    pub fn num_features(&self) -> usize {
        self.weights.nrows()
    }

    pub fn num_labels(&self) -> usize {
        self.weights.ncols()
    }

    /// Scores for raw (unnormalized) feature rows.
    pub fn predict_scores(&self, features: ArrayView2<'_, f64>) -> Result<Array2<f64>> {
        if features.ncols() != self.num_features() {
            return Err(Error::Validation(format!(
                "model expects {} features, got {}",
                self.num_features(),
                features.ncols()
            )));
        }
        let x = self.norm_stats.apply(features)?;
        Ok(x.dot(&self.weights) + &self.bias)
    }
}

/// The linear objective's data: `X`, `Z`, `Ẑ`, `Y`, `T`.
#[derive(Debug, Clone)]
pub struct LinearProblem {
    pub x: Array2<f64>,
    pub z: Array2<f64>,
    pub z_hat: Array2<f64>,
    pub y: Array2<f64>,
    pub t: Array2<f64>,
}

impl LinearProblem {
    pub fn new(data: &Dataset, aug: &Augmentation) -> Result<Self> {
        if aug.assignment.len() != data.num_examples() {
            return Err(Error::Validation("augmentation does not match dataset rows".into()));
        }
        if aug.centers.ncols() != data.num_features() || aug.soft_labels.ncols() != data.num_labels() {
            return Err(Error::Validation("augmentation does not match dataset width".into()));
        }
        Ok(LinearProblem {
            x: data.features().clone(),
            z: aug.centers.clone(),
            z_hat: expand_centers(aug),
            y: data.labels_f64(),
            t: aug.soft_labels.clone(),
        })
    }

    fn check(&self, params: &Params) -> Result<()> {
        let (d, q) = (self.x.ncols(), self.y.ncols());
        if params.coef.dim() != (d, q) {
            return Err(Error::Validation(format!(
                "weights are {:?}, expected ({d}, {q})",
                params.coef.dim()
            )));
        }
        check_bias(&params.bias, q)
    }

    /// Residuals `XW + 1bᵀ − Y`, `ZW + 1bᵀ − T` and `(X − Ẑ)W`.
    fn residuals(&self, params: &Params) -> (Array2<f64>, Array2<f64>, Array2<f64>) {
        let w = &params.coef;
        let r_real = self.x.dot(w) + &params.bias - &self.y;
        let r_virtual = self.z.dot(w) + &params.bias - &self.t;
        let r_cluster = (&self.x - &self.z_hat).dot(w);
        (r_real, r_virtual, r_cluster)
    }

    pub fn objective(&self, params: &Params, hp: &Hyperparams) -> Result<f64> {
        self.check(params)?;
        let (r1, r2, r3) = self.residuals(params);
        let sq = |m: &Array2<f64>| m.iter().map(|v| v * v).sum::<f64>();
        Ok(0.5 * sq(&r1) + 0.5 * hp.alpha * sq(&r2) + 0.5 * hp.beta * sq(&params.coef) + 0.5 * hp.gamma * sq(&r3))
    }

    pub fn gradient(&self, params: &Params, hp: &Hyperparams) -> Result<(Array2<f64>, Array1<f64>)> {
        self.check(params)?;
        let (r1, r2, r3) = self.residuals(params);
        let diff = &self.x - &self.z_hat;
        let mut grad_w = self.x.t().dot(&r1);
        grad_w.scaled_add(hp.alpha, &self.z.t().dot(&r2));
        grad_w.scaled_add(hp.beta, &params.coef);
        grad_w.scaled_add(hp.gamma, &diff.t().dot(&r3));
        let grad_b = r1.sum_axis(ndarray::Axis(0)) + hp.alpha * &r2.sum_axis(ndarray::Axis(0));
        Ok((grad_w, grad_b))
    }
}

/// The parts of the linear closed form that do not depend on `(α, β, γ)`.
///
/// Build once per dataset and augmentation, then [`solve`](Self::solve) for
/// each hyperparameter setting.
#[derive(Debug, Clone)]
pub struct LinearSystem {
    system: ClosedForm,
    d: usize,
    n: usize,
}

impl LinearSystem {
    pub fn new(data: &Dataset, aug: &Augmentation) -> Result<Self> {
        let problem = LinearProblem::new(data, aug)?;
        let diff = &problem.x - &problem.z_hat;
        Ok(LinearSystem {
            system: ClosedForm::new(
                problem.x.view(),
                problem.z.view(),
                diff.view(),
                problem.y.view(),
                problem.t.view(),
            ),
            d: data.num_features(),
            n: data.num_examples(),
        })
    }

    pub fn solve(&self, hp: &Hyperparams) -> Result<LinearModel> {
        hp.validate()?;
        let (weights, bias) = self.system.solve(hp)?;
        if weights.iter().chain(bias.iter()).any(|v| !v.is_finite()) {
            return Err(Error::Numerical("non-finite weights; increase beta".into()));
        }
        Ok(LinearModel {
            weights,
            bias,
            norm_stats: NormStats::identity(self.d),
            train_rows: self.n,
        })
    }
}

/// Closed-form minimizer of the linear objective on already-normalized data.
///
/// The returned model carries identity normalization; callers that normalized
/// the data replace `norm_stats` with the fitted statistics.
pub fn solve_linear(data: &Dataset, aug: &Augmentation, hp: &Hyperparams) -> Result<LinearModel> {
    hp.validate()?;
    LinearSystem::new(data, aug)?.solve(hp)
}
