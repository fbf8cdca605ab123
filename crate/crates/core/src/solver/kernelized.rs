use ndarray::{Array1, Array2, ArrayView2, Axis};
use serde::{Deserialize, Serialize};

use super::kernel::{kernel_matrix, KernelSpec};
use super::closed_form::ClosedForm;
use super::{check_bias, Hyperparams, Params};
use crate::augment::Augmentation;
use crate::dataset::{Dataset, NormStats};
use crate::error::{Error, Result};
use crate::linalg::{back_substitute_transposed, forward_substitute, PivotedCholesky};

/// Relative diagonal threshold at which the kernel factorization stops adding pivots.
pub const PIVOT_TOLERANCE: f64 = 1e-12;

/// Kernel scorer `x ↦ Σᵢ κ(norm(x), xᵢ) aᵢ + b`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KernelModel {
    pub coefficients: Array2<f64>,
    pub bias: Array1<f64>,
    pub spec: KernelSpec,
    pub train_features: Array2<f64>,
    pub norm_stats: NormStats,
}

impl KernelModel {
    pub fn num_features(&self) -> usize {
        self.train_features.ncols()
    }

    pub fn num_labels(&self) -> usize {
        self.coefficients.ncols()
    }

    pub fn predict_scores(&self, features: ArrayView2<'_, f64>) -> Result<Array2<f64>> {
        if features.ncols() != self.num_features() {
            return Err(Error::Validation(format!(
                "model expects {} features, got {}",
                self.num_features(),
                features.ncols()
            )));
        }
        let x = self.norm_stats.apply(features)?;
        let k = kernel_matrix(x.view(), self.train_features.view(), &self.spec)?;
        Ok(k.dot(&self.coefficients) + &self.bias)
    }
}

/// The kernel objective's data: `K` (n x n), `K̃` (c x n), `K̂` (n x n), `Y`, `T`.
///
/// `K̂` is `K̃` with rows gathered through the cluster assignment.
#[derive(Debug, Clone)]
pub struct KernelProblem {
    pub k: Array2<f64>,
    pub k_tilde: Array2<f64>,
    pub k_hat: Array2<f64>,
    pub y: Array2<f64>,
    pub t: Array2<f64>,
}

impl KernelProblem {
    pub fn new(data: &Dataset, aug: &Augmentation, spec: &KernelSpec) -> Result<Self> {
        if aug.assignment.len() != data.num_examples() {
            return Err(Error::Validation("augmentation does not match dataset rows".into()));
        }
        let x = data.features().view();
        let k = kernel_matrix(x, x, spec)?;
        let k_tilde = kernel_matrix(aug.centers.view(), x, spec)?;
        let k_hat = k_tilde.select(Axis(0), aug.assignment.as_slice());
        Ok(KernelProblem {
            k,
            k_tilde,
            k_hat,
            y: data.labels_f64(),
            t: aug.soft_labels.clone(),
        })
    }

    fn check(&self, params: &Params) -> Result<()> {
        let (n, q) = (self.k.nrows(), self.y.ncols());
        if params.coef.dim() != (n, q) {
            return Err(Error::Validation(format!(
                "coefficients are {:?}, expected ({n}, {q})",
                params.coef.dim()
            )));
        }
        check_bias(&params.bias, q)
    }

    pub fn objective(&self, params: &Params, hp: &Hyperparams) -> Result<f64> {
        self.check(params)?;
        let a = &params.coef;
        let r1 = self.k.dot(a) + &params.bias - &self.y;
        let r2 = self.k_tilde.dot(a) + &params.bias - &self.t;
        let r3 = (&self.k - &self.k_hat).dot(a);
        let sq = |m: &Array2<f64>| m.iter().map(|v| v * v).sum::<f64>();
        let trace_aka: f64 = (a * &self.k.dot(a)).sum();
        Ok(0.5 * sq(&r1) + 0.5 * hp.alpha * sq(&r2) + 0.5 * hp.beta * trace_aka + 0.5 * hp.gamma * sq(&r3))
    }

    /// Gradient of the kernel objective, differentiated directly:
    /// `∇A = Kᵀ R₁ + α K̃ᵀ R₂ + β ½(K + Kᵀ) A + γ EᵀE A`, `∇b = R₁ᵀ1 + α R₂ᵀ1`
    /// with `E = K − K̂`.
    pub fn gradient(&self, params: &Params, hp: &Hyperparams) -> Result<(Array2<f64>, Array1<f64>)> {
        self.check(params)?;
        let a = &params.coef;
        let r1 = self.k.dot(a) + &params.bias - &self.y;
        let r2 = self.k_tilde.dot(a) + &params.bias - &self.t;
        let e = &self.k - &self.k_hat;
        let mut grad_a = self.k.t().dot(&r1);
        grad_a.scaled_add(hp.alpha, &self.k_tilde.t().dot(&r2));
        let sym = (&self.k + &self.k.t()) * 0.5;
        grad_a.scaled_add(hp.beta, &sym.dot(a));
        grad_a.scaled_add(hp.gamma, &e.t().dot(&e.dot(a)));
        let grad_b = r1.sum_axis(Axis(0)) + hp.alpha * &r2.sum_axis(Axis(0));
        Ok((grad_a, grad_b))
    }
}

/// Rank-revealing factorization of the training kernel matrix.
///
/// The objective depends on `A` only through `φ(X)ᵀA`, so every solve happens
/// in the orthonormal basis spanned by the pivot rows of a pivoted Cholesky
/// factorization `K ≈ FFᵀ`. Row `i` of `F` holds the coordinates of `φ(xᵢ)`.
/// The basis depends on the training rows and the kernel only, so one basis
/// serves every clustering and hyperparameter setting.
#[derive(Debug, Clone)]
pub struct KernelBasis {
    spec: KernelSpec,
    train_features: Array2<f64>,
    labels: Array2<f64>,
    factor: Array2<f64>,
    pivots: Vec<usize>,
    pivot_block: Array2<f64>,
    pivot_rows: Array2<f64>,
}

impl KernelBasis {
    pub fn new(data: &Dataset, spec: &KernelSpec) -> Result<Self> {
        spec.validate()?;
        let x = data.features().view();
        let k = kernel_matrix(x, x, spec)?;
        let pc = PivotedCholesky::factor(k.view(), PIVOT_TOLERANCE)?;
        Ok(KernelBasis {
            spec: *spec,
            train_features: data.features().clone(),
            labels: data.labels_f64(),
            pivot_block: pc.pivot_block(),
            pivot_rows: data.features().select(Axis(0), &pc.pivots),
            factor: pc.factor,
            pivots: pc.pivots,
        })
    }

    /// Numerical rank of the kernel matrix (number of basis vectors).
    pub fn rank(&self) -> usize {
        self.pivots.len()
    }

    /// Coordinates of `φ(row)` for each row: `L⁻¹ κ(X_S, row)`.
    fn coordinates(&self, rows: ArrayView2<'_, f64>) -> Result<Array2<f64>> {
        let k = kernel_matrix(rows, self.pivot_rows.view(), &self.spec)?;
        Ok(forward_substitute(self.pivot_block.view(), k.t()).reversed_axes())
    }

    /// Binds an augmentation of the same training rows to this basis.
    pub fn system(&self, aug: &Augmentation) -> Result<KernelSystem> {
        if aug.assignment.len() != self.train_features.nrows() {
            return Err(Error::Validation("augmentation does not match dataset rows".into()));
        }
        let center_coords = self.coordinates(aug.centers.view())?;
        let expanded = center_coords.select(Axis(0), aug.assignment.as_slice());
        let diff = &self.factor - &expanded;
        Ok(KernelSystem {
            spec: self.spec,
            train_features: self.train_features.clone(),
            pivots: self.pivots.clone(),
            pivot_block: self.pivot_block.clone(),
            system: ClosedForm::new(
                self.factor.view(),
                center_coords.view(),
                diff.view(),
                self.labels.view(),
                aug.soft_labels.view(),
            ),
        })
    }
}

/// A [`KernelBasis`] plus one augmentation, ready to solve for any `(α, β, γ)`.
#[derive(Debug, Clone)]
pub struct KernelSystem {
    spec: KernelSpec,
    train_features: Array2<f64>,
    pivots: Vec<usize>,
    pivot_block: Array2<f64>,
    system: ClosedForm,
}

impl KernelSystem {
    pub fn solve(&self, hp: &Hyperparams) -> Result<KernelModel> {
        hp.validate()?;
        let (basis_weights, bias) = self.system.solve(hp)?;
        // A_S = L⁻ᵀ B
        let pivot_coef = back_substitute_transposed(self.pivot_block.view(), basis_weights.view());
        let mut coefficients = Array2::zeros((self.train_features.nrows(), bias.len()));
        for (row, &p) in self.pivots.iter().enumerate() {
            coefficients.row_mut(p).assign(&pivot_coef.row(row));
        }
        if coefficients.iter().chain(bias.iter()).any(|v| !v.is_finite()) {
            return Err(Error::Numerical("non-finite kernel coefficients; increase beta".into()));
        }
        Ok(KernelModel {
            coefficients,
            bias,
            spec: self.spec,
            train_features: self.train_features.clone(),
            norm_stats: NormStats::identity(self.train_features.ncols()),
        })
    }
}

/// Closed-form minimizer of the kernel objective on already-normalized data,
/// solved in the pivot basis of [`KernelBasis`]. When `K` has full numerical
/// rank this is the unique solution of the n x n stationarity system;
/// otherwise `A` is supported on the pivot rows.
pub fn solve_kernel(data: &Dataset, aug: &Augmentation, hp: &Hyperparams, spec: &KernelSpec) -> Result<KernelModel> {
    hp.validate()?;
    KernelBasis::new(data, spec)?.system(aug)?.solve(hp)
}
