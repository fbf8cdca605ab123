use ndarray::{Array1, Array2, ArrayView2, Axis};

use super::Hyperparams;
use crate::error::Result;
use crate::linalg::Cholesky;

fn outer(a: &Array1<f64>, b: &Array1<f64>) -> Array2<f64> {
    a.view().insert_axis(Axis(1)).dot(&b.view().insert_axis(Axis(0)))
}

/// Sums and cross products of paired rows `(a_i, b_i)`.
#[derive(Debug, Clone)]
struct Moments {
    count: f64,
    sum_a: Array1<f64>,
    sum_b: Array1<f64>,
    ata: Array2<f64>,
    atb: Array2<f64>,
}

impl Moments {
    fn new(a: ArrayView2<'_, f64>, b: ArrayView2<'_, f64>) -> Self {
        Moments {
            count: a.nrows() as f64,
            sum_a: a.sum_axis(Axis(0)),
            sum_b: b.sum_axis(Axis(0)),
            ata: a.t().dot(&a),
            atb: a.t().dot(&b),
        }
    }

    /// `Σ (aᵢ − μ)(aᵢ − μ)ᵀ` and `Σ (aᵢ − μ)(bᵢ − ν)ᵀ`.
    fn scatter(&self, mu: &Array1<f64>, nu: &Array1<f64>) -> (Array2<f64>, Array2<f64>) {
        let aa = &self.ata - &outer(&self.sum_a, mu) - &outer(mu, &self.sum_a) + &(self.count * outer(mu, mu));
        let ab = &self.atb - &outer(&self.sum_a, nu) - &outer(mu, &self.sum_b) + &(self.count * outer(mu, nu));
        (aa, ab)
    }
}

/// Everything about
/// `½‖XW + 1bᵀ − Y‖² + (α/2)‖ZW + 1bᵀ − T‖² + (β/2)‖W‖² + (γ/2)‖DW‖²`
/// that does not depend on `(α, β, γ)`.
///
/// Eliminating `b` leaves a symmetric system in `W` centered on the weighted
/// mean `μ = (Xᵀ1 + αZᵀ1)/(n + αc)`. Rows are shifted by the plain means of
/// `X` and `Y` before the moments are taken, so the α-dependent recentering
/// only moves by `μ − x̄` and does not cancel large terms.
#[derive(Debug, Clone)]
pub(crate) struct ClosedForm {
    x_origin: Array1<f64>,
    y_origin: Array1<f64>,
    real: Moments,
    virtual_rows: Moments,
    smoothness: Array2<f64>,
}

impl ClosedForm {
    pub(crate) fn new(
        x: ArrayView2<'_, f64>,
        z: ArrayView2<'_, f64>,
        diff: ArrayView2<'_, f64>,
        y: ArrayView2<'_, f64>,
        t: ArrayView2<'_, f64>,
    ) -> Self {
        let x_origin = x.mean_axis(Axis(0)).expect("n >= 1");
        let y_origin = y.mean_axis(Axis(0)).expect("n >= 1");
        ClosedForm {
            real: Moments::new((&x - &x_origin).view(), (&y - &y_origin).view()),
            virtual_rows: Moments::new((&z - &x_origin).view(), (&t - &y_origin).view()),
            smoothness: diff.t().dot(&diff),
            x_origin,
            y_origin,
        }
    }

    pub(crate) fn solve(&self, hp: &Hyperparams) -> Result<(Array2<f64>, Array1<f64>)> {
        let alpha = hp.alpha;
        let total = self.real.count + alpha * self.virtual_rows.count;
        let mu = (&self.real.sum_a + &(alpha * &self.virtual_rows.sum_a)) / total;
        let nu = (&self.real.sum_b + &(alpha * &self.virtual_rows.sum_b)) / total;

        let (mut system, mut rhs) = self.real.scatter(&mu, &nu);
        if alpha > 0.0 {
            let (zz, zt) = self.virtual_rows.scatter(&mu, &nu);
            system.scaled_add(alpha, &zz);
            rhs.scaled_add(alpha, &zt);
        }
        if hp.gamma > 0.0 {
            system.scaled_add(hp.gamma, &self.smoothness);
        }
        for i in 0..system.nrows() {
            system[[i, i]] += hp.beta;
        }

        let weights = Cholesky::factor_checked(system.view())?.solve(rhs.view());
        let bias = &(nu + &self.y_origin) - &weights.t().dot(&(mu + &self.x_origin));
        Ok((weights, bias))
    }
}
