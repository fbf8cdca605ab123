//! Dense symmetric factorizations used by the closed-form solvers.

use ndarray::{s, Array1, Array2, ArrayView2};

use crate::error::{Error, Result};

/// Systems with an estimated 1-norm condition number above this are rejected.
pub const MAX_CONDITION: f64 = 1e12;

/// Lower-triangular Cholesky factor `L` with `A = L Lᵀ`.
#[derive(Debug, Clone)]
pub struct Cholesky {
    lower: Array2<f64>,
    norm1: f64,
}

impl Cholesky {
    pub fn factor(a: ArrayView2<'_, f64>) -> Result<Self> {
        let n = a.nrows();
        if a.ncols() != n {
            return Err(Error::Validation(format!("matrix is {}x{}, not square", n, a.ncols())));
        }
        // Row-oriented sweep over row-major storage, so every inner product
        // runs over contiguous slices.
        let mut l = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..=i {
                let (upper, lower) = l.split_at_mut(i * n);
                let row_i = &mut lower[..n];
                let sum = if j == i {
                    dot(&row_i[..j], &row_i[..j])
                } else {
                    dot(&row_i[..j], &upper[j * n..j * n + j])
                };
                let v = a[[i, j]] - sum;
                if j == i {
                    if !(v > 0.0) || !v.is_finite() {
                        return Err(Error::Numerical(format!(
                            "system matrix is not positive definite (pivot {i} = {v:e}); increase beta"
                        )));
                    }
                    row_i[i] = v.sqrt();
                } else {
                    row_i[j] = v / upper[j * n + j];
                }
            }
        }
        let norm1 = a
            .columns()
            .into_iter()
            .map(|c| c.iter().map(|v| v.abs()).sum::<f64>())
            .fold(0.0, f64::max);
        Ok(Cholesky {
            lower: Array2::from_shape_vec((n, n), l).expect("n x n"),
            norm1,
        })
    }

    /// Factors and rejects matrices whose condition estimate exceeds [`MAX_CONDITION`].
    pub fn factor_checked(a: ArrayView2<'_, f64>) -> Result<Self> {
        let chol = Self::factor(a)?;
        let cond = chol.condition_estimate();
        if !(cond <= MAX_CONDITION) {
            return Err(Error::Numerical(format!(
                "system matrix is ill-conditioned (condition estimate {cond:.3e}); increase beta"
            )));
        }
        Ok(chol)
    }

    pub fn lower(&self) -> &Array2<f64> {
        &self.lower
    }

    pub fn solve(&self, b: ArrayView2<'_, f64>) -> Array2<f64> {
        let y = forward_substitute(self.lower.view(), b);
        back_substitute_transposed(self.lower.view(), y.view())
    }

    pub fn solve_vec(&self, b: &Array1<f64>) -> Array1<f64> {
        let col = b.view().insert_axis(ndarray::Axis(1));
        self.solve(col).column(0).to_owned()
    }

    /// 1-norm condition number estimate (Hager's method, using the factor for solves).
    pub fn condition_estimate(&self) -> f64 {
        let n = self.lower.nrows();
        if n == 0 {
            return 1.0;
        }
        let mut x = Array1::from_elem(n, 1.0 / n as f64);
        let mut estimate = 0.0;
        for _ in 0..5 {
            let y = self.solve_vec(&x);
            estimate = y.iter().map(|v| v.abs()).sum::<f64>();
            let sign = y.mapv(|v| if v >= 0.0 { 1.0 } else { -1.0 });
            let z = self.solve_vec(&sign);
            let (j, zmax) = z
                .iter()
                .map(|v| v.abs())
                .enumerate()
                .fold((0, f64::NEG_INFINITY), |acc, (i, v)| if v > acc.1 { (i, v) } else { acc });
            if zmax <= z.dot(&x) {
                break;
            }
            x.fill(0.0);
            x[j] = 1.0;
        }
        self.norm1 * estimate
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Solves `L Y = B` for lower-triangular `L`.
pub fn forward_substitute(l: ArrayView2<'_, f64>, b: ArrayView2<'_, f64>) -> Array2<f64> {
    let n = l.nrows();
    let l = l.as_standard_layout();
    let l = l.as_slice().expect("standard layout");
    let mut y = b.to_owned();
    let mut col = vec![0.0; n];
    for mut out in y.columns_mut() {
        col.iter_mut().zip(out.iter()).for_each(|(c, &v)| *c = v);
        for i in 0..n {
            let row = &l[i * n..i * n + i];
            col[i] = (col[i] - dot(row, &col[..i])) / l[i * n + i];
        }
        out.iter_mut().zip(&col).for_each(|(o, &c)| *o = c);
    }
    y
}

/// Solves `Lᵀ X = Y` for lower-triangular `L`.
pub fn back_substitute_transposed(l: ArrayView2<'_, f64>, y: ArrayView2<'_, f64>) -> Array2<f64> {
    let n = l.nrows();
    let l = l.as_standard_layout();
    let l = l.as_slice().expect("standard layout");
    let mut x = y.to_owned();
    let mut col = vec![0.0; n];
    for mut out in x.columns_mut() {
        col.iter_mut().zip(out.iter()).for_each(|(c, &v)| *c = v);
        for i in (0..n).rev() {
            col[i] /= l[i * n + i];
            let xi = col[i];
            for (c, &lik) in col[..i].iter_mut().zip(&l[i * n..i * n + i]) {
                *c -= lik * xi;
            }
        }
        out.iter_mut().zip(&col).for_each(|(o, &c)| *o = c);
    }
    x
}

/// Diagonally pivoted, rank-revealing Cholesky of a positive semidefinite matrix.
///
/// `factor` is n x r with `K ≈ factor · factorᵀ`; pivoting stops once every
/// remaining Schur-complement diagonal falls to `rel_tol · max diag(K)`.
#[derive(Debug, Clone)]
pub struct PivotedCholesky {
    pub factor: Array2<f64>,
    /// Row indices of `K` chosen as pivots, in elimination order.
    pub pivots: Vec<usize>,
}

impl PivotedCholesky {
    pub fn factor(k: ArrayView2<'_, f64>, rel_tol: f64) -> Result<Self> {
        let n = k.nrows();
        if k.ncols() != n {
            return Err(Error::Validation("pivoted Cholesky needs a square matrix".into()));
        }
        let mut residual: Array1<f64> = k.diag().to_owned();
        let max_diag = residual.iter().copied().fold(0.0, f64::max);
        if !(max_diag > 0.0) {
            return Err(Error::DegenerateData("kernel matrix has no positive diagonal entry".into()));
        }
        let threshold = rel_tol * max_diag;
        let mut done = vec![false; n];
        let mut g = Array2::<f64>::zeros((n, n));
        let mut pivots = Vec::new();
        for col in 0..n {
            let (p, dp) = residual
                .iter()
                .enumerate()
                .filter(|(i, _)| !done[*i])
                .fold((usize::MAX, f64::NEG_INFINITY), |acc, (i, &v)| if v > acc.1 { (i, v) } else { acc });
            if p == usize::MAX || dp <= threshold {
                break;
            }
            let gp = dp.sqrt();
            let prow = g.slice(s![p, ..col]).to_owned();
            for i in 0..n {
                if done[i] || i == p {
                    continue;
                }
                let v = (k[[i, p]] - g.slice(s![i, ..col]).dot(&prow)) / gp;
                g[[i, col]] = v;
                residual[i] -= v * v;
            }
            g[[p, col]] = gp;
            residual[p] = 0.0;
            done[p] = true;
            pivots.push(p);
        }
        let r = pivots.len();
        Ok(PivotedCholesky {
            factor: g.slice(s![.., ..r]).to_owned(),
            pivots,
        })
    }

    pub fn rank(&self) -> usize {
        self.pivots.len()
    }

    /// The r x r lower-triangular block formed by the pivot rows.
    pub fn pivot_block(&self) -> Array2<f64> {
        self.factor.select(ndarray::Axis(0), &self.pivots)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random(rows: usize, cols: usize, seed: u64) -> Array2<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        Array2::from_shape_fn((rows, cols), |_| rng.random_range(-1.0..1.0))
    }

    #[test]
    fn solves_spd_system() {
        let b = random(6, 6, 1);
        let a = b.t().dot(&b) + Array2::<f64>::eye(6);
        let rhs = random(6, 2, 2);
        let x = Cholesky::factor(a.view()).unwrap().solve(rhs.view());
        let resid = a.dot(&x) - &rhs;
        assert!(resid.iter().all(|v| v.abs() < 1e-12));
    }

    #[test]
    fn rejects_indefinite() {
        let a = array![[1.0, 2.0], [2.0, 1.0]];
        assert!(matches!(Cholesky::factor(a.view()), Err(Error::Numerical(_))));
    }

    #[test]
    fn condition_estimate_of_diagonal() {
        let a = array![[1.0, 0.0, 0.0], [0.0, 1e-3, 0.0], [0.0, 0.0, 10.0]];
        let c = Cholesky::factor(a.view()).unwrap().condition_estimate();
        assert!((c - 1e4).abs() < 1e-6, "{c}");
        let bad = array![[1.0, 0.0], [0.0, 1e-14]];
        assert!(Cholesky::factor_checked(bad.view()).is_err());
    }

    #[test]
    fn pivoted_reveals_rank() {
        let x = random(10, 3, 4);
        let k = x.dot(&x.t());
        let pc = PivotedCholesky::factor(k.view(), 1e-12).unwrap();
        assert_eq!(pc.rank(), 3);
        let back = pc.factor.dot(&pc.factor.t());
        assert!((&back - &k).iter().all(|v| v.abs() < 1e-10));
        let block = pc.pivot_block();
        for i in 0..3 {
            for j in i + 1..3 {
                assert_eq!(block[[i, j]], 0.0);
            }
        }
    }
}
