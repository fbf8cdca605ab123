//! Independent oracles shared by the integration tests. Nothing here calls the
//! code paths it is used to check.
#![allow(dead_code)]

use imcc::augment::{kmeans, make_virtual_examples, Augmentation};
use imcc::dataset::Dataset;
use imcc::solver::{Hyperparams, Params};
use ndarray::{Array1, Array2};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn random_matrix(rng: &mut ChaCha8Rng, rows: usize, cols: usize) -> Array2<f64> {
    Array2::from_shape_fn((rows, cols), |_| rng.random_range(-1.0..1.0))
}

pub fn random_labels(rng: &mut ChaCha8Rng, rows: usize, cols: usize) -> Array2<i8> {
    Array2::from_shape_fn((rows, cols), |_| if rng.random_bool(0.4) { 1 } else { -1 })
}

/// Random dataset plus a k-means augmentation with `c` clusters.
pub fn random_problem(seed: u64, n: usize, d: usize, q: usize, c: usize) -> (Dataset, Augmentation) {
    let mut r = rng(seed);
    let x = random_matrix(&mut r, n, d);
    let y = random_labels(&mut r, n, q);
    let data = Dataset::new(x, y).unwrap();
    let assignment = kmeans(data.features().view(), c, seed, 300, 1e-6).unwrap();
    let aug = make_virtual_examples(&data, &assignment).unwrap();
    (data, aug)
}

pub fn log_uniform(rng: &mut ChaCha8Rng, lo: f64, hi: f64) -> f64 {
    (rng.random_range(lo.ln()..hi.ln())).exp()
}

pub fn gaussian(a: &[f64], b: &[f64], sigma: f64) -> f64 {
    let sq: f64 = a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum();
    (-sq / (2.0 * sigma * sigma)).exp()
}

pub fn row(m: &Array2<f64>, i: usize) -> Vec<f64> {
    m.row(i).to_vec()
}

/// Linear objective by scalar loops, straight from the per-example sums.
pub fn linear_objective_loops(params: &Params, data: &Dataset, aug: &Augmentation, hp: &Hyperparams) -> f64 {
    let x = data.features();
    let y = data.labels();
    let (n, d) = x.dim();
    let q = y.ncols();
    let c = aug.centers.nrows();
    let w = &params.coef;
    let b = &params.bias;
    let out = |f: &dyn Fn(usize) -> f64, k: usize| -> f64 {
        let mut s = b[k];
        for j in 0..d {
            s += f(j) * w[[j, k]];
        }
        s
    };
    let mut total = 0.0;
    for i in 0..n {
        for k in 0..q {
            let r = out(&|j| x[[i, j]], k) - f64::from(y[[i, k]]);
            total += 0.5 * r * r;
        }
    }
    for m in 0..c {
        for k in 0..q {
            let r = out(&|j| aug.centers[[m, j]], k) - aug.soft_labels[[m, k]];
            total += 0.5 * hp.alpha * r * r;
        }
    }
    for j in 0..d {
        for k in 0..q {
            total += 0.5 * hp.beta * w[[j, k]] * w[[j, k]];
        }
    }
    let assign = aug.assignment.as_slice();
    for i in 0..n {
        for k in 0..q {
            let mut r = 0.0;
            for j in 0..d {
                r += (x[[i, j]] - aug.centers[[assign[i], j]]) * w[[j, k]];
            }
            total += 0.5 * hp.gamma * r * r;
        }
    }
    total
}

/// Gaussian-kernel objective by scalar loops, with every kernel value computed
/// from the raw rows.
pub fn kernel_objective_loops(
    params: &Params,
    data: &Dataset,
    aug: &Augmentation,
    hp: &Hyperparams,
    sigma: f64,
) -> f64 {
    let x = data.features();
    let y = data.labels();
    let (n, _) = x.dim();
    let q = y.ncols();
    let c = aug.centers.nrows();
    let a = &params.coef;
    let b = &params.bias;
    let xr: Vec<Vec<f64>> = (0..n).map(|i| x.row(i).to_vec()).collect();
    let zr: Vec<Vec<f64>> = (0..c).map(|m| aug.centers.row(m).to_vec()).collect();
    let assign = aug.assignment.as_slice();
    let mut total = 0.0;
    for k in 0..q {
        for i in 0..n {
            let mut s = b[k];
            for l in 0..n {
                s += gaussian(&xr[i], &xr[l], sigma) * a[[l, k]];
            }
            let r = s - f64::from(y[[i, k]]);
            total += 0.5 * r * r;
        }
        for m in 0..c {
            let mut s = b[k];
            for l in 0..n {
                s += gaussian(&zr[m], &xr[l], sigma) * a[[l, k]];
            }
            let r = s - aug.soft_labels[[m, k]];
            total += 0.5 * hp.alpha * r * r;
        }
        for i in 0..n {
            for l in 0..n {
                total += 0.5 * hp.beta * a[[i, k]] * gaussian(&xr[i], &xr[l], sigma) * a[[l, k]];
            }
        }
        for i in 0..n {
            let mut r = 0.0;
            for l in 0..n {
                r += (gaussian(&xr[i], &xr[l], sigma) - gaussian(&zr[assign[i]], &xr[l], sigma)) * a[[l, k]];
            }
            total += 0.5 * hp.gamma * r * r;
        }
    }
    total
}

/// Gaussian elimination with partial pivoting; `a` need not be symmetric.
pub fn gauss_solve(a: &Array2<f64>, b: &Array2<f64>) -> Array2<f64> {
    let n = a.nrows();
    let m = b.ncols();
    let mut aug = Array2::zeros((n, n + m));
    for i in 0..n {
        for j in 0..n {
            aug[[i, j]] = a[[i, j]];
        }
        for j in 0..m {
            aug[[i, n + j]] = b[[i, j]];
        }
    }
    for col in 0..n {
        let piv = (col..n)
            .max_by(|&i, &j| aug[[i, col]].abs().total_cmp(&aug[[j, col]].abs()))
            .unwrap();
        if piv != col {
            for j in 0..n + m {
                let t = aug[[col, j]];
                aug[[col, j]] = aug[[piv, j]];
                aug[[piv, j]] = t;
            }
        }
        for i in col + 1..n {
            let f = aug[[i, col]] / aug[[col, col]];
            for j in col..n + m {
                aug[[i, j]] -= f * aug[[col, j]];
            }
        }
    }
    let mut x = Array2::zeros((n, m));
    for k in 0..m {
        for i in (0..n).rev() {
            let mut s = aug[[i, n + k]];
            for j in i + 1..n {
                s -= aug[[i, j]] * x[[j, k]];
            }
            x[[i, k]] = s / aug[[i, i]];
        }
    }
    x
}

/// Ridge regression with an unpenalized intercept: center by plain means,
/// solve `(XcᵀXc + βI) W = XcᵀYc`, then `b = ȳ − Wᵀx̄`.
pub fn centered_ridge(x: &Array2<f64>, y: &Array2<f64>, beta: f64) -> (Array2<f64>, Array1<f64>) {
    let (n, d) = x.dim();
    let q = y.ncols();
    let xbar: Vec<f64> = (0..d).map(|j| (0..n).map(|i| x[[i, j]]).sum::<f64>() / n as f64).collect();
    let ybar: Vec<f64> = (0..q).map(|k| (0..n).map(|i| y[[i, k]]).sum::<f64>() / n as f64).collect();
    let mut gram = Array2::zeros((d, d));
    let mut rhs = Array2::zeros((d, q));
    for i in 0..n {
        for a in 0..d {
            let xa = x[[i, a]] - xbar[a];
            for b in 0..d {
                gram[[a, b]] += xa * (x[[i, b]] - xbar[b]);
            }
            for k in 0..q {
                rhs[[a, k]] += xa * (y[[i, k]] - ybar[k]);
            }
        }
    }
    for a in 0..d {
        gram[[a, a]] += beta;
    }
    let w = gauss_solve(&gram, &rhs);
    let b = Array1::from_shape_fn(q, |k| ybar[k] - (0..d).map(|j| w[[j, k]] * xbar[j]).sum::<f64>());
    (w, b)
}

/// Kernel ridge with intercept: `(HK + βI) A = HY`, `b = mean(Y − KA)`.
pub fn kernel_ridge(k: &Array2<f64>, y: &Array2<f64>, beta: f64) -> (Array2<f64>, Array1<f64>) {
    let n = k.nrows();
    let q = y.ncols();
    let col_mean = |m: &Array2<f64>, j: usize| (0..n).map(|i| m[[i, j]]).sum::<f64>() / n as f64;
    let mut hk = k.clone();
    for j in 0..n {
        let mu = col_mean(k, j);
        for i in 0..n {
            hk[[i, j]] -= mu;
        }
        hk[[j, j]] += beta;
    }
    let mut hy = y.clone();
    for j in 0..q {
        let mu = col_mean(y, j);
        for i in 0..n {
            hy[[i, j]] -= mu;
        }
    }
    let a = gauss_solve(&hk, &hy);
    let fitted = k.dot(&a);
    let b = Array1::from_shape_fn(q, |j| (0..n).map(|i| y[[i, j]] - fitted[[i, j]]).sum::<f64>() / n as f64);
    (a, b)
}

/// Plain gradient descent on a convex quadratic, step `1/L` with `L` from
/// power iteration on the Hessian (applied as gradient differences).
pub fn gradient_descent<G>(start: Params, steps: usize, grad: G) -> Params
where
    G: Fn(&Params) -> (Array2<f64>, Array1<f64>),
{
    let zero = Params {
        coef: Array2::zeros(start.coef.dim()),
        bias: Array1::zeros(start.bias.len()),
    };
    let (g0w, g0b) = grad(&zero);
    let hess = |v: &Params| {
        let (gw, gb) = grad(v);
        (gw - &g0w, gb - &g0b)
    };
    let mut v = Params {
        coef: Array2::from_elem(start.coef.dim(), 1.0),
        bias: Array1::from_elem(start.bias.len(), 1.0),
    };
    let mut lipschitz = 1.0;
    for _ in 0..200 {
        let (hw, hb) = hess(&v);
        let norm = (hw.iter().chain(hb.iter()).map(|x| x * x).sum::<f64>()).sqrt();
        let vnorm = (v.coef.iter().chain(v.bias.iter()).map(|x| x * x).sum::<f64>()).sqrt();
        lipschitz = norm / vnorm;
        v = Params {
            coef: hw / norm,
            bias: hb / norm,
        };
    }
    let step = 1.0 / (1.05 * lipschitz);
    let mut p = start;
    for _ in 0..steps {
        let (gw, gb) = grad(&p);
        p.coef.scaled_add(-step, &gw);
        p.bias.scaled_add(-step, &gb);
    }
    p
}

pub fn max_abs(it: impl IntoIterator<Item = f64>) -> f64 {
    it.into_iter().fold(0.0, |m, v| m.max(v.abs()))
}

/// rank(j) = 1 + #{k: s_k > s_j} + #{k < j: s_k = s_j}
pub fn rank_by_definition(s: &[f64], j: usize) -> usize {
    1 + (0..s.len()).filter(|&k| s[k] > s[j] || (k < j && s[k] == s[j])).count()
}

pub struct OracleMetrics {
    pub one_error: Option<f64>,
    pub hamming: f64,
    pub ranking: Option<f64>,
    pub coverage: Option<f64>,
    pub average_precision: Option<f64>,
}

/// Every metric by direct enumeration of its definition.
pub fn metrics_by_definition(scores: &Array2<f64>, truth: &Array2<i8>) -> OracleMetrics {
    let (m, q) = scores.dim();
    let mut oe = (0usize, 0usize);
    let mut rl = (0.0, 0usize);
    let mut cov = (0usize, 0usize);
    let mut ap = (0.0, 0usize);
    let mut wrong = 0usize;
    for i in 0..m {
        let s: Vec<f64> = scores.row(i).to_vec();
        let y: Vec<i8> = truth.row(i).to_vec();
        for k in 0..q {
            let pred = if s[k] >= 0.0 { 1 } else { -1 };
            if pred != y[k] {
                wrong += 1;
            }
        }
        let pos: Vec<usize> = (0..q).filter(|&k| y[k] == 1).collect();
        let neg: Vec<usize> = (0..q).filter(|&k| y[k] == -1).collect();
        if pos.is_empty() {
            continue;
        }
        let mut top = 0;
        for k in 1..q {
            if s[k] > s[top] {
                top = k;
            }
        }
        oe.0 += usize::from(y[top] == -1);
        oe.1 += 1;
        cov.0 += pos.iter().map(|&j| rank_by_definition(&s, j)).max().unwrap() - 1;
        cov.1 += 1;
        let mut row_ap = 0.0;
        for &j in &pos {
            let rj = rank_by_definition(&s, j);
            let set = pos.iter().filter(|&&k| rank_by_definition(&s, k) <= rj).count();
            row_ap += set as f64 / rj as f64;
        }
        ap.0 += row_ap / pos.len() as f64;
        ap.1 += 1;
        if !neg.is_empty() {
            let mut bad = 0usize;
            for &j in &neg {
                for &k in &pos {
                    if s[k] <= s[j] {
                        bad += 1;
                    }
                }
            }
            rl.0 += bad as f64 / (pos.len() * neg.len()) as f64;
            rl.1 += 1;
        }
    }
    let ratio = |num: f64, den: usize| if den == 0 { None } else { Some(num / den as f64) };
    OracleMetrics {
        one_error: ratio(oe.0 as f64, oe.1),
        hamming: wrong as f64 / (m * q) as f64,
        ranking: ratio(rl.0, rl.1),
        coverage: ratio(cov.0 as f64, cov.1).map(|v| v / q as f64),
        average_precision: ratio(ap.0, ap.1),
    }
}
