//! Friedman test and Nemenyi critical difference for comparing k algorithms
//! over N datasets.

use ndarray::{Array1, Array2, ArrayView2, Axis};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Per-dataset ranks (rank 1 = best); tied algorithms share the mean rank.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankTable {
    pub ranks: Array2<f64>,
    pub algorithm_names: Vec<String>,
    pub dataset_names: Vec<String>,
}

impl RankTable {
    pub fn num_algorithms(&self) -> usize {
        self.ranks.ncols()
    }

    pub fn num_datasets(&self) -> usize {
        self.ranks.nrows()
    }

    /// Column means of the rank matrix.
    pub fn average_ranks(&self) -> Array1<f64> {
        self.ranks.mean_axis(Axis(0)).expect("N >= 1")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FriedmanResult {
    pub chi_squared: f64,
    pub f_statistic: f64,
    pub k: usize,
    pub n_datasets: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NemenyiResult {
    pub critical_difference: f64,
    pub q_alpha: f64,
}

/// Ranks each row of an N x k value table. Names default to `A0..`, `D0..`.
pub fn average_ranks(values: ArrayView2<'_, f64>, higher_is_better: bool) -> Result<RankTable> {
    let (n, k) = values.dim();
    average_ranks_named(
        values,
        higher_is_better,
        (0..k).map(|j| format!("A{j}")).collect(),
        (0..n).map(|i| format!("D{i}")).collect(),
    )
}

pub fn average_ranks_named(
    values: ArrayView2<'_, f64>,
    higher_is_better: bool,
    algorithm_names: Vec<String>,
    dataset_names: Vec<String>,
) -> Result<RankTable> {
    let (n, k) = values.dim();
    if n < 2 || k < 2 {
        return Err(Error::Validation(format!("need N >= 2 datasets and k >= 2 algorithms, got {n}x{k}")));
    }
    if algorithm_names.len() != k || dataset_names.len() != n {
        return Err(Error::Validation("name count does not match the value table".into()));
    }
    if values.iter().any(|v| !v.is_finite()) {
        return Err(Error::Validation("value table contains non-finite entries".into()));
    }
    let mut ranks = Array2::zeros((n, k));
    for (row, mut out) in values.rows().into_iter().zip(ranks.rows_mut()) {
        let mut order: Vec<usize> = (0..k).collect();
        order.sort_by(|&a, &b| {
            let ord = row[a].total_cmp(&row[b]);
            if higher_is_better { ord.reverse() } else { ord }
        });
        let mut start = 0;
        while start < k {
            let mut end = start + 1;
            while end < k && row[order[end]] == row[order[start]] {
                end += 1;
            }
            // Positions start+1 ..= end share their mean.
            let shared = (start + 1 + end) as f64 / 2.0;
            for &j in &order[start..end] {
                out[j] = shared;
            }
            start = end;
        }
    }
    Ok(RankTable {
        ranks,
        algorithm_names,
        dataset_names,
    })
}

pub fn friedman(table: &RankTable) -> Result<FriedmanResult> {
    let k = table.num_algorithms() as f64;
    let n = table.num_datasets() as f64;
    let sum_sq: f64 = table.average_ranks().iter().map(|r| r * r).sum();
    let chi_squared = (12.0 * n / (k * (k + 1.0)) * (sum_sq - k * (k + 1.0).powi(2) / 4.0)).max(0.0);
    let denom = n * (k - 1.0) - chi_squared;
    if !(denom > 0.0) {
        return Err(Error::DegenerateStatistic(format!(
            "F_F undefined: N(k-1) - chi^2 = {denom} (rankings are perfectly consistent across datasets)"
        )));
    }
    Ok(FriedmanResult {
        chi_squared,
        f_statistic: (n - 1.0) * chi_squared / denom,
        k: table.num_algorithms(),
        n_datasets: table.num_datasets(),
    })
}

/// `CD = q_α · sqrt(k(k+1) / (6N))`.
pub fn nemenyi_cd(k: usize, n_datasets: usize, q_alpha: f64) -> Result<NemenyiResult> {
    if k < 2 || n_datasets < 1 || !(q_alpha > 0.0 && q_alpha.is_finite()) {
        return Err(Error::Config(format!(
            "Nemenyi CD needs k >= 2, N >= 1, q_alpha > 0 (got k={k}, N={n_datasets}, q_alpha={q_alpha})"
        )));
    }
    let (k, n) = (k as f64, n_datasets as f64);
    Ok(NemenyiResult {
        critical_difference: q_alpha * (k * (k + 1.0) / (6.0 * n)).sqrt(),
        q_alpha,
    })
}

/// Algorithms whose average rank lies within one CD of the best average rank.
pub fn within_cd_of_best(table: &RankTable, cd: f64) -> Vec<(String, f64)> {
    let avg = table.average_ranks();
    let best = avg.iter().copied().fold(f64::INFINITY, f64::min);
    let mut out: Vec<(String, f64)> = table
        .algorithm_names
        .iter()
        .zip(avg.iter())
        .filter(|(_, &r)| r - best <= cd)
        .map(|(name, &r)| (name.clone(), r))
        .collect();
    out.sort_by(|a, b| a.1.total_cmp(&b.1));
    out
}
