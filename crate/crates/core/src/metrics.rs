//! Multi-label evaluation metrics over score matrices and `-1/+1` truth.
//!
//! Label ranks within a row are 1-based in descending score order, ties
//! broken by label index:
//! `rank(j) = 1 + #{k : s_k > s_j} + #{k < j : s_k = s_j}`.
//!
//! Rows without any relevant label are skipped by one-error, coverage and
//! average precision; ranking loss additionally skips rows where every label
//! is relevant. A metric with no usable row is an error.

use std::str::FromStr;

use ndarray::{ArrayView1, ArrayView2};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::solver::predict_labels;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MetricReport {
    pub one_error: f64,
    pub hamming_loss: f64,
    pub ranking_loss: f64,
    pub coverage: f64,
    pub average_precision: f64,
    /// Rows skipped by at least one metric.
    pub skipped_instances: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MetricKind {
    OneError,
    HammingLoss,
    RankingLoss,
    Coverage,
    AveragePrecision,
}

impl MetricKind {
    pub const ALL: [MetricKind; 5] = [
        MetricKind::OneError,
        MetricKind::HammingLoss,
        MetricKind::RankingLoss,
        MetricKind::Coverage,
        MetricKind::AveragePrecision,
    ];

    pub fn name(self) -> &'static str {
        match self {
            MetricKind::OneError => "one_error",
            MetricKind::HammingLoss => "hamming_loss",
            MetricKind::RankingLoss => "ranking_loss",
            MetricKind::Coverage => "coverage",
            MetricKind::AveragePrecision => "average_precision",
        }
    }

    pub fn higher_is_better(self) -> bool {
        self == MetricKind::AveragePrecision
    }

    pub fn compute(self, scores: ArrayView2<'_, f64>, truth: ArrayView2<'_, i8>) -> Result<f64> {
        match self {
            MetricKind::OneError => one_error(scores, truth),
            MetricKind::HammingLoss => hamming_loss(predict_labels(scores).view(), truth),
            MetricKind::RankingLoss => ranking_loss(scores, truth),
            MetricKind::Coverage => coverage(scores, truth),
            MetricKind::AveragePrecision => average_precision(scores, truth),
        }
    }

    pub fn get(self, report: &MetricReport) -> f64 {
        match self {
            MetricKind::OneError => report.one_error,
            MetricKind::HammingLoss => report.hamming_loss,
            MetricKind::RankingLoss => report.ranking_loss,
            MetricKind::Coverage => report.coverage,
            MetricKind::AveragePrecision => report.average_precision,
        }
    }
}

impl FromStr for MetricKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        MetricKind::ALL
            .into_iter()
            .find(|m| m.name() == s.replace('-', "_"))
            .ok_or_else(|| Error::Config(format!("unknown metric {s:?}")))
    }
}

fn check_shapes<A, B>(a: ArrayView2<'_, A>, b: ArrayView2<'_, B>) -> Result<()> {
    if a.dim() != b.dim() {
        return Err(Error::Validation(format!(
            "scores are {:?} but truth is {:?}",
            a.dim(),
            b.dim()
        )));
    }
    Ok(())
}

/// 1-based rank of every label in one score row.
pub fn label_ranks(scores: ArrayView1<'_, f64>) -> Vec<usize> {
    let q = scores.len();
    let mut order: Vec<usize> = (0..q).collect();
    // Descending score, then ascending index; total_cmp keeps it deterministic.
    order.sort_by(|&a, &b| scores[b].total_cmp(&scores[a]).then(a.cmp(&b)));
    let mut ranks = vec![0; q];
    for (pos, &j) in order.iter().enumerate() {
        ranks[j] = pos + 1;
    }
    ranks
}

fn mean_over(values: impl Iterator<Item = f64>, metric: &str) -> Result<f64> {
    let (sum, count) = values.fold((0.0, 0usize), |(s, c), v| (s + v, c + 1));
    if count == 0 {
        return Err(Error::UndefinedMetric(format!("{metric}: every row was skipped")));
    }
    Ok(sum / count as f64)
}

pub fn one_error(scores: ArrayView2<'_, f64>, truth: ArrayView2<'_, i8>) -> Result<f64> {
    check_shapes(scores, truth)?;
    let per_row = scores.rows().into_iter().zip(truth.rows()).filter_map(|(s, y)| {
        if !y.iter().any(|&v| v == 1) {
            return None;
        }
        let top = label_ranks(s).iter().position(|&r| r == 1).expect("q >= 1");
        Some(if y[top] == -1 { 1.0 } else { 0.0 })
    });
    mean_over(per_row, "one_error")
}

pub fn hamming_loss(predictions: ArrayView2<'_, i8>, truth: ArrayView2<'_, i8>) -> Result<f64> {
    check_shapes(predictions, truth)?;
    let q = truth.ncols() as f64;
    let per_row = predictions.rows().into_iter().zip(truth.rows()).map(|(p, y)| {
        p.iter().zip(y.iter()).filter(|(a, b)| a != b).count() as f64 / q
    });
    mean_over(per_row, "hamming_loss")
}

pub fn ranking_loss(scores: ArrayView2<'_, f64>, truth: ArrayView2<'_, i8>) -> Result<f64> {
    check_shapes(scores, truth)?;
    let per_row = scores.rows().into_iter().zip(truth.rows()).filter_map(|(s, y)| {
        let relevant: Vec<f64> = s.iter().zip(y.iter()).filter(|(_, &l)| l == 1).map(|(&v, _)| v).collect();
        let irrelevant: Vec<f64> = s.iter().zip(y.iter()).filter(|(_, &l)| l != 1).map(|(&v, _)| v).collect();
        if relevant.is_empty() || irrelevant.is_empty() {
            return None;
        }
        let misordered = relevant
            .iter()
            .map(|&r| irrelevant.iter().filter(|&&i| r <= i).count())
            .sum::<usize>();
        Some(misordered as f64 / (relevant.len() * irrelevant.len()) as f64)
    });
    mean_over(per_row, "ranking_loss")
}

pub fn coverage(scores: ArrayView2<'_, f64>, truth: ArrayView2<'_, i8>) -> Result<f64> {
    check_shapes(scores, truth)?;
    let q = truth.ncols() as f64;
    let per_row = scores.rows().into_iter().zip(truth.rows()).filter_map(|(s, y)| {
        let ranks = label_ranks(s);
        ranks
            .iter()
            .zip(y.iter())
            .filter(|(_, &l)| l == 1)
            .map(|(&r, _)| r)
            .max()
            .map(|deepest| (deepest - 1) as f64)
    });
    Ok(mean_over(per_row, "coverage")? / q)
}

pub fn average_precision(scores: ArrayView2<'_, f64>, truth: ArrayView2<'_, i8>) -> Result<f64> {
    check_shapes(scores, truth)?;
    let per_row = scores.rows().into_iter().zip(truth.rows()).filter_map(|(s, y)| {
        let ranks = label_ranks(s);
        let relevant_ranks: Vec<usize> = ranks
            .iter()
            .zip(y.iter())
            .filter(|(_, &l)| l == 1)
            .map(|(&r, _)| r)
            .collect();
        if relevant_ranks.is_empty() {
            return None;
        }
        let total: f64 = relevant_ranks
            .iter()
            .map(|&r| relevant_ranks.iter().filter(|&&o| o <= r).count() as f64 / r as f64)
            .sum();
        Some(total / relevant_ranks.len() as f64)
    });
    mean_over(per_row, "average_precision")
}

/// All five metrics; Hamming loss uses `sign(scores)` with `sign(0) = +1`.
pub fn evaluate(scores: ArrayView2<'_, f64>, truth: ArrayView2<'_, i8>) -> Result<MetricReport> {
    evaluate_with_predictions(scores, predict_labels(scores).view(), truth)
}

/// All five metrics with explicit hard predictions for Hamming loss.
pub fn evaluate_with_predictions(
    scores: ArrayView2<'_, f64>,
    predictions: ArrayView2<'_, i8>,
    truth: ArrayView2<'_, i8>,
) -> Result<MetricReport> {
    check_shapes(scores, truth)?;
    let skipped_instances = truth
        .rows()
        .into_iter()
        .filter(|y| y.iter().all(|&v| v == 1) || y.iter().all(|&v| v != 1))
        .count();
    Ok(MetricReport {
        one_error: one_error(scores, truth)?,
        hamming_loss: hamming_loss(predictions, truth)?,
        ranking_loss: ranking_loss(scores, truth)?,
        coverage: coverage(scores, truth)?,
        average_precision: average_precision(scores, truth)?,
        skipped_instances,
    })
}
