mod common;

use std::time::Instant;

use common::*;
use imcc::dataset::Dataset;
use imcc::harness::{
    cross_validate, cross_validate_folds, fold_indices, grid_search, repeated_trials, GridSpec, ProtocolConfig,
};
use imcc::metrics::MetricKind;
use imcc::pipeline::KernelKind;
use imcc::solver::Hyperparams;
use imcc::synthetic::{generate, BlobConfig};
use ndarray::Array2;

fn small_blobs(seed: u64) -> Dataset {
    generate(&BlobConfig { n: 80, d: 4, q: 3, blobs: 4, ..BlobConfig::default() }, seed).unwrap()
}

fn small_grid() -> GridSpec {
    GridSpec {
        alpha_values: vec![0.1, 1.0],
        beta_values: vec![1.0],
        gamma_values: vec![0.0, 0.1],
        cluster_values: vec![4],
        kernel_kind: KernelKind::Gaussian,
    }
}

#[test]
fn mirrored_halves_score_alike() {
    let n = 40;
    let folds = fold_indices(n, 2, 9).unwrap();
    let base = small_blobs(1);
    let mut x = Array2::zeros((n, 4));
    let mut y = Array2::zeros((n, 3));
    for (i, (&a, &b)) in folds[0].iter().zip(&folds[1]).enumerate() {
        for target in [a, b] {
            x.row_mut(target).assign(&base.features().row(i));
            y.row_mut(target).assign(&base.labels().row(i));
        }
    }
    let data = Dataset::new(x, y).unwrap();
    let protocol = ProtocolConfig { folds: 2, ..ProtocolConfig::default() };
    let hp = Hyperparams::new(1.0, 1.0, 0.1, 3).unwrap();
    let scores = cross_validate_folds(&data, &hp, KernelKind::Gaussian, &protocol, 9).unwrap();
    assert_eq!(scores[0], scores[1]);
    let mean = cross_validate(&data, &hp, KernelKind::Gaussian, 2, 9, MetricKind::AveragePrecision).unwrap();
    assert_eq!(mean, scores[0]);
}

#[test]
fn cross_validation_is_deterministic() {
    let data = small_blobs(2);
    let hp = Hyperparams::new(0.5, 1.0, 0.1, 4).unwrap();
    let a = cross_validate(&data, &hp, KernelKind::Gaussian, 5, 17, MetricKind::RankingLoss).unwrap();
    let b = cross_validate(&data, &hp, KernelKind::Gaussian, 5, 17, MetricKind::RankingLoss).unwrap();
    assert_eq!(a, b);
    assert!(fold_indices(25, 5, 3).unwrap().iter().all(|f| f.len() == 5));
}

#[test]
fn heavy_ridge_loses_on_a_linear_target() {
    let mut r = rng(4);
    let x = random_matrix(&mut r, 60, 3);
    let y = x.map_axis(ndarray::Axis(1), |row| if row[0] - row[1] >= 0.0 { 1i8 } else { -1 });
    let labels = ndarray::stack![ndarray::Axis(1), y, y.mapv(|v| -v)];
    let data = Dataset::new(x, labels).unwrap();
    let grid = GridSpec {
        alpha_values: vec![0.0],
        beta_values: vec![1e4, 0.01],
        gamma_values: vec![0.0],
        cluster_values: vec![2],
        kernel_kind: KernelKind::Linear,
    };
    let protocol = ProtocolConfig { select_metric: MetricKind::HammingLoss, ..ProtocolConfig::default() };
    let found = grid_search(&data, &grid, &protocol, 5).unwrap();
    assert_eq!(found.best.beta, 0.01);
}

#[test]
fn grid_order_does_not_change_the_winning_score() {
    let data = small_blobs(3);
    let protocol = ProtocolConfig::default();
    let forward = grid_search(&data, &small_grid(), &protocol, 8).unwrap();
    let mut reversed = small_grid();
    reversed.alpha_values.reverse();
    reversed.gamma_values.reverse();
    let backward = grid_search(&data, &reversed, &protocol, 8).unwrap();
    assert_eq!(forward.best_score, backward.best_score);
    assert_eq!(forward.best, backward.best);
}

#[test]
fn singleton_grid_returns_its_point() {
    let data = small_blobs(4);
    let hp = Hyperparams::new(0.3, 2.0, 0.0, 5).unwrap();
    let found = grid_search(&data, &GridSpec::single(hp, KernelKind::Gaussian), &ProtocolConfig::default(), 1).unwrap();
    assert_eq!(found.best, hp);
}

#[test]
fn every_point_failing_is_a_config_error() {
    let data = small_blobs(5);
    let mut grid = small_grid();
    grid.cluster_values = vec![500, 600];
    let err = grid_search(&data, &grid, &ProtocolConfig::default(), 1).unwrap_err();
    assert_eq!(err.class(), imcc::ErrorClass::Usage);
}

#[test]
fn single_trial_has_zero_spread() {
    let data = small_blobs(6);
    let report = repeated_trials(&data, &small_grid(), &ProtocolConfig::default(), 1, 0.8, 11).unwrap();
    assert_eq!(report.trials.len(), 1);
    for (name, ms) in &report.summary {
        let kind: MetricKind = name.parse().unwrap();
        assert_eq!(ms.mean, kind.get(&report.trials[0].metrics));
        assert_eq!(ms.std, 0.0);
    }
}

#[test]
fn trials_are_reproducible_and_summaries_bounded() {
    let data = small_blobs(7);
    let protocol = ProtocolConfig::default();
    let a = repeated_trials(&data, &small_grid(), &protocol, 3, 0.8, 100).unwrap();
    let b = repeated_trials(&data, &small_grid(), &protocol, 3, 0.8, 100).unwrap();
    assert_eq!(a.summary, b.summary);
    assert_eq!(a.surfaces, b.surfaces);
    for kind in MetricKind::ALL {
        let values: Vec<f64> = a.trials.iter().map(|t| kind.get(&t.metrics)).collect();
        let mean = a.summary[kind.name()].mean;
        let lo = values.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        assert!(lo - 1e-12 <= mean && mean <= hi + 1e-12);
    }
    assert_eq!(a.trials.iter().map(|t| t.seed).collect::<Vec<_>>(), vec![100, 101, 102]);
}

#[test]
fn reduced_grid_on_default_blobs_fits_the_time_budget() {
    let data = generate(&BlobConfig::default(), 42).unwrap();
    let started = Instant::now();
    let report = repeated_trials(&data, &GridSpec::reduced(), &ProtocolConfig::default(), 10, 0.8, 42).unwrap();
    let elapsed = started.elapsed().as_secs_f64();
    assert_eq!(report.trials.len(), 10);
    assert!(elapsed < 60.0, "took {elapsed:.1}s");
}
