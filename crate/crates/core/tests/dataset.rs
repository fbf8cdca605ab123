mod common;

use std::fs;

use common::*;
use imcc::dataset::{compute_stats, load_arff, load_csv, split_indices, write_csv, Dataset, LabelSpec};
use imcc::ErrorClass;
use ndarray::Array2;
use proptest::prelude::*;

const SCENE_LIKE: &str = "@relation tiny
@attribute f1 numeric
@attribute 'f 2' real
@attribute beach {0,1}
@attribute urban {0,1}
@data
0.5,1.25,1,0
{0 -2,3 1}
% comment
1e-3,4,0,0
";

const LABELS_XML: &str = r#"<?xml version="1.0" encoding="utf-8"?>
<labels xmlns="http://mulan.sourceforge.net/labels">
<label name="beach"></label>
<label name="urban"></label>
</labels>
"#;

#[test]
fn arff_with_label_xml_on_disk() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("tiny.arff"), SCENE_LIKE).unwrap();
    fs::write(dir.path().join("tiny.xml"), LABELS_XML).unwrap();
    let data = load_arff(dir.path().join("tiny.arff"), &LabelSpec::Xml(dir.path().join("tiny.xml"))).unwrap();
    assert_eq!(data.features(), &ndarray::array![[0.5, 1.25], [-2.0, 0.0], [1e-3, 4.0]]);
    assert_eq!(data.labels(), &ndarray::array![[1, -1], [-1, 1], [-1, -1]]);
    assert_eq!(data.feature_names(), ["f1", "f 2"]);
    assert_eq!(data.label_names(), ["beach", "urban"]);

    let same = load_arff(dir.path().join("tiny.arff"), &LabelSpec::Trailing(2)).unwrap();
    assert_eq!(same, data);
}

#[test]
fn missing_file_is_a_data_error() {
    let err = load_csv("/nonexistent/imcc.csv", 2).unwrap_err();
    assert_eq!(err.class(), ErrorClass::Data);
}

#[test]
fn distinct_seeds_give_distinct_splits() {
    for n in 3..12 {
        let first = split_indices(n, 0.6, 0).unwrap();
        assert!((1..=20).any(|s| split_indices(n, 0.6, s).unwrap() != first));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn csv_round_trip(seed in 0u64..10_000, n in 1usize..20, d in 1usize..6, q in 1usize..5, scale in -300i32..300) {
        let mut r = rng(seed);
        let factor = 10f64.powi(scale / 10);
        let x = random_matrix(&mut r, n, d).mapv(|v| v * factor);
        let y = random_labels(&mut r, n, q);
        let data = Dataset::new(x, y).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("data.csv");
        write_csv(&data, &path).unwrap();
        let back = load_csv(&path, q).unwrap();
        prop_assert_eq!(back.labels(), data.labels());
        let gap = back.features() - data.features();
        prop_assert!(max_abs(gap.iter().copied()) <= 1e-12 * factor.max(1.0));
    }

    #[test]
    fn density_times_labels_is_cardinality(seed in 0u64..10_000, n in 1usize..40, q in 1usize..9) {
        let mut r = rng(seed);
        let data = Dataset::new(Array2::zeros((n, 1)), random_labels(&mut r, n, q)).unwrap();
        let meta = compute_stats(&data);
        prop_assert!((meta.label_density * q as f64 - meta.label_cardinality).abs() <= 1e-12);
        prop_assert!(meta.distinct_label_sets >= 1 && meta.distinct_label_sets <= n);
    }
}
