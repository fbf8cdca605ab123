use std::collections::BTreeMap;
use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use ndarray::{Array2, Axis};
use serde_json::{json, Value};

use imcc::augment::KMeansConfig;
use imcc::dataset::{compute_stats, load_arff, load_csv, write_csv, Dataset, LabelSpec};
use imcc::harness::{parse_key_values, parse_list, repeated_trials, GridSpec, ProtocolConfig};
use imcc::metrics::evaluate_with_predictions;
use imcc::pipeline::FitCache;
use imcc::solver::{predict_labels, Hyperparams, Model};
use imcc::stats::{average_ranks_named, friedman, nemenyi_cd, within_cd_of_best};
use imcc::synthetic::{generate, BlobConfig};
use imcc::{Error, Result};

use crate::args::{
    BenchmarkArgs, DataArgs, EvaluateArgs, PredictArgs, StatsArgs, SyntheticArgs, TrainArgs,
};

fn is_arff(path: &Path) -> bool {
    path.extension()
        .is_some_and(|e| e.eq_ignore_ascii_case("arff"))
}

fn load(path: &Path, labels: Option<usize>, xml: Option<&PathBuf>) -> Result<Dataset> {
    if is_arff(path) {
        let spec = match (xml, labels) {
            (Some(x), _) => LabelSpec::Xml(x.clone()),
            (None, Some(n)) => LabelSpec::Trailing(n),
            (None, None) => {
                return Err(Error::Config("an ARFF file needs --xml or --labels".into()));
            }
        };
        load_arff(path, &spec)
    } else {
        if xml.is_some() {
            return Err(Error::Config("--xml only applies to ARFF files".into()));
        }
        let n = labels.ok_or_else(|| Error::Config("a CSV file needs --labels".into()))?;
        load_csv(path, n)
    }
}

fn load_data(args: &DataArgs) -> Result<Dataset> {
    load(&args.data, args.labels, args.xml.as_ref())
}

fn write_to(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).map_err(|e| Error::Io {
        path: path.to_path_buf(),
        source: e,
    })
}

fn print_line(v: &Value) {
    println!("{v}");
}

fn kmeans_config(restarts: usize) -> Result<KMeansConfig> {
    if restarts == 0 {
        return Err(Error::Config("--kmeans-restarts must be >= 1".into()));
    }
    Ok(KMeansConfig {
        restarts,
        ..KMeansConfig::default()
    })
}

pub fn train(args: TrainArgs, seed: u64) -> Result<()> {
    let hp = Hyperparams::new(args.alpha, args.beta, args.gamma, args.clusters)?;
    let data = load_data(&args.data)?;
    let kmeans = kmeans_config(args.kmeans_restarts)?;
    let fitted = FitCache::new(&data, args.kernel, args.normalize, kmeans, seed)?.fit(&hp)?;
    if let Some(sigma) = fitted.sigma {
        print_line(&json!({"event": "sigma", "value": sigma}));
    }
    print_line(&json!({"event": "clusters", "sizes": fitted.cluster_sizes()}));
    print_line(&json!({"event": "objective", "value": fitted.objective(&hp)?}));
    fitted.model.save(&args.model_out)?;
    print_line(&json!({"event": "model", "path": args.model_out.display().to_string()}));
    Ok(())
}

pub fn predict(args: PredictArgs) -> Result<()> {
    let model = Model::load(&args.model)?;
    let labels = args.labels.or(Some(model.num_labels()));
    let data = load(&args.data, labels, args.xml.as_ref())?;
    let scores = model.predict_scores(data.features().view())?;
    let signs = predict_labels(scores.view());

    let mut w = csv::Writer::from_writer(Vec::new());
    let names = data.label_names();
    let header: Vec<String> = names
        .iter()
        .map(|n| format!("score_{n}"))
        .chain(names.iter().map(|n| format!("sign_{n}")))
        .collect();
    let csv_err = |e: csv::Error| Error::Validation(format!("writing predictions: {e}"));
    w.write_record(&header).map_err(csv_err)?;
    for (s, p) in scores.rows().into_iter().zip(signs.rows()) {
        let record: Vec<String> = s
            .iter()
            .map(|v| v.to_string())
            .chain(p.iter().map(|v| v.to_string()))
            .collect();
        w.write_record(&record).map_err(csv_err)?;
    }
    let bytes = w.into_inner().map_err(|e| Error::Validation(e.to_string()))?;
    match &args.out {
        Some(path) => fs::write(path, &bytes).map_err(|e| Error::Io {
            path: path.clone(),
            source: e,
        }),
        None => io::stdout().write_all(&bytes).map_err(|e| Error::Io {
            path: PathBuf::from("<stdout>"),
            source: e,
        }),
    }
}

/// Scores and hard predictions from a `predict` CSV.
fn read_predictions(path: &Path) -> Result<(Array2<f64>, Array2<i8>)> {
    let text = fs::read_to_string(path).map_err(|e| Error::Io {
        path: path.to_path_buf(),
        source: e,
    })?;
    let mut reader = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(text.as_bytes());
    let parse_err = |line: usize, message: String| Error::Parse {
        path: path.to_path_buf(),
        line,
        message,
    };
    let width = reader.headers().map_err(|e| parse_err(1, e.to_string()))?.len();
    if width == 0 || width % 2 != 0 {
        return Err(parse_err(1, format!("expected 2q columns, found {width}")));
    }
    let q = width / 2;
    let (mut scores, mut signs) = (Vec::new(), Vec::new());
    let mut rows = 0;
    for (i, record) in reader.records().enumerate() {
        let line = i + 2;
        let record = record.map_err(|e| parse_err(line, e.to_string()))?;
        for (j, cell) in record.iter().enumerate() {
            if j < q {
                let v: f64 = cell.parse().map_err(|_| parse_err(line, format!("bad score {cell:?}")))?;
                scores.push(v);
            } else {
                let v: i8 = match cell {
                    "1" | "+1" => 1,
                    "-1" => -1,
                    _ => return Err(parse_err(line, format!("bad sign {cell:?}"))),
                };
                signs.push(v);
            }
        }
        rows += 1;
    }
    let scores = Array2::from_shape_vec((rows, q), scores).expect("row widths checked by csv");
    let signs = Array2::from_shape_vec((rows, q), signs).expect("row widths checked by csv");
    Ok((scores, signs))
}

pub fn evaluate(args: EvaluateArgs) -> Result<()> {
    let (scores, signs) = read_predictions(&args.predictions)?;
    let labels = args.labels.or(Some(scores.ncols()));
    let data = load(&args.data, labels, args.xml.as_ref())?;
    if data.num_examples() != scores.nrows() {
        return Err(Error::Validation(format!(
            "predictions have {} rows but the data has {}",
            scores.nrows(),
            data.num_examples()
        )));
    }
    let report = evaluate_with_predictions(scores.view(), signs.view(), data.labels().view())?;
    println!("{}", serde_json::to_string_pretty(&report)?);
    Ok(())
}

fn list_override<T: std::str::FromStr>(target: &mut Vec<T>, flag: &Option<String>) -> Result<()> {
    if let Some(text) = flag {
        *target = parse_list(text)?;
    }
    Ok(())
}

pub fn benchmark(args: BenchmarkArgs, seed: u64) -> Result<()> {
    let data = load_data(&args.data)?;
    let mut grid = if args.full_grid {
        GridSpec::full()
    } else {
        GridSpec::reduced()
    };
    if let Some(path) = &args.grid {
        let text = fs::read_to_string(path).map_err(|e| Error::Io {
            path: path.clone(),
            source: e,
        })?;
        grid = grid.with_overrides(&parse_key_values(&text)?)?;
    }
    list_override(&mut grid.alpha_values, &args.alpha)?;
    list_override(&mut grid.beta_values, &args.beta)?;
    list_override(&mut grid.gamma_values, &args.gamma)?;
    list_override(&mut grid.cluster_values, &args.clusters)?;
    if let Some(kind) = args.kernel {
        grid.kernel_kind = kind;
    }
    grid.validate()?;

    let protocol = ProtocolConfig {
        folds: args.folds,
        select_metric: args.select_metric,
        normalization: args.normalize,
        kmeans: kmeans_config(args.kmeans_restarts)?,
    };
    let report = repeated_trials(&data, &grid, &protocol, args.repeats, args.train_fraction, seed)?;
    print!("{}", report.summary_table());
    if let Some(path) = &args.report {
        write_to(path, &serde_json::to_string_pretty(&report)?)?;
    }
    if let Some(path) = &args.surface_csv {
        write_to(path, &report.surface_csv())?;
    }
    Ok(())
}

/// Metric table: header of algorithm names, one row per dataset.
fn read_value_table(path: &Path) -> Result<(Vec<String>, Array2<f64>)> {
    let mut reader = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| Error::Io {
            path: path.to_path_buf(),
            source: io::Error::other(e),
        })?;
    let parse_err = |line: usize, message: String| Error::Parse {
        path: path.to_path_buf(),
        line,
        message,
    };
    let names: Vec<String> = reader
        .headers()
        .map_err(|e| parse_err(1, e.to_string()))?
        .iter()
        .map(str::to_string)
        .collect();
    let mut values = Vec::new();
    let mut rows = 0;
    for (i, record) in reader.records().enumerate() {
        let line = i + 2;
        let record = record.map_err(|e| parse_err(line, e.to_string()))?;
        for cell in record.iter() {
            values.push(cell.parse::<f64>().map_err(|_| parse_err(line, format!("not a number: {cell:?}")))?);
        }
        rows += 1;
    }
    let table = Array2::from_shape_vec((rows, names.len()), values).expect("row widths checked by csv");
    Ok((names, table))
}

pub fn stats(args: StatsArgs) -> Result<()> {
    let (names, values) = read_value_table(&args.input)?;
    let datasets = (1..=values.nrows()).map(|i| format!("dataset_{i}")).collect();
    let table = average_ranks_named(values.view(), args.higher_is_better, names, datasets)?;
    let fr = friedman(&table)?;
    let cd = nemenyi_cd(fr.k, fr.n_datasets, args.q_alpha)?;
    let average_ranks: BTreeMap<&str, f64> = table
        .algorithm_names
        .iter()
        .map(String::as_str)
        .zip(table.ranks.mean_axis(Axis(0)).expect("N >= 2"))
        .collect();
    let out = json!({
        "k": fr.k,
        "n_datasets": fr.n_datasets,
        "chi_squared": fr.chi_squared,
        "f_statistic": fr.f_statistic,
        "critical_difference": cd.critical_difference,
        "q_alpha": cd.q_alpha,
        "average_ranks": average_ranks,
    });
    println!("{}", serde_json::to_string_pretty(&out)?);
    eprintln!("within one CD ({:.4}) of the best:", cd.critical_difference);
    for (name, rank) in within_cd_of_best(&table, cd.critical_difference) {
        eprintln!("  {name:<16}{rank:.4}");
    }
    Ok(())
}

pub fn gen_synthetic(args: SyntheticArgs, seed: u64) -> Result<()> {
    let config = BlobConfig {
        n: args.n,
        d: args.d,
        q: args.q,
        blobs: args.blobs,
        flip_prob: args.flip_prob,
        center_spread: args.center_spread,
        blob_std: args.blob_std,
        label_density: args.label_density,
    };
    let data = generate(&config, seed)?;
    write_csv(&data, &args.out)?;
    println!("{}", serde_json::to_string_pretty(&compute_stats(&data))?);
    Ok(())
}

pub fn describe(args: DataArgs) -> Result<()> {
    let data = load_data(&args)?;
    println!("{}", serde_json::to_string_pretty(&compute_stats(&data))?);
    Ok(())
}

