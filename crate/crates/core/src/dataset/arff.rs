use std::fs;
use std::path::{Path, PathBuf};

use ndarray::Array2;
use regex::Regex;

use super::{remap_label, Dataset};
use crate::error::{Error, Result};

/// Which ARFF attributes are labels.
#[derive(Debug, Clone, PartialEq)]
pub enum LabelSpec {
    /// MULAN label-list XML naming the label attributes.
    Xml(PathBuf),
    /// The last `n` attributes are labels.
    Trailing(usize),
    /// Label attribute names given directly.
    Names(Vec<String>),
}

#[derive(Debug, Clone, PartialEq)]
enum AttrKind {
    Numeric,
    /// Nominal attribute whose domain is a subset of {0, 1}.
    Binary,
}

#[derive(Debug)]
struct Attribute {
    name: String,
    kind: AttrKind,
}

pub fn load_arff(path: impl AsRef<Path>, labels: &LabelSpec) -> Result<Dataset> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let labels = match labels {
        LabelSpec::Xml(xml) => {
            let xml_text = fs::read_to_string(xml).map_err(|e| Error::io(xml, e))?;
            LabelSpec::Names(parse_mulan_xml(&xml_text)?)
        }
        other => other.clone(),
    };
    parse_arff(&text, &labels, path)
}

/// Extracts `<label name="..."/>` entries from a MULAN label file, in document order.
pub fn parse_mulan_xml(text: &str) -> Result<Vec<String>> {
    let re = Regex::new(r#"<label\s+name\s*=\s*(?:"([^"]*)"|'([^']*)')"#).expect("valid regex");
    let names: Vec<String> = re
        .captures_iter(text)
        .map(|c| unescape_xml(c.get(1).or_else(|| c.get(2)).unwrap().as_str()))
        .collect();
    if names.is_empty() {
        return Err(Error::Config("label XML lists no <label name=...> entries".into()));
    }
    Ok(names)
}

fn unescape_xml(s: &str) -> String {
    s.replace("&lt;", "<")
        .replace("&gt;", ">")
        .replace("&quot;", "\"")
        .replace("&apos;", "'")
        .replace("&amp;", "&")
}

/// Parses ARFF text. `origin` only labels error messages.
pub fn parse_arff(text: &str, labels: &LabelSpec, origin: &Path) -> Result<Dataset> {
    let mut attrs: Vec<Attribute> = Vec::new();
    let mut lines = text.lines().enumerate();
    let mut saw_data = false;

    for (idx, raw) in lines.by_ref() {
        let lineno = idx + 1;
        let line = raw.trim();
        if line.is_empty() || line.starts_with('%') {
            continue;
        }
        let lower = line.to_ascii_lowercase();
        if lower.starts_with("@relation") {
            continue;
        } else if lower.starts_with("@attribute") {
            attrs.push(parse_attribute(&line["@attribute".len()..], origin, lineno)?);
        } else if lower.starts_with("@data") {
            saw_data = true;
            break;
        } else {
            return Err(Error::parse(origin, lineno, format!("unexpected header line {line:?}")));
        }
    }
    if !saw_data {
        return Err(Error::parse(origin, text.lines().count(), "missing @data section"));
    }
    if attrs.is_empty() {
        return Err(Error::parse(origin, 1, "no @attribute declarations"));
    }

    let is_label = resolve_labels(&attrs, labels)?;
    let width = attrs.len();
    let mut rows: Vec<Vec<f64>> = Vec::new();
    for (idx, raw) in lines {
        let lineno = idx + 1;
        let line = raw.trim();
        if line.is_empty() || line.starts_with('%') {
            continue;
        }
        let values = if line.starts_with('{') {
            parse_sparse_row(line, width, origin, lineno)?
        } else {
            parse_dense_row(line, width, origin, lineno)?
        };
        for (j, v) in values.iter().enumerate() {
            if attrs[j].kind == AttrKind::Binary && *v != 0.0 && *v != 1.0 {
                return Err(Error::parse(
                    origin,
                    lineno,
                    format!("value {v} outside nominal domain of {:?}", attrs[j].name),
                ));
            }
        }
        rows.push(values);
    }
    if rows.is_empty() {
        return Err(Error::parse(origin, text.lines().count(), "no data rows"));
    }

    let feature_cols: Vec<usize> = (0..width).filter(|&j| !is_label[j]).collect();
    let label_cols: Vec<usize> = (0..width).filter(|&j| is_label[j]).collect();
    let n = rows.len();
    let mut features = Array2::zeros((n, feature_cols.len()));
    let mut label_mat = Array2::zeros((n, label_cols.len()));
    for (i, row) in rows.iter().enumerate() {
        for (k, &j) in feature_cols.iter().enumerate() {
            features[[i, k]] = row[j];
        }
        for (k, &j) in label_cols.iter().enumerate() {
            label_mat[[i, k]] = remap_label(row[j]).ok_or_else(|| {
                Error::Validation(format!(
                    "row {}: label {:?} has value {} (expected 0, 1, -1)",
                    i + 1,
                    attrs[j].name,
                    row[j]
                ))
            })?;
        }
    }
    Dataset::with_names(
        features,
        label_mat,
        feature_cols.iter().map(|&j| attrs[j].name.clone()).collect(),
        label_cols.iter().map(|&j| attrs[j].name.clone()).collect(),
    )
}

fn resolve_labels(attrs: &[Attribute], spec: &LabelSpec) -> Result<Vec<bool>> {
    let mut is_label = vec![false; attrs.len()];
    match spec {
        LabelSpec::Trailing(q) => {
            if *q == 0 || *q >= attrs.len() {
                return Err(Error::Config(format!(
                    "{q} trailing labels requested but the file declares {} attributes",
                    attrs.len()
                )));
            }
            for flag in is_label.iter_mut().skip(attrs.len() - q) {
                *flag = true;
            }
        }
        LabelSpec::Names(names) => {
            for name in names {
                let j = attrs
                    .iter()
                    .position(|a| &a.name == name)
                    .ok_or_else(|| Error::Config(format!("label {name:?} not declared in ARFF header")))?;
                is_label[j] = true;
            }
            if is_label.iter().all(|&l| l) {
                return Err(Error::Config("every attribute is a label; no features left".into()));
            }
        }
        LabelSpec::Xml(_) => unreachable!("resolved by load_arff"),
    }
    Ok(is_label)
}

fn parse_attribute(rest: &str, origin: &Path, lineno: usize) -> Result<Attribute> {
    let rest = rest.trim_start();
    let (name, tail) = match rest.chars().next() {
        Some(q @ ('\'' | '"')) => {
            let close = rest[1..]
                .find(q)
                .ok_or_else(|| Error::parse(origin, lineno, "unterminated quoted attribute name"))?;
            (rest[1..1 + close].to_string(), &rest[close + 2..])
        }
        Some(_) => {
            let end = rest.find(char::is_whitespace).unwrap_or(rest.len());
            (rest[..end].to_string(), &rest[end..])
        }
        None => return Err(Error::parse(origin, lineno, "attribute without a name")),
    };
    let ty = tail.trim();
    let lower = ty.to_ascii_lowercase();
    let kind = if matches!(lower.as_str(), "numeric" | "real" | "integer") {
        AttrKind::Numeric
    } else if ty.starts_with('{') && ty.ends_with('}') {
        let domain: Vec<&str> = ty[1..ty.len() - 1]
            .split(',')
            .map(|v| v.trim().trim_matches(|c| c == '\'' || c == '"'))
            .collect();
        if domain.iter().all(|v| *v == "0" || *v == "1") {
            AttrKind::Binary
        } else {
            return Err(Error::UnsupportedFeature(format!(
                "attribute {name:?} has nominal domain {ty}; only {{0,1}} is supported"
            )));
        }
    } else if ty.is_empty() {
        return Err(Error::parse(origin, lineno, format!("attribute {name:?} has no type")));
    } else {
        return Err(Error::UnsupportedFeature(format!("attribute {name:?} has type {ty}")));
    };
    Ok(Attribute { name, kind })
}

fn parse_value(token: &str, origin: &Path, lineno: usize) -> Result<f64> {
    let t = token.trim().trim_matches(|c| c == '\'' || c == '"');
    if t == "?" {
        return Err(Error::UnsupportedFeature(format!(
            "line {lineno}: missing values are not supported"
        )));
    }
    t.parse::<f64>()
        .map_err(|_| Error::parse(origin, lineno, format!("non-numeric value {t:?}")))
}

fn parse_dense_row(line: &str, width: usize, origin: &Path, lineno: usize) -> Result<Vec<f64>> {
    let values = line
        .split(',')
        .map(|tok| parse_value(tok, origin, lineno))
        .collect::<Result<Vec<_>>>()?;
    if values.len() != width {
        return Err(Error::parse(
            origin,
            lineno,
            format!("expected {width} values, found {}", values.len()),
        ));
    }
    Ok(values)
}

fn parse_sparse_row(line: &str, width: usize, origin: &Path, lineno: usize) -> Result<Vec<f64>> {
    let close = line
        .find('}')
        .ok_or_else(|| Error::parse(origin, lineno, "unterminated sparse row"))?;
    let mut values = vec![0.0; width];
    for entry in line[1..close].split(',') {
        let entry = entry.trim();
        if entry.is_empty() {
            continue;
        }
        let mut parts = entry.splitn(2, char::is_whitespace);
        let idx = parts
            .next()
            .and_then(|s| s.parse::<usize>().ok())
            .ok_or_else(|| Error::parse(origin, lineno, format!("bad sparse index in {entry:?}")))?;
        let value = parts
            .next()
            .ok_or_else(|| Error::parse(origin, lineno, format!("sparse entry {entry:?} has no value")))?;
        if idx >= width {
            return Err(Error::parse(origin, lineno, format!("sparse index {idx} >= {width}")));
        }
        values[idx] = parse_value(value, origin, lineno)?;
    }
    Ok(values)
}
