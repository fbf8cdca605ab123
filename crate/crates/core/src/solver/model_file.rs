//! JSON model envelope.
//!
//! Matrices are flat row-major arrays; every float is written in scientific
//! notation with 17 significant digits.

use std::fs;
use std::io;
use std::path::Path;

use ndarray::{Array1, Array2, ArrayView2};
use serde_json::{json, Value};

use super::kernel::KernelSpec;
use super::kernelized::KernelModel;
use super::linear::LinearModel;
use crate::dataset::NormStats;
use crate::error::{Error, Result};

pub const FORMAT_VERSION: u64 = 1;

/// A fitted model of either form.
#[derive(Debug, Clone, PartialEq)]
pub enum Model {
    Linear(LinearModel),
    Kernel(KernelModel),
}

impl From<LinearModel> for Model {
    fn from(m: LinearModel) -> Self {
        Model::Linear(m)
    }
}

impl From<KernelModel> for Model {
    fn from(m: KernelModel) -> Self {
        Model::Kernel(m)
    }
}

impl Model {
    pub fn predict_scores(&self, features: ArrayView2<'_, f64>) -> Result<Array2<f64>> {
        match self {
            Model::Linear(m) => m.predict_scores(features),
            Model::Kernel(m) => m.predict_scores(features),
        }
    }

    pub fn num_features(&self) -> usize {
        match self {
            Model::Linear(m) => m.num_features(),
            Model::Kernel(m) => m.num_features(),
        }
    }

    pub fn num_labels(&self) -> usize {
        match self {
            Model::Linear(m) => m.num_labels(),
            Model::Kernel(m) => m.num_labels(),
        }
    }

    pub fn norm_stats(&self) -> &NormStats {
        match self {
            Model::Linear(m) => &m.norm_stats,
            Model::Kernel(m) => &m.norm_stats,
        }
    }

    pub fn set_norm_stats(&mut self, stats: NormStats) {
        match self {
            Model::Linear(m) => m.norm_stats = stats,
            Model::Kernel(m) => m.norm_stats = stats,
        }
    }

    pub fn to_value(&self) -> Value {
        let norm = self.norm_stats();
        let mut v = json!({
            "format_version": FORMAT_VERSION,
            "d": self.num_features(),
            "q": self.num_labels(),
            "norm": { "center": norm.center.to_vec(), "scale": norm.scale.to_vec() },
        });
        let obj = v.as_object_mut().expect("object literal");
        match self {
            Model::Linear(m) => {
                obj.insert("kind".into(), json!("linear"));
                obj.insert("kernel".into(), json!({ "kind": "linear", "sigma": null }));
                obj.insert("n".into(), json!(m.train_rows));
                obj.insert("bias".into(), json!(m.bias.to_vec()));
                obj.insert("weights".into(), json!(flatten(&m.weights)));
            }
            Model::Kernel(m) => {
                obj.insert("kind".into(), json!("kernel"));
                obj.insert("kernel".into(), json!({ "kind": m.spec.name(), "sigma": m.spec.sigma() }));
                obj.insert("n".into(), json!(m.train_features.nrows()));
                obj.insert("bias".into(), json!(m.bias.to_vec()));
                obj.insert("coefficients".into(), json!(flatten(&m.coefficients)));
                obj.insert("train_features".into(), json!(flatten(&m.train_features)));
            }
        }
        v
    }

    pub fn to_json_string(&self) -> String {
        to_json_17(&self.to_value())
    }

    pub fn from_json_str(text: &str) -> Result<Model> {
        let v: Value = serde_json::from_str(text)?;
        Model::from_value(&v)
    }

    pub fn from_value(v: &Value) -> Result<Model> {
        let version = field(v, "format_version")?.as_u64().ok_or_else(|| bad("format_version"))?;
        if version != FORMAT_VERSION {
            return Err(Error::Validation(format!("unsupported model format_version {version}")));
        }
        let d = count(v, "d")?;
        let q = count(v, "q")?;
        let n = count(v, "n")?;
        let norm = field(v, "norm")?;
        let norm_stats = NormStats {
            center: Array1::from(floats(field(norm, "center")?, d, "norm.center")?),
            scale: Array1::from(floats(field(norm, "scale")?, d, "norm.scale")?),
        };
        let bias = Array1::from(floats(field(v, "bias")?, q, "bias")?);
        match field(v, "kind")?.as_str() {
            Some("linear") => {
                let weights = matrix(field(v, "weights")?, d, q, "weights")?;
                Ok(Model::Linear(LinearModel {
                    weights,
                    bias,
                    norm_stats,
                    train_rows: n,
                }))
            }
            Some("kernel") => {
                let kernel = field(v, "kernel")?;
                let spec = match field(kernel, "kind")?.as_str() {
                    Some("gaussian") => {
                        let sigma = field(kernel, "sigma")?.as_f64().ok_or_else(|| bad("kernel.sigma"))?;
                        KernelSpec::gaussian(sigma)?
                    }
                    Some("linear") => KernelSpec::Linear,
                    _ => return Err(bad("kernel.kind")),
                };
                Ok(Model::Kernel(KernelModel {
                    coefficients: matrix(field(v, "coefficients")?, n, q, "coefficients")?,
                    bias,
                    spec,
                    train_features: matrix(field(v, "train_features")?, n, d, "train_features")?,
                    norm_stats,
                }))
            }
            _ => Err(bad("kind")),
        }
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        fs::write(path, self.to_json_string()).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Model> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Model::from_json_str(&text)
    }
}

fn flatten(m: &Array2<f64>) -> Vec<f64> {
    m.iter().copied().collect()
}

fn bad(key: &str) -> Error {
    Error::Validation(format!("model file: missing or invalid {key:?}"))
}

fn field<'a>(v: &'a Value, key: &str) -> Result<&'a Value> {
    v.get(key).ok_or_else(|| bad(key))
}

fn count(v: &Value, key: &str) -> Result<usize> {
    field(v, key)?.as_u64().map(|x| x as usize).ok_or_else(|| bad(key))
}

fn floats(v: &Value, len: usize, key: &str) -> Result<Vec<f64>> {
    let arr = v.as_array().ok_or_else(|| bad(key))?;
    if arr.len() != len {
        return Err(Error::Validation(format!(
            "model file: {key} has {} entries, expected {len}",
            arr.len()
        )));
    }
    arr.iter().map(|x| x.as_f64().ok_or_else(|| bad(key))).collect()
}

fn matrix(v: &Value, rows: usize, cols: usize, key: &str) -> Result<Array2<f64>> {
    let data = floats(v, rows * cols, key)?;
    Ok(Array2::from_shape_vec((rows, cols), data).expect("length checked"))
}

/// Formats every float with 17 significant digits.
struct SeventeenDigits;

impl serde_json::ser::Formatter for SeventeenDigits {
    fn write_f64<W: ?Sized + io::Write>(&mut self, writer: &mut W, value: f64) -> io::Result<()> {
        write!(writer, "{value:.16e}")
    }
}

/// Serializes `v` with 17-significant-digit floats.
pub fn to_json_17(v: &Value) -> String {
    use serde::Serialize;
    let mut out = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut out, SeventeenDigits);
    v.serialize(&mut ser).expect("serializing a Value cannot fail");
    String::from_utf8(out).expect("JSON is UTF-8")
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    #[test]
    fn linear_round_trip_is_exact() {
        let m = Model::Linear(LinearModel {
            weights: array![[0.1, 1.0 / 3.0], [-2.5e-300, 7.0]],
            bias: array![std::f64::consts::PI, -0.0],
            norm_stats: NormStats {
                center: array![1.0, 2.0],
                scale: array![0.5, 3.0],
            },
            train_rows: 9,
        });
        let text = m.to_json_string();
        assert!(text.contains("3.3333333333333331e-1"), "{text}");
        assert_eq!(Model::from_json_str(&text).unwrap(), m);
    }

    #[test]
    fn rejects_wrong_lengths() {
        let bad = r#"{"format_version":1,"kind":"linear","kernel":{"kind":"linear","sigma":null},
            "d":2,"q":1,"n":3,"norm":{"center":[0,0],"scale":[1,1]},"bias":[0],"weights":[1]}"#;
        assert!(Model::from_json_str(bad).is_err());
        assert!(Model::from_json_str(r#"{"format_version":2}"#).is_err());
    }
}
