//! Dense tanh networks.
//!
//! A network with `L` layers maps `x = z⁰` through `yᵏ = Wᵏ zᵏ⁻¹ + bᵏ`,
//! `zᵏ = tanh(yᵏ)` for the hidden layers; the last layer is linear.
//! Input coordinate 0 is time, the rest are spatial.
//!
//! Weight files are JSON:
//! `{"activation":"tanh","layers":[{"weight":[[..],..],"bias":[..]},..]}`
//! with one row per output neuron. Networks with two outputs (Schrödinger)
//! store the real part in output 0 and the imaginary part in output 1.

use std::fs;
use std::path::{Path, PathBuf};

use ndarray::{Array1, Array2};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum NetworkError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("malformed weight file: {0}")]
    Parse(String),
    #[error("layer {layer}: {message}")]
    Shape { layer: usize, message: String },
    #[error("layer {layer}: non-finite {field} entry")]
    NonFinite { layer: usize, field: &'static str },
    #[error("unsupported activation `{0}`")]
    UnsupportedActivation(String),
    #[error("a network needs a hidden layer and an output layer, got {0} layer(s)")]
    TooFewLayers(usize),
    #[error("input has length {found}, network expects {expected}")]
    InputLength { expected: usize, found: usize },
    #[error("coordinate {index} out of range for input dimension {dim}")]
    Coordinate { index: usize, dim: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Activation {
    Tanh,
}

impl Activation {
    pub fn name(self) -> &'static str {
        match self {
            Activation::Tanh => "tanh",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DenseLayer {
    /// `out × in`
    pub weight: Array2<f64>,
    pub bias: Array1<f64>,
}

impl DenseLayer {
    pub fn new(weight: Array2<f64>, bias: Array1<f64>) -> Self {
        DenseLayer { weight, bias }
    }

    pub fn in_dim(&self) -> usize {
        self.weight.ncols()
    }

    pub fn out_dim(&self) -> usize {
        self.weight.nrows()
    }
}

/// Immutable once built; every layer but the last is followed by tanh.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseNetwork {
    layers: Vec<DenseLayer>,
    activation: Activation,
}

#[derive(Serialize, Deserialize)]
struct LayerFile {
    weight: Vec<Vec<f64>>,
    bias: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
struct WeightFile {
    activation: String,
    layers: Vec<LayerFile>,
}

/// Value and the first two derivatives of every output along one input coordinate.
#[derive(Debug, Clone, PartialEq)]
pub struct Jet {
    pub value: Vec<f64>,
    pub first: Vec<f64>,
    pub second: Vec<f64>,
}

impl DenseNetwork {
    /// Validates the dimension chain and finiteness. Layer indices in errors are 1-based.
    pub fn new(layers: Vec<DenseLayer>, activation: Activation) -> Result<Self, NetworkError> {
        if layers.len() < 2 {
            return Err(NetworkError::TooFewLayers(layers.len()));
        }
        for (k, layer) in layers.iter().enumerate() {
            let idx = k + 1;
            if layer.out_dim() == 0 || layer.in_dim() == 0 {
                return Err(NetworkError::Shape {
                    layer: idx,
                    message: "empty weight matrix".into(),
                });
            }
            if layer.bias.len() != layer.out_dim() {
                return Err(NetworkError::Shape {
                    layer: idx,
                    message: format!(
                        "bias has length {} but weight has {} rows",
                        layer.bias.len(),
                        layer.out_dim()
                    ),
                });
            }
            if k > 0 && layers[k - 1].out_dim() != layer.in_dim() {
                return Err(NetworkError::Shape {
                    layer: idx,
                    message: format!(
                        "weight has {} columns but layer {} has {} outputs",
                        layer.in_dim(),
                        k,
                        layers[k - 1].out_dim()
                    ),
                });
            }
            if layer.weight.iter().any(|v| !v.is_finite()) {
                return Err(NetworkError::NonFinite {
                    layer: idx,
                    field: "weight",
                });
            }
            if layer.bias.iter().any(|v| !v.is_finite()) {
                return Err(NetworkError::NonFinite {
                    layer: idx,
                    field: "bias",
                });
            }
        }
        Ok(DenseNetwork { layers, activation })
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, NetworkError> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|source| NetworkError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Self::from_json(&text)
    }

    pub fn from_json(text: &str) -> Result<Self, NetworkError> {
        let file: WeightFile =
            serde_json::from_str(text).map_err(|e| NetworkError::Parse(e.to_string()))?;
        let activation = match file.activation.as_str() {
            "tanh" => Activation::Tanh,
            other => return Err(NetworkError::UnsupportedActivation(other.to_string())),
        };
        let mut layers = Vec::with_capacity(file.layers.len());
        for (k, lf) in file.layers.into_iter().enumerate() {
            let rows = lf.weight.len();
            let cols = lf.weight.first().map_or(0, Vec::len);
            if let Some(r) = lf.weight.iter().position(|row| row.len() != cols) {
                return Err(NetworkError::Shape {
                    layer: k + 1,
                    message: format!("weight row {r} has a different length than row 0"),
                });
            }
            let flat: Vec<f64> = lf.weight.into_iter().flatten().collect();
            let weight =
                Array2::from_shape_vec((rows, cols), flat).map_err(|e| NetworkError::Shape {
                    layer: k + 1,
                    message: e.to_string(),
                })?;
            layers.push(DenseLayer::new(weight, Array1::from(lf.bias)));
        }
        Self::new(layers, activation)
    }

    pub fn to_json(&self) -> String {
        let file = WeightFile {
            activation: self.activation.name().to_string(),
            layers: self
                .layers
                .iter()
                .map(|l| LayerFile {
                    weight: l.weight.rows().into_iter().map(|r| r.to_vec()).collect(),
                    bias: l.bias.to_vec(),
                })
                .collect(),
        };
        serde_json::to_string(&file).expect("weight file serialization cannot fail")
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<(), NetworkError> {
        let path = path.as_ref();
        fs::write(path, self.to_json()).map_err(|source| NetworkError::Io {
            path: path.to_path_buf(),
            source,
        })
    }

    /// Uniform weights in `±gain·sqrt(6/(fan_in+fan_out))` and biases in `±0.5·gain`.
    pub fn random(dims: &[usize], gain: f64, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let layers = dims
            .windows(2)
            .map(|w| {
                let (fan_in, fan_out) = (w[0], w[1]);
                let s = gain * (6.0 / (fan_in + fan_out) as f64).sqrt();
                let weight = Array2::from_shape_fn((fan_out, fan_in), |_| rng.gen_range(-s..=s));
                let bias = Array1::from_shape_fn(fan_out, |_| rng.gen_range(-0.5..=0.5) * gain);
                DenseLayer::new(weight, bias)
            })
            .collect();
        Self::new(layers, Activation::Tanh).expect("random network dimensions must chain")
    }

    pub fn layers(&self) -> &[DenseLayer] {
        &self.layers
    }

    pub fn layer(&self, k: usize) -> &DenseLayer {
        &self.layers[k]
    }

    pub fn num_layers(&self) -> usize {
        self.layers.len()
    }

    pub fn activation(&self) -> Activation {
        self.activation
    }

    pub fn input_dim(&self) -> usize {
        self.layers[0].in_dim()
    }

    pub fn output_dim(&self) -> usize {
        self.layers[self.layers.len() - 1].out_dim()
    }

    /// Widths `d₀, d₁, …, d_L`.
    pub fn widths(&self) -> Vec<usize> {
        std::iter::once(self.input_dim())
            .chain(self.layers.iter().map(DenseLayer::out_dim))
            .collect()
    }

    pub fn check_input(&self, x: &[f64]) -> Result<(), NetworkError> {
        if x.len() != self.input_dim() {
            return Err(NetworkError::InputLength {
                expected: self.input_dim(),
                found: x.len(),
            });
        }
        Ok(())
    }

    pub fn check_coordinate(&self, i: usize) -> Result<(), NetworkError> {
        if i >= self.input_dim() {
            return Err(NetworkError::Coordinate {
                index: i,
                dim: self.input_dim(),
            });
        }
        Ok(())
    }

    pub fn forward(&self, x: &[f64]) -> Result<Vec<f64>, NetworkError> {
        self.check_input(x)?;
        let mut z = x.to_vec();
        let last = self.layers.len() - 1;
        for (k, layer) in self.layers.iter().enumerate() {
            let mut y = affine(layer, &z);
            if k < last {
                y.iter_mut().for_each(|v| *v = v.tanh());
            }
            z = y;
        }
        Ok(z)
    }

    /// Forward-mode propagation of `z`, `∂ᵢz` and `∂ᵢ²z` through every layer.
    pub fn jet(&self, x: &[f64], i: usize) -> Result<Jet, NetworkError> {
        self.check_input(x)?;
        self.check_coordinate(i)?;
        let mut z = x.to_vec();
        let mut dz = vec![0.0; x.len()];
        dz[i] = 1.0;
        let mut d2z = vec![0.0; x.len()];
        let last = self.layers.len() - 1;
        for (k, layer) in self.layers.iter().enumerate() {
            let y = affine(layer, &z);
            let dy = linear(layer, &dz);
            let d2y = linear(layer, &d2z);
            if k == last {
                return Ok(Jet {
                    value: y,
                    first: dy,
                    second: d2y,
                });
            }
            z = y.iter().map(|v| v.tanh()).collect();
            let s1: Vec<f64> = z.iter().map(|t| 1.0 - t * t).collect();
            d2z = (0..y.len())
                .map(|j| -2.0 * z[j] * s1[j] * dy[j] * dy[j] + s1[j] * d2y[j])
                .collect();
            dz = (0..y.len()).map(|j| s1[j] * dy[j]).collect();
        }
        unreachable!("a network always has an output layer")
    }

    pub fn exact_first_derivative(&self, x: &[f64], i: usize) -> Result<Vec<f64>, NetworkError> {
        Ok(self.jet(x, i)?.first)
    }

    pub fn exact_second_derivative(&self, x: &[f64], i: usize) -> Result<Vec<f64>, NetworkError> {
        Ok(self.jet(x, i)?.second)
    }
}

fn affine(layer: &DenseLayer, z: &[f64]) -> Vec<f64> {
    layer
        .weight
        .rows()
        .into_iter()
        .zip(layer.bias.iter())
        .map(|(row, b)| row.iter().zip(z).map(|(w, v)| w * v).sum::<f64>() + b)
        .collect()
}

fn linear(layer: &DenseLayer, z: &[f64]) -> Vec<f64> {
    layer
        .weight
        .rows()
        .into_iter()
        .map(|row| row.iter().zip(z).map(|(w, v)| w * v).sum::<f64>())
        .collect()
}
