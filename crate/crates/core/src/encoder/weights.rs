use ndarray::{Array1, Array2};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{EncoderConfig, EncoderError};

pub const TENSOR_NAMES: [&str; 6] = ["w1", "b1", "w2", "b2", "w3", "b3"];

/// Encoder parameters. The same shape doubles as the gradient container.
#[derive(Debug, Clone, PartialEq)]
pub struct EncoderWeights {
    pub w1: Array2<f64>,
    pub b1: Array1<f64>,
    pub w2: Array2<f64>,
    pub b2: Array1<f64>,
    pub w3: Array2<f64>,
    pub b3: Array1<f64>,
}

fn glorot(rng: &mut ChaCha8Rng, fan_in: usize, fan_out: usize) -> Array2<f64> {
    let limit = (6.0 / (fan_in + fan_out) as f64).sqrt();
    Array2::from_shape_simple_fn((fan_in, fan_out), || rng.random_range(-limit..=limit))
}

/// Glorot-uniform matrices drawn in order W1, W2, W3 from one seeded stream;
/// zero biases.
pub fn init_weights(config: &EncoderConfig) -> Result<EncoderWeights, EncoderError> {
    config.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let (i, h, o) = (config.in_dim, config.hidden_dim, config.out_dim);
    Ok(EncoderWeights {
        w1: glorot(&mut rng, i, h),
        b1: Array1::zeros(h),
        w2: glorot(&mut rng, h, h),
        b2: Array1::zeros(h),
        w3: glorot(&mut rng, h, o),
        b3: Array1::zeros(o),
    })
}

impl EncoderWeights {
    pub fn zeros(config: &EncoderConfig) -> Self {
        let (i, h, o) = (config.in_dim, config.hidden_dim, config.out_dim);
        EncoderWeights {
            w1: Array2::zeros((i, h)),
            b1: Array1::zeros(h),
            w2: Array2::zeros((h, h)),
            b2: Array1::zeros(h),
            w3: Array2::zeros((h, o)),
            b3: Array1::zeros(o),
        }
    }

    pub fn zeros_like(&self) -> Self {
        EncoderWeights {
            w1: Array2::zeros(self.w1.dim()),
            b1: Array1::zeros(self.b1.len()),
            w2: Array2::zeros(self.w2.dim()),
            b2: Array1::zeros(self.b2.len()),
            w3: Array2::zeros(self.w3.dim()),
            b3: Array1::zeros(self.b3.len()),
        }
    }

    /// `(in_dim, hidden_dim, out_dim)`
    pub fn dims(&self) -> (usize, usize, usize) {
        (self.w1.nrows(), self.w1.ncols(), self.w3.ncols())
    }

    /// Row-major views of all six tensors, in [`TENSOR_NAMES`] order.
    pub fn tensors(&self) -> [&[f64]; 6] {
        [
            self.w1.as_slice().expect("standard layout"),
            self.b1.as_slice().expect("standard layout"),
            self.w2.as_slice().expect("standard layout"),
            self.b2.as_slice().expect("standard layout"),
            self.w3.as_slice().expect("standard layout"),
            self.b3.as_slice().expect("standard layout"),
        ]
    }

    pub fn tensors_mut(&mut self) -> [&mut [f64]; 6] {
        [
            self.w1.as_slice_mut().expect("standard layout"),
            self.b1.as_slice_mut().expect("standard layout"),
            self.w2.as_slice_mut().expect("standard layout"),
            self.b2.as_slice_mut().expect("standard layout"),
            self.w3.as_slice_mut().expect("standard layout"),
            self.b3.as_slice_mut().expect("standard layout"),
        ]
    }

    /// Elementwise `self += other`.
    pub fn add_assign(&mut self, other: &EncoderWeights) {
        for (a, b) in self.tensors_mut().into_iter().zip(other.tensors()) {
            for (x, y) in a.iter_mut().zip(b) {
                *x += y;
            }
        }
    }

    pub fn is_finite(&self) -> bool {
        self.tensors().iter().all(|t| t.iter().all(|x| x.is_finite()))
    }

    pub fn to_records(&self) -> Vec<TensorRecord> {
        let shapes = self.shapes();
        TENSOR_NAMES
            .iter()
            .zip(self.tensors())
            .zip(shapes)
            .map(|((name, data), shape)| TensorRecord {
                name: name.to_string(),
                shape,
                data: data.to_vec(),
            })
            .collect()
    }

    pub fn from_records(records: &[TensorRecord]) -> Result<Self, EncoderError> {
        let find = |name: &str| {
            records
                .iter()
                .find(|r| r.name == name)
                .ok_or_else(|| EncoderError::Config(format!("missing tensor {name}")))
        };
        let matrix = |name: &str| -> Result<Array2<f64>, EncoderError> {
            let r = find(name)?;
            if r.shape.len() != 2 {
                return Err(EncoderError::Config(format!("tensor {name} must be 2-D")));
            }
            Array2::from_shape_vec((r.shape[0], r.shape[1]), r.data.clone())
                .map_err(|e| EncoderError::Config(format!("tensor {name}: {e}")))
        };
        let vector = |name: &str| -> Result<Array1<f64>, EncoderError> {
            let r = find(name)?;
            if r.shape != [r.data.len()] {
                return Err(EncoderError::Config(format!("tensor {name} must be 1-D")));
            }
            Ok(Array1::from(r.data.clone()))
        };
        let w = EncoderWeights {
            w1: matrix("w1")?,
            b1: vector("b1")?,
            w2: matrix("w2")?,
            b2: vector("b2")?,
            w3: matrix("w3")?,
            b3: vector("b3")?,
        };
        let (i, h, o) = w.dims();
        let consistent = w.b1.len() == h
            && w.w2.dim() == (h, h)
            && w.b2.len() == h
            && w.w3.nrows() == h
            && w.b3.len() == o
            && i > 0;
        if !consistent {
            return Err(EncoderError::Config("tensor shapes are inconsistent".into()));
        }
        if !w.is_finite() {
            return Err(EncoderError::Config("tensor contains a non-finite value".into()));
        }
        Ok(w)
    }

    fn shapes(&self) -> [Vec<usize>; 6] {
        [
            self.w1.shape().to_vec(),
            self.b1.shape().to_vec(),
            self.w2.shape().to_vec(),
            self.b2.shape().to_vec(),
            self.w3.shape().to_vec(),
            self.b3.shape().to_vec(),
        ]
    }
}

/// Serialized tensor: row-major 64-bit floats.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TensorRecord {
    pub name: String,
    pub shape: Vec<usize>,
    pub data: Vec<f64>,
}

impl Serialize for EncoderWeights {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        self.to_records().serialize(s)
    }
}

impl<'de> Deserialize<'de> for EncoderWeights {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let records = Vec::<TensorRecord>::deserialize(d)?;
        EncoderWeights::from_records(&records).map_err(serde::de::Error::custom)
    }
}
