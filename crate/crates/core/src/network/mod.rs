//! ReLU feed-forward networks: representation, realization and measurement.
//!
//! A network is a sequence of `H + 1 >= 2` affine layers `(W_n, B_n)`. Its
//! realization applies the componentwise ReLU after every layer except the
//! last. The dimension vector `(k_0, ..., k_{H+1})` and the parameter count
//! `sum_n k_n (k_{n-1} + 1)` are properties of the shapes alone.

mod sparse;
mod text;

pub use sparse::CsrMatrix;

use crate::{Error, Result};

/// Componentwise `max(x_i, 0)`.
pub fn relu(x: &[f64]) -> Vec<f64> {
    x.iter().map(|&v| v.max(0.0)).collect()
}

fn relu_in_place(x: &mut [f64]) {
    for v in x {
        if *v < 0.0 {
            *v = 0.0;
        }
    }
}

/// Layer widths `(k_0, k_1, ..., k_{H+1})`: at least three entries, all
/// positive.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct DimVector(Vec<usize>);

impl DimVector {
    pub fn new(widths: Vec<usize>) -> Result<Self> {
        if widths.len() < 3 {
            return Err(Error::InvalidArgument(format!(
                "dimension vector needs at least 3 entries, got {}",
                widths.len()
            )));
        }
        if widths.contains(&0) {
            return Err(Error::InvalidArgument("dimension vector entries must be >= 1".into()));
        }
        Ok(Self(widths))
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.0
    }

    pub fn into_vec(self) -> Vec<usize> {
        self.0
    }

    /// Number of entries, i.e. the depth in the sense of `dim(D(Φ))`.
    #[allow(clippy::len_without_is_empty)]
    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn input(&self) -> usize {
        self.0[0]
    }

    pub fn output(&self) -> usize {
        *self.0.last().unwrap()
    }

    /// Largest entry.
    pub fn supnorm(&self) -> usize {
        self.0.iter().copied().max().unwrap()
    }

    /// Parameter count of any network with these dimensions.
    pub fn param_count(&self) -> u64 {
        self.0.windows(2).map(|w| w[1] as u64 * (w[0] as u64 + 1)).sum()
    }
}

impl std::fmt::Display for DimVector {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let parts: Vec<String> = self.0.iter().map(|k| k.to_string()).collect();
        write!(f, "({})", parts.join(","))
    }
}

/// Free-function form of [`DimVector::supnorm`].
pub fn dim_supnorm(v: &DimVector) -> usize {
    v.supnorm()
}

/// One affine layer: `x -> W x + B`.
#[derive(Debug, Clone, PartialEq)]
pub struct Layer {
    pub weights: CsrMatrix,
    pub bias: Vec<f64>,
}

impl Layer {
    pub fn new(weights: CsrMatrix, bias: Vec<f64>) -> Result<Self> {
        if bias.len() != weights.rows() {
            return Err(Error::InvalidNetwork(format!(
                "bias length {} does not match weight rows {}",
                bias.len(),
                weights.rows()
            )));
        }
        Ok(Self { weights, bias })
    }

    pub fn from_dense(weights: Vec<Vec<f64>>, cols: usize, bias: Vec<f64>) -> Result<Self> {
        if weights.iter().any(|r| r.len() != cols) {
            return Err(Error::InvalidNetwork("ragged weight matrix".into()));
        }
        Self::new(CsrMatrix::from_dense(&weights, cols), bias)
    }

    pub fn in_dim(&self) -> usize {
        self.weights.cols()
    }

    pub fn out_dim(&self) -> usize {
        self.weights.rows()
    }

    fn apply_into(&self, x: &[f64], out: &mut Vec<f64>) {
        out.resize(self.out_dim(), 0.0);
        self.weights.mul_vec_into(x, out);
        for (o, b) in out.iter_mut().zip(&self.bias) {
            *o += b;
        }
    }
}

/// An immutable ReLU network `((W_1, B_1), ..., (W_{H+1}, B_{H+1}))`, `H >= 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct NeuralNetwork {
    layers: Vec<Layer>,
}

impl NeuralNetwork {
    pub fn new(layers: Vec<Layer>) -> Result<Self> {
        if layers.len() < 2 {
            return Err(Error::InvalidNetwork(format!("a network needs at least 2 layers, got {}", layers.len())));
        }
        for (i, pair) in layers.windows(2).enumerate() {
            if pair[1].in_dim() != pair[0].out_dim() {
                return Err(Error::InvalidNetwork(format!(
                    "layer {} has {} columns but layer {} has {} rows",
                    i + 2,
                    pair[1].in_dim(),
                    i + 1,
                    pair[0].out_dim()
                )));
            }
        }
        if layers.iter().any(|l| l.in_dim() == 0 || l.out_dim() == 0) {
            return Err(Error::InvalidNetwork("zero-width layer".into()));
        }
        Ok(Self { layers })
    }

    /// Convenience constructor from dense `(W, B)` pairs.
    pub fn from_dense(layers: Vec<(Vec<Vec<f64>>, Vec<f64>)>) -> Result<Self> {
        let mut out = Vec::with_capacity(layers.len());
        for (w, b) in layers {
            let cols = w.first().map_or(0, |r| r.len());
            out.push(Layer::from_dense(w, cols, b)?);
        }
        Self::new(out)
    }

    /// Dense network with i.i.d. `U(-1, 1)` weights and biases and the given
    /// widths. Used by tests and benchmarks.
    pub fn random<R: rand::Rng + ?Sized>(rng: &mut R, dims: &[usize]) -> Result<Self> {
        DimVector::new(dims.to_vec())?;
        let mut layers = Vec::with_capacity(dims.len() - 1);
        for w in dims.windows(2) {
            let rows: Vec<Vec<f64>> =
                (0..w[1]).map(|_| (0..w[0]).map(|_| rng.random_range(-1.0..1.0)).collect()).collect();
            let bias = (0..w[1]).map(|_| rng.random_range(-1.0..1.0)).collect();
            layers.push(Layer::new(CsrMatrix::from_dense(&rows, w[0]), bias)?);
        }
        Self::new(layers)
    }

    pub fn layers(&self) -> &[Layer] {
        &self.layers
    }

    pub fn into_layers(self) -> Vec<Layer> {
        self.layers
    }

    pub fn input_dim(&self) -> usize {
        self.layers[0].in_dim()
    }

    pub fn output_dim(&self) -> usize {
        self.layers.last().unwrap().out_dim()
    }

    /// `dim(D(Φ))`, the number of entries of the dimension vector.
    pub fn depth(&self) -> usize {
        self.layers.len() + 1
    }

    pub fn dims(&self) -> DimVector {
        let mut v = Vec::with_capacity(self.layers.len() + 1);
        v.push(self.input_dim());
        v.extend(self.layers.iter().map(Layer::out_dim));
        DimVector(v)
    }

    pub fn param_count(&self) -> u64 {
        self.dims().param_count()
    }

    /// Stored nonzero weights plus biases; a memory measure, not `P(Φ)`.
    pub fn nnz(&self) -> usize {
        self.layers.iter().map(|l| l.weights.nnz() + l.bias.len()).sum()
    }

    pub fn realize(&self, x: &[f64]) -> Result<Vec<f64>> {
        let mut scratch = Scratch::default();
        let mut out = Vec::new();
        self.realize_with(x, &mut scratch, &mut out)?;
        Ok(out)
    }

    /// Forward pass reusing caller-owned buffers.
    pub fn realize_with(&self, x: &[f64], scratch: &mut Scratch, out: &mut Vec<f64>) -> Result<()> {
        if x.len() != self.input_dim() {
            return Err(Error::DimensionMismatch { expected: self.input_dim(), got: x.len() });
        }
        let (last, hidden) = self.layers.split_last().unwrap();
        let Scratch { a, b } = scratch;
        a.clear();
        a.extend_from_slice(x);
        for layer in hidden {
            layer.apply_into(a, b);
            relu_in_place(b);
            std::mem::swap(a, b);
        }
        last.apply_into(a, out);
        Ok(())
    }

    /// Realizes a batch of inputs stored back to back in `inputs`; outputs are
    /// written back to back into `out`.
    pub fn realize_flat(&self, inputs: &[f64], scratch: &mut Scratch, out: &mut Vec<f64>) -> Result<()> {
        let k0 = self.input_dim();
        if !inputs.len().is_multiple_of(k0) {
            return Err(Error::DimensionMismatch { expected: k0, got: inputs.len() % k0 });
        }
        let q = self.output_dim();
        out.clear();
        out.reserve(inputs.len() / k0 * q);
        let mut one = Vec::with_capacity(q);
        for x in inputs.chunks_exact(k0) {
            self.realize_with(x, scratch, &mut one)?;
            out.extend_from_slice(&one);
        }
        Ok(())
    }
}

/// Reusable activation buffers for [`NeuralNetwork::realize_with`].
#[derive(Debug, Default, Clone)]
pub struct Scratch {
    a: Vec<f64>,
    b: Vec<f64>,
}
