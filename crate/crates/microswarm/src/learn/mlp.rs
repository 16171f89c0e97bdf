//! Dense multilayer perceptron with explicit reverse-mode gradients.
//!
//! The networks here are small (hidden widths around 12), so the layers are
//! written directly against ndarray: forward passes cache activations, and
//! `backward` propagates an output gradient into exact parameter gradients.
//! Keeping the chain rule in plain sight is what lets the test suite verify
//! every loss against central finite differences.

use ndarray::{Array1, Array2, Axis};

use crate::rng::RngStream;

use super::LearnError;

/// One dense layer, weights stored (out, in).
#[derive(Debug, Clone, PartialEq)]
pub struct Dense {
    pub w: Array2<f64>,
    pub b: Array1<f64>,
}

impl Dense {
    /// Fan-in-scaled uniform initialization: U(-1/sqrt(in), 1/sqrt(in)).
    pub fn init(in_dim: usize, out_dim: usize, rng: &mut RngStream) -> Self {
        let bound = 1.0 / (in_dim as f64).sqrt();
        let w = Array2::from_shape_fn((out_dim, in_dim), |_| {
            (2.0 * rng.next_uniform() - 1.0) * bound
        });
        let b = Array1::from_shape_fn(out_dim, |_| (2.0 * rng.next_uniform() - 1.0) * bound);
        Self { w, b }
    }

    pub fn zeros(in_dim: usize, out_dim: usize) -> Self {
        Self {
            w: Array2::zeros((out_dim, in_dim)),
            b: Array1::zeros(out_dim),
        }
    }

    pub fn in_dim(&self) -> usize {
        self.w.ncols()
    }

    pub fn out_dim(&self) -> usize {
        self.w.nrows()
    }

    /// x: (batch, in) -> (batch, out)
    fn affine(&self, x: &Array2<f64>) -> Array2<f64> {
        x.dot(&self.w.t()) + &self.b
    }
}

/// Feed-forward net: affine layers with rectifier activations on every
/// hidden layer; `output_relu` additionally rectifies the last layer (used
/// for trunks whose output feeds further heads).
#[derive(Debug, Clone, PartialEq)]
pub struct Mlp {
    pub layers: Vec<Dense>,
    pub output_relu: bool,
}

/// Activations recorded during a forward pass, consumed by `backward`.
pub struct MlpCache {
    /// Input to each layer (the previous layer's activation).
    inputs: Vec<Array2<f64>>,
    /// Pre-activation output of each layer.
    preacts: Vec<Array2<f64>>,
}

/// Per-layer parameter gradients, same shapes as the layers.
#[derive(Debug, Clone)]
pub struct MlpGrads {
    pub layers: Vec<Dense>,
}

impl Mlp {
    pub fn init(shape: &[usize], output_relu: bool, rng: &mut RngStream) -> Self {
        assert!(shape.len() >= 2, "an MLP needs at least input and output");
        let layers = shape
            .windows(2)
            .map(|pair| Dense::init(pair[0], pair[1], rng))
            .collect();
        Self {
            layers,
            output_relu,
        }
    }

    pub fn zeros(shape: &[usize], output_relu: bool) -> Self {
        let layers = shape
            .windows(2)
            .map(|pair| Dense::zeros(pair[0], pair[1]))
            .collect();
        Self {
            layers,
            output_relu,
        }
    }

    pub fn input_dim(&self) -> usize {
        self.layers[0].in_dim()
    }

    pub fn output_dim(&self) -> usize {
        self.layers.last().unwrap().out_dim()
    }

    pub fn shape(&self) -> Vec<usize> {
        let mut s = vec![self.input_dim()];
        s.extend(self.layers.iter().map(Dense::out_dim));
        s
    }

    fn activate_layer(&self, index: usize) -> bool {
        index + 1 < self.layers.len() || self.output_relu
    }

    pub fn forward(&self, x: &Array2<f64>) -> Result<Array2<f64>, LearnError> {
        Ok(self.forward_cached(x)?.0)
    }

    pub fn forward_cached(&self, x: &Array2<f64>) -> Result<(Array2<f64>, MlpCache), LearnError> {
        if x.ncols() != self.input_dim() {
            return Err(LearnError::WidthMismatch {
                expected: self.input_dim(),
                got: x.ncols(),
            });
        }
        let mut inputs = Vec::with_capacity(self.layers.len());
        let mut preacts = Vec::with_capacity(self.layers.len());
        let mut current = x.clone();
        for (i, layer) in self.layers.iter().enumerate() {
            let z = layer.affine(&current);
            inputs.push(current);
            let a = if self.activate_layer(i) {
                z.mapv(|v| v.max(0.0))
            } else {
                z.clone()
            };
            preacts.push(z);
            current = a;
        }
        Ok((current, MlpCache { inputs, preacts }))
    }

    /// Backpropagates d(loss)/d(output) through the cached pass, returning
    /// parameter gradients and d(loss)/d(input).
    pub fn backward(&self, cache: &MlpCache, grad_output: &Array2<f64>) -> (MlpGrads, Array2<f64>) {
        let mut grads: Vec<Dense> = self
            .layers
            .iter()
            .map(|l| Dense::zeros(l.in_dim(), l.out_dim()))
            .collect();
        let mut upstream = grad_output.clone();
        for i in (0..self.layers.len()).rev() {
            let dz = if self.activate_layer(i) {
                // relu gate: pass gradient where the preactivation was positive
                let mut dz = upstream;
                dz.zip_mut_with(&cache.preacts[i], |g, &z| {
                    if z <= 0.0 {
                        *g = 0.0;
                    }
                });
                dz
            } else {
                upstream
            };
            grads[i].w = dz.t().dot(&cache.inputs[i]);
            grads[i].b = dz.sum_axis(Axis(0));
            upstream = dz.dot(&self.layers[i].w);
        }
        (MlpGrads { layers: grads }, upstream)
    }

    pub fn param_count(&self) -> usize {
        self.layers.iter().map(|l| l.w.len() + l.b.len()).sum()
    }

    pub fn write_params(&self, out: &mut Vec<f64>) {
        for layer in &self.layers {
            out.extend(layer.w.iter());
            out.extend(layer.b.iter());
        }
    }

    pub fn read_params<I: Iterator<Item = f64>>(&mut self, data: &mut I) -> Result<(), LearnError> {
        for layer in &mut self.layers {
            for v in layer.w.iter_mut().chain(layer.b.iter_mut()) {
                *v = data.next().ok_or(LearnError::ParamCountMismatch)?;
            }
        }
        Ok(())
    }
}

impl MlpGrads {
    pub fn write_flat(&self, out: &mut Vec<f64>) {
        for layer in &self.layers {
            out.extend(layer.w.iter());
            out.extend(layer.b.iter());
        }
    }
}
