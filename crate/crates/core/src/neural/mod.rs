//! Dense feed-forward networks over flat parameter vectors, with manual
//! backpropagation and Adam.
//!
//! Parameters are laid out layer by layer as `[W (out×in, row-major), b (out),
//! slope?]`, where the single PReLU slope is present only for hidden layers
//! when the activation is PReLU. The output layer is always linear.

mod adam;
mod model_file;

pub use adam::{adam_step, clip_grad_norm, AdamState};
pub use model_file::{ModelFile, MODEL_FORMAT_VERSION};

use std::fmt;
use std::ops::{Deref, DerefMut};
use std::str::FromStr;

use rand::Rng;
use thiserror::Error;

use crate::seeding::rng_from_seed;

pub const LEAKY_RELU_SLOPE: f64 = 0.01;
pub const PRELU_INIT_SLOPE: f64 = 0.25;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum NeuralError {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimMismatch { expected: usize, got: usize },
    #[error("invalid network spec: {0}")]
    InvalidSpec(String),
    #[error("model file: {0}")]
    Parse(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Activation {
    Tanh,
    Relu,
    LeakyRelu,
    PRelu,
}

impl Activation {
    pub const ALL: [Activation; 4] = [Activation::Tanh, Activation::Relu, Activation::LeakyRelu, Activation::PRelu];

    /// Apply with the given PReLU slope (ignored for other kinds).
    #[inline]
    pub fn apply(self, z: f64, slope: f64) -> f64 {
        match self {
            Activation::Tanh => z.tanh(),
            Activation::Relu => z.max(0.0),
            Activation::LeakyRelu => {
                if z > 0.0 {
                    z
                } else {
                    LEAKY_RELU_SLOPE * z
                }
            }
            Activation::PRelu => {
                if z > 0.0 {
                    z
                } else {
                    slope * z
                }
            }
        }
    }

    /// Derivative with respect to the pre-activation `z`, given the output `a`.
    #[inline]
    pub fn derivative(self, z: f64, a: f64, slope: f64) -> f64 {
        match self {
            Activation::Tanh => 1.0 - a * a,
            Activation::Relu => {
                if z > 0.0 {
                    1.0
                } else {
                    0.0
                }
            }
            Activation::LeakyRelu => {
                if z > 0.0 {
                    1.0
                } else {
                    LEAKY_RELU_SLOPE
                }
            }
            Activation::PRelu => {
                if z > 0.0 {
                    1.0
                } else {
                    slope
                }
            }
        }
    }

    pub fn has_slope(self) -> bool {
        self == Activation::PRelu
    }
}

impl FromStr for Activation {
    type Err = NeuralError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "tanh" => Ok(Activation::Tanh),
            "relu" => Ok(Activation::Relu),
            "lrelu" | "leakyrelu" | "leaky_relu" => Ok(Activation::LeakyRelu),
            "prelu" => Ok(Activation::PRelu),
            other => Err(NeuralError::InvalidSpec(format!("unknown activation '{other}'"))),
        }
    }
}

impl fmt::Display for Activation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Activation::Tanh => "tanh",
            Activation::Relu => "relu",
            Activation::LeakyRelu => "lrelu",
            Activation::PRelu => "prelu",
        })
    }
}

/// Flat real-valued parameter vector; the unit of NES perturbation.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct ParameterVector(Vec<f64>);

impl ParameterVector {
    pub fn new(values: Vec<f64>) -> Self {
        ParameterVector(values)
    }

    pub fn zeros(len: usize) -> Self {
        ParameterVector(vec![0.0; len])
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }

    /// Elementwise `self + epsilon`.
    pub fn perturb(&self, epsilon: &[f64]) -> Result<ParameterVector, NeuralError> {
        if epsilon.len() != self.len() {
            return Err(NeuralError::DimMismatch { expected: self.len(), got: epsilon.len() });
        }
        Ok(ParameterVector(self.iter().zip(epsilon).map(|(p, e)| p + e).collect()))
    }

    pub fn is_finite(&self) -> bool {
        self.iter().all(|v| v.is_finite())
    }
}

impl Deref for ParameterVector {
    type Target = [f64];
    fn deref(&self) -> &[f64] {
        &self.0
    }
}

impl DerefMut for ParameterVector {
    fn deref_mut(&mut self) -> &mut [f64] {
        &mut self.0
    }
}

impl From<Vec<f64>> for ParameterVector {
    fn from(v: Vec<f64>) -> Self {
        ParameterVector(v)
    }
}

#[derive(Debug, Clone, Copy)]
struct LayerLayout {
    fan_in: usize,
    fan_out: usize,
    weights: usize,
    bias: usize,
    slope: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NetworkSpec {
    pub input_dim: usize,
    pub hidden_sizes: Vec<usize>,
    pub output_dim: usize,
    pub activation: Activation,
}

/// Cached intermediate values of one forward pass.
#[derive(Debug, Clone)]
pub struct Trace {
    /// Input to each layer (the network input, then post-activations).
    inputs: Vec<Vec<f64>>,
    /// Pre-activations of each hidden layer.
    pre: Vec<Vec<f64>>,
    pub output: Vec<f64>,
}

impl NetworkSpec {
    pub fn new(
        input_dim: usize,
        hidden_sizes: Vec<usize>,
        output_dim: usize,
        activation: Activation,
    ) -> Result<Self, NeuralError> {
        let spec = NetworkSpec { input_dim, hidden_sizes, output_dim, activation };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<(), NeuralError> {
        if self.input_dim == 0 || self.output_dim == 0 || self.hidden_sizes.iter().any(|&h| h == 0) {
            return Err(NeuralError::InvalidSpec("all dimensions must be >= 1".into()));
        }
        if !(1..=3).contains(&self.hidden_sizes.len()) {
            return Err(NeuralError::InvalidSpec(format!(
                "hidden layer count must be 1..=3, got {}",
                self.hidden_sizes.len()
            )));
        }
        Ok(())
    }

    fn layout(&self) -> Vec<LayerLayout> {
        let mut dims = Vec::with_capacity(self.hidden_sizes.len() + 2);
        dims.push(self.input_dim);
        dims.extend(&self.hidden_sizes);
        dims.push(self.output_dim);
        let n_layers = dims.len() - 1;
        let mut offset = 0;
        let mut out = Vec::with_capacity(n_layers);
        for l in 0..n_layers {
            let (fan_in, fan_out) = (dims[l], dims[l + 1]);
            let weights = offset;
            let bias = weights + fan_in * fan_out;
            offset = bias + fan_out;
            let slope = if l + 1 < n_layers && self.activation.has_slope() {
                offset += 1;
                Some(offset - 1)
            } else {
                None
            };
            out.push(LayerLayout { fan_in, fan_out, weights, bias, slope });
        }
        out
    }

    pub fn num_params(&self) -> usize {
        self.layout().last().map(|l| l.bias + l.fan_out).unwrap_or(0)
    }

    /// Fan-in scaled uniform weights in `±1/sqrt(fan_in)`, zero biases,
    /// PReLU slopes at 0.25.
    pub fn init_params(&self, seed: u64) -> ParameterVector {
        let mut rng = rng_from_seed(seed);
        let mut params = vec![0.0; self.num_params()];
        for layer in self.layout() {
            let bound = 1.0 / (layer.fan_in as f64).sqrt();
            for w in &mut params[layer.weights..layer.bias] {
                *w = rng.random_range(-bound..=bound);
            }
            if let Some(s) = layer.slope {
                params[s] = PRELU_INIT_SLOPE;
            }
        }
        ParameterVector(params)
    }

    fn check(&self, params: &[f64], input: &[f64]) -> Result<(), NeuralError> {
        let expected = self.num_params();
        if params.len() != expected {
            return Err(NeuralError::DimMismatch { expected, got: params.len() });
        }
        if input.len() != self.input_dim {
            return Err(NeuralError::DimMismatch { expected: self.input_dim, got: input.len() });
        }
        Ok(())
    }

    pub fn forward(&self, params: &[f64], input: &[f64]) -> Result<Vec<f64>, NeuralError> {
        self.check(params, input)?;
        let layout = self.layout();
        let last = layout.len() - 1;
        let mut a = input.to_vec();
        for (l, layer) in layout.iter().enumerate() {
            let mut z = dense(params, layer, &a);
            if l < last {
                let slope = layer.slope.map(|s| params[s]).unwrap_or(0.0);
                for v in &mut z {
                    *v = self.activation.apply(*v, slope);
                }
            }
            a = z;
        }
        Ok(a)
    }

    pub fn forward_trace(&self, params: &[f64], input: &[f64]) -> Result<Trace, NeuralError> {
        self.check(params, input)?;
        let layout = self.layout();
        let last = layout.len() - 1;
        let mut inputs = Vec::with_capacity(layout.len());
        let mut pre = Vec::with_capacity(last);
        let mut a = input.to_vec();
        for (l, layer) in layout.iter().enumerate() {
            let z = dense(params, layer, &a);
            inputs.push(a);
            if l < last {
                let slope = layer.slope.map(|s| params[s]).unwrap_or(0.0);
                a = z.iter().map(|&v| self.activation.apply(v, slope)).collect();
                pre.push(z);
            } else {
                a = z;
            }
        }
        Ok(Trace { inputs, pre, output: a })
    }

    /// Accumulate `dLoss/dParams` into `grad` for the loss whose gradient at
    /// the network output is `upstream`; returns `dLoss/dInput`.
    pub fn backward_into(
        &self,
        params: &[f64],
        trace: &Trace,
        upstream: &[f64],
        grad: &mut [f64],
    ) -> Result<Vec<f64>, NeuralError> {
        if upstream.len() != self.output_dim {
            return Err(NeuralError::DimMismatch { expected: self.output_dim, got: upstream.len() });
        }
        if grad.len() != params.len() {
            return Err(NeuralError::DimMismatch { expected: params.len(), got: grad.len() });
        }
        let layout = self.layout();
        let mut g = upstream.to_vec();
        for l in (0..layout.len()).rev() {
            let layer = &layout[l];
            let a_in = &trace.inputs[l];
            let mut d_in = vec![0.0; layer.fan_in];
            for (o, &go) in g.iter().enumerate() {
                if go == 0.0 {
                    continue;
                }
                let row = layer.weights + o * layer.fan_in;
                let w = &params[row..row + layer.fan_in];
                let dw = &mut grad[row..row + layer.fan_in];
                for i in 0..layer.fan_in {
                    dw[i] += go * a_in[i];
                    d_in[i] += go * w[i];
                }
                grad[layer.bias + o] += go;
            }
            if l == 0 {
                return Ok(d_in);
            }
            // Through the activation of the previous hidden layer.
            let prev = &layout[l - 1];
            let z = &trace.pre[l - 1];
            let slope = prev.slope.map(|s| params[s]).unwrap_or(0.0);
            let mut d_slope = 0.0;
            for i in 0..d_in.len() {
                if prev.slope.is_some() && z[i] <= 0.0 {
                    d_slope += d_in[i] * z[i];
                }
                d_in[i] *= self.activation.derivative(z[i], a_in[i], slope);
            }
            if let Some(s) = prev.slope {
                grad[s] += d_slope;
            }
            g = d_in;
        }
        unreachable!("network has at least one layer")
    }

    /// Parameter gradient for a single input.
    pub fn backward(&self, params: &[f64], input: &[f64], upstream: &[f64]) -> Result<ParameterVector, NeuralError> {
        let trace = self.forward_trace(params, input)?;
        let mut grad = vec![0.0; params.len()];
        self.backward_into(params, &trace, upstream, &mut grad)?;
        Ok(ParameterVector(grad))
    }
}

#[inline]
fn dense(params: &[f64], layer: &LayerLayout, a: &[f64]) -> Vec<f64> {
    let mut z = params[layer.bias..layer.bias + layer.fan_out].to_vec();
    for (o, zo) in z.iter_mut().enumerate() {
        let row = layer.weights + o * layer.fan_in;
        let w = &params[row..row + layer.fan_in];
        let mut acc = 0.0;
        for i in 0..layer.fan_in {
            acc += w[i] * a[i];
        }
        *zo += acc;
    }
    z
}
