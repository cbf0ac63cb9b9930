use rand::Rng;
use serde::{Deserialize, Serialize};

use super::NnError;
use crate::rng::seeded;

pub const MAX_HIDDEN: usize = 10;

/// Architecture of a one-hidden-layer regression network. The hidden layer
/// is always `tanh` and the output is linear.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct NetworkSpec {
    pub n_inputs: usize,
    pub n_hidden: usize,
    pub seed: u64,
}

impl NetworkSpec {
    pub fn new(n_inputs: usize, n_hidden: usize, seed: u64) -> Result<Self, NnError> {
        if !(1..=MAX_HIDDEN).contains(&n_hidden) {
            return Err(NnError::InvalidHidden(n_hidden));
        }
        if n_inputs == 0 {
            return Err(NnError::Arity { expected: 1, found: 0 });
        }
        Ok(Self {
            n_inputs,
            n_hidden,
            seed,
        })
    }

    pub fn n_params(&self) -> usize {
        self.n_hidden * self.n_inputs + 2 * self.n_hidden + 1
    }
}

/// Network parameters.
///
/// The flat parameter layout used by gradients, Jacobians and trainers is
/// `[input_weights (row-major, hidden × inputs), hidden_bias, output_weights, output_bias]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Network {
    pub n_inputs: usize,
    pub n_hidden: usize,
    pub input_weights: Vec<f64>,
    pub hidden_bias: Vec<f64>,
    pub output_weights: Vec<f64>,
    pub output_bias: f64,
}

/// Input rows paired with targets.
#[derive(Debug, Clone, Copy)]
pub struct Batch<'a> {
    pub inputs: &'a [Vec<f64>],
    pub targets: &'a [f64],
}

impl<'a> Batch<'a> {
    pub fn new(inputs: &'a [Vec<f64>], targets: &'a [f64]) -> Result<Self, NnError> {
        if inputs.len() != targets.len() {
            return Err(NnError::BatchShape {
                inputs: inputs.len(),
                targets: targets.len(),
            });
        }
        if inputs.is_empty() {
            return Err(NnError::EmptyBatch);
        }
        Ok(Self { inputs, targets })
    }

    pub fn len(&self) -> usize {
        self.inputs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.inputs.is_empty()
    }
}

/// Draws every parameter uniformly from `[-0.5, 0.5]`.
pub fn init_network(spec: &NetworkSpec) -> Network {
    let mut rng = seeded(spec.seed);
    let mut draw = |n: usize| -> Vec<f64> { (0..n).map(|_| rng.random_range(-0.5..=0.5)).collect() };
    let input_weights = draw(spec.n_hidden * spec.n_inputs);
    let hidden_bias = draw(spec.n_hidden);
    let output_weights = draw(spec.n_hidden);
    let output_bias = draw(1)[0];
    Network {
        n_inputs: spec.n_inputs,
        n_hidden: spec.n_hidden,
        input_weights,
        hidden_bias,
        output_weights,
        output_bias,
    }
}

impl Network {
    pub fn zeros(n_inputs: usize, n_hidden: usize) -> Self {
        Self {
            n_inputs,
            n_hidden,
            input_weights: vec![0.0; n_hidden * n_inputs],
            hidden_bias: vec![0.0; n_hidden],
            output_weights: vec![0.0; n_hidden],
            output_bias: 0.0,
        }
    }

    pub fn n_params(&self) -> usize {
        self.n_hidden * self.n_inputs + 2 * self.n_hidden + 1
    }

    pub fn params(&self) -> Vec<f64> {
        let mut p = Vec::with_capacity(self.n_params());
        p.extend_from_slice(&self.input_weights);
        p.extend_from_slice(&self.hidden_bias);
        p.extend_from_slice(&self.output_weights);
        p.push(self.output_bias);
        p
    }

    pub fn set_params(&mut self, p: &[f64]) {
        assert_eq!(p.len(), self.n_params(), "parameter vector length");
        let (w, rest) = p.split_at(self.input_weights.len());
        let (b, rest) = rest.split_at(self.n_hidden);
        let (v, c) = rest.split_at(self.n_hidden);
        self.input_weights.copy_from_slice(w);
        self.hidden_bias.copy_from_slice(b);
        self.output_weights.copy_from_slice(v);
        self.output_bias = c[0];
    }

    pub fn is_finite(&self) -> bool {
        self.params().iter().all(|v| v.is_finite())
    }

    fn check_arity(&self, x: &[f64]) -> Result<(), NnError> {
        if x.len() != self.n_inputs {
            return Err(NnError::Arity {
                expected: self.n_inputs,
                found: x.len(),
            });
        }
        Ok(())
    }

    /// Hidden activations `tanh(Wx + b)` written into `hidden`.
    fn hidden_into(&self, x: &[f64], hidden: &mut [f64]) {
        for (h, out) in hidden.iter_mut().enumerate() {
            let row = &self.input_weights[h * self.n_inputs..(h + 1) * self.n_inputs];
            let z: f64 = row.iter().zip(x).map(|(w, xi)| w * xi).sum::<f64>() + self.hidden_bias[h];
            *out = z.tanh();
        }
    }

    fn output_from_hidden(&self, hidden: &[f64]) -> f64 {
        self.output_bias
            + self
                .output_weights
                .iter()
                .zip(hidden)
                .map(|(v, a)| v * a)
                .sum::<f64>()
    }

    /// `c + vᵀ tanh(Wx + b)`.
    pub fn forward(&self, x: &[f64]) -> Result<f64, NnError> {
        self.check_arity(x)?;
        let mut hidden = vec![0.0; self.n_hidden];
        self.hidden_into(x, &mut hidden);
        Ok(self.output_from_hidden(&hidden))
    }

    pub fn residuals(&self, batch: Batch<'_>) -> Result<Vec<f64>, NnError> {
        batch
            .inputs
            .iter()
            .zip(batch.targets)
            .map(|(x, t)| self.forward(x).map(|y| y - t))
            .collect()
    }

    pub fn mse(&self, batch: Batch<'_>) -> Result<f64, NnError> {
        let r = self.residuals(batch)?;
        Ok(r.iter().map(|v| v * v).sum::<f64>() / r.len() as f64)
    }

    /// Writes `∂f(x)/∂θ` into `row` and returns `f(x)`.
    fn output_derivatives(&self, x: &[f64], hidden: &mut [f64], row: &mut [f64]) -> f64 {
        self.hidden_into(x, hidden);
        let n_in = self.n_inputs;
        let nw = self.n_hidden * n_in;
        for h in 0..self.n_hidden {
            let a = hidden[h];
            let delta = self.output_weights[h] * (1.0 - a * a);
            let wrow = &mut row[h * n_in..(h + 1) * n_in];
            for (d, xi) in wrow.iter_mut().zip(x) {
                *d = delta * xi;
            }
            row[nw + h] = delta;
            row[nw + self.n_hidden + h] = a;
        }
        row[nw + 2 * self.n_hidden] = 1.0;
        self.output_from_hidden(hidden)
    }

    /// Backpropagation gradient of `½ Σ (f(xᵢ) − tᵢ)²` in flat parameter order.
    pub fn gradient(&self, batch: Batch<'_>) -> Result<Vec<f64>, NnError> {
        let p = self.n_params();
        let mut grad = vec![0.0; p];
        let mut hidden = vec![0.0; self.n_hidden];
        let n_in = self.n_inputs;
        let nw = self.n_hidden * n_in;
        for (x, &t) in batch.inputs.iter().zip(batch.targets) {
            self.check_arity(x)?;
            self.hidden_into(x, &mut hidden);
            let r = self.output_from_hidden(&hidden) - t;
            for h in 0..self.n_hidden {
                let a = hidden[h];
                let delta = r * self.output_weights[h] * (1.0 - a * a);
                for (g, xi) in grad[h * n_in..(h + 1) * n_in].iter_mut().zip(x) {
                    *g += delta * xi;
                }
                grad[nw + h] += delta;
                grad[nw + self.n_hidden + h] += r * a;
            }
            grad[p - 1] += r;
        }
        Ok(grad)
    }

    /// Jacobian of the residual vector: one row per sample, one column per
    /// parameter (row-major, `len = batch.len() * n_params`).
    pub fn jacobian(&self, batch: Batch<'_>) -> Result<Jacobian, NnError> {
        let p = self.n_params();
        let mut data = vec![0.0; batch.len() * p];
        let mut residuals = Vec::with_capacity(batch.len());
        let mut hidden = vec![0.0; self.n_hidden];
        for (i, (x, &t)) in batch.inputs.iter().zip(batch.targets).enumerate() {
            self.check_arity(x)?;
            let y = self.output_derivatives(x, &mut hidden, &mut data[i * p..(i + 1) * p]);
            residuals.push(y - t);
        }
        Ok(Jacobian {
            rows: batch.len(),
            cols: p,
            data,
            residuals,
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Jacobian {
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<f64>,
    /// Residuals at which the Jacobian was evaluated.
    pub residuals: Vec<f64>,
}

impl Jacobian {
    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    /// `Jᵀ v`.
    pub fn transpose_mul(&self, v: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.cols];
        for (i, &vi) in v.iter().enumerate() {
            for (o, j) in out.iter_mut().zip(self.row(i)) {
                *o += j * vi;
            }
        }
        out
    }
}
