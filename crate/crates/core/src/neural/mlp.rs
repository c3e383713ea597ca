//! Dense ReLU networks with a flat parameter vector and exact
//! reverse-mode gradients.
//!
//! Parameters are stored layer by layer: the weight matrix in `in × out`
//! row-major order, then the bias vector. Hidden layers apply ReLU followed
//! by inverted dropout; the single output unit is linear.

use rand::Rng as _;
use serde::{Deserialize, Serialize};

use crate::linalg::Matrix;
use crate::model::ModelError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MlpShape {
    pub input_dim: usize,
    pub hidden: Vec<usize>,
    /// Drop probability after each hidden layer.
    pub dropout: f64,
}

impl MlpShape {
    pub fn new(input_dim: usize, hidden: &[usize], dropout: f64) -> Result<Self, ModelError> {
        if input_dim == 0 || hidden.contains(&0) {
            return Err(ModelError::InvalidSpec(format!("layer widths must be >= 1, got {input_dim} -> {hidden:?}")));
        }
        if !(0.0..1.0).contains(&dropout) {
            return Err(ModelError::InvalidSpec(format!("dropout must be in [0, 1), got {dropout}")));
        }
        Ok(Self { input_dim, hidden: hidden.to_vec(), dropout })
    }

    /// Widths including input and the scalar output.
    pub fn widths(&self) -> Vec<usize> {
        let mut w = Vec::with_capacity(self.hidden.len() + 2);
        w.push(self.input_dim);
        w.extend_from_slice(&self.hidden);
        w.push(1);
        w
    }

    /// `(weight offset, bias offset, fan_in, fan_out)` per layer.
    pub fn layers(&self) -> Vec<(usize, usize, usize, usize)> {
        let w = self.widths();
        let mut off = 0;
        w.windows(2)
            .map(|p| {
                let (i, o) = (p[0], p[1]);
                let l = (off, off + i * o, i, o);
                off += i * o + o;
                l
            })
            .collect()
    }

    pub fn n_params(&self) -> usize {
        self.widths().windows(2).map(|p| p[0] * p[1] + p[1]).sum()
    }

    /// Glorot-uniform weights, zero biases.
    pub fn init_params(&self, rng: &mut crate::rng::Rng) -> Vec<f64> {
        let mut p = vec![0.0; self.n_params()];
        for (w_off, b_off, fan_in, fan_out) in self.layers() {
            let a = (6.0 / (fan_in + fan_out) as f64).sqrt();
            for v in &mut p[w_off..b_off] {
                *v = a * (2.0 * rng.random::<f64>() - 1.0);
            }
        }
        p
    }
}

/// Per-hidden-layer multiplicative masks for a batch, already scaled by
/// `1/(1 − p)`. `masks[l]` is `rows × width_l` row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct DropoutMasks {
    pub masks: Vec<Vec<f64>>,
}

impl DropoutMasks {
    pub fn sample(shape: &MlpShape, rows: usize, rng: &mut crate::rng::Rng) -> Self {
        let keep = 1.0 - shape.dropout;
        let scale = 1.0 / keep;
        let masks = shape
            .hidden
            .iter()
            .map(|&w| (0..rows * w).map(|_| if rng.random::<f64>() < keep { scale } else { 0.0 }).collect())
            .collect();
        Self { masks }
    }
}

/// Four-lane dot product; the independent accumulators let the compiler
/// vectorize.
#[inline]
fn dot4(a: &[f64], b: &[f64]) -> f64 {
    let mut acc = [0.0; 4];
    let (ca, cb) = (a.chunks_exact(4), b.chunks_exact(4));
    let (ra, rb) = (ca.remainder(), cb.remainder());
    for (x, y) in ca.zip(cb) {
        for k in 0..4 {
            acc[k] += x[k] * y[k];
        }
    }
    let mut s = (acc[0] + acc[1]) + (acc[2] + acc[3]);
    for (x, y) in ra.iter().zip(rb) {
        s += x * y;
    }
    s
}

#[inline]
fn axpy(alpha: f64, x: &[f64], y: &mut [f64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += alpha * xi;
    }
}

/// Activations of every layer for a batch; `acts[0]` is the input and the
/// last entry the outputs. Hidden entries are post-ReLU, post-mask.
pub struct ForwardCache {
    acts: Vec<Vec<f64>>,
}

impl ForwardCache {
    pub fn outputs(&self) -> &[f64] {
        self.acts.last().expect("at least one layer")
    }
}

pub fn forward_batch(shape: &MlpShape, params: &[f64], x: &Matrix, masks: Option<&DropoutMasks>) -> ForwardCache {
    let rows = x.rows();
    let layers = shape.layers();
    let mut acts = Vec::with_capacity(layers.len() + 1);
    acts.push(x.data().to_vec());
    for (l, &(w_off, b_off, fan_in, fan_out)) in layers.iter().enumerate() {
        let w = &params[w_off..b_off];
        let b = &params[b_off..b_off + fan_out];
        let input = &acts[l];
        let mut out = vec![0.0; rows * fan_out];
        for r in 0..rows {
            let o = &mut out[r * fan_out..(r + 1) * fan_out];
            o.copy_from_slice(b);
            for (i, &a) in input[r * fan_in..(r + 1) * fan_in].iter().enumerate() {
                if a != 0.0 {
                    axpy(a, &w[i * fan_out..(i + 1) * fan_out], o);
                }
            }
        }
        if l + 1 < layers.len() {
            for v in &mut out {
                *v = v.max(0.0);
            }
            if let Some(m) = masks {
                for (v, k) in out.iter_mut().zip(&m.masks[l]) {
                    *v *= k;
                }
            }
        }
        acts.push(out);
    }
    ForwardCache { acts }
}

/// Gradient of a loss with respect to all parameters, given the loss
/// gradient `d_out` with respect to each output.
pub fn backward(
    shape: &MlpShape,
    params: &[f64],
    cache: &ForwardCache,
    d_out: &[f64],
    masks: Option<&DropoutMasks>,
) -> Vec<f64> {
    let layers = shape.layers();
    let rows = d_out.len();
    let mut grad = vec![0.0; params.len()];
    let mut delta = d_out.to_vec();
    for l in (0..layers.len()).rev() {
        let (w_off, b_off, fan_in, fan_out) = layers[l];
        let input = &cache.acts[l];
        {
            let (gw, gb) = grad[w_off..b_off + fan_out].split_at_mut(b_off - w_off);
            for r in 0..rows {
                let d = &delta[r * fan_out..(r + 1) * fan_out];
                axpy(1.0, d, gb);
                for (i, &a) in input[r * fan_in..(r + 1) * fan_in].iter().enumerate() {
                    if a != 0.0 {
                        axpy(a, d, &mut gw[i * fan_out..(i + 1) * fan_out]);
                    }
                }
            }
        }
        if l == 0 {
            break;
        }
        // Back through the mask and ReLU of hidden layer l − 1, whose
        // post-activation output is `input`.
        let w = &params[w_off..b_off];
        let mut prev = vec![0.0; rows * fan_in];
        for r in 0..rows {
            let d = &delta[r * fan_out..(r + 1) * fan_out];
            for i in 0..fan_in {
                let a = input[r * fan_in + i];
                if a > 0.0 {
                    let mut g = dot4(&w[i * fan_out..(i + 1) * fan_out], d);
                    if let Some(m) = masks {
                        g *= m.masks[l - 1][r * fan_in + i];
                    }
                    prev[r * fan_in + i] = g;
                }
            }
        }
        delta = prev;
    }
    grad
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Mlp {
    pub shape: MlpShape,
    pub params: Vec<f64>,
}

impl Mlp {
    pub fn new(shape: MlpShape, params: Vec<f64>) -> Self {
        assert_eq!(params.len(), shape.n_params(), "parameter vector length");
        Self { shape, params }
    }

    pub fn init(shape: MlpShape, rng: &mut crate::rng::Rng) -> Self {
        let params = shape.init_params(rng);
        Self { shape, params }
    }

    /// Eval-mode predictions (dropout off).
    pub fn predict(&self, x: &Matrix) -> Vec<f64> {
        forward_batch(&self.shape, &self.params, x, None).outputs().to_vec()
    }

    /// Predictions with the given dropout masks applied.
    pub fn predict_masked(&self, x: &Matrix, masks: &DropoutMasks) -> Vec<f64> {
        forward_batch(&self.shape, &self.params, x, Some(masks)).outputs().to_vec()
    }

    pub fn predict_row(&self, row: &[f64]) -> Result<f64, ModelError> {
        if row.len() != self.shape.input_dim {
            return Err(ModelError::DimensionMismatch { expected: self.shape.input_dim, found: row.len() });
        }
        Ok(self.predict(&Matrix::from_vec(1, row.len(), row.to_vec()))[0])
    }
}
