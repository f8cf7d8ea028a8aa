//! Per-frame fully connected mask estimator.
//!
//! Hidden layers use ReLU; the output layer is `c·tanh(·)` so masks stay in
//! `[−c, c]`. Every frame is processed independently.

use ndarray::{Array1, Array2, Axis};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::graph_basis::{Fingerprint, GraphBasis};
use crate::transform::TimeGraphSpectrogram;

use super::Mask;

#[derive(Debug, Clone, PartialEq)]
pub struct Layer {
    /// `out × in`.
    pub weight: Array2<f64>,
    pub bias: Array1<f64>,
}

impl Layer {
    pub fn zeros(inputs: usize, outputs: usize) -> Self {
        Layer {
            weight: Array2::zeros((outputs, inputs)),
            bias: Array1::zeros(outputs),
        }
    }

    pub fn inputs(&self) -> usize {
        self.weight.ncols()
    }

    pub fn outputs(&self) -> usize {
        self.weight.nrows()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MlpParams {
    pub layers: Vec<Layer>,
    /// Output scale `c` of `c·tanh`.
    pub output_scale: f64,
    pub seed: u64,
    /// Basis whose coefficients the estimator consumes.
    pub basis_fingerprint: Fingerprint,
}

impl MlpParams {
    /// Glorot-uniform initialization from `seed`.
    ///
    /// The output layer starts with weights scaled by 0.1 and bias
    /// `atanh(1/c)`, so the initial mask is close to unity and training starts
    /// near the unprocessed mixture.
    pub fn init(
        sizes: &[usize],
        output_scale: f64,
        seed: u64,
        basis_fingerprint: Fingerprint,
    ) -> Result<Self> {
        if sizes.len() < 2 || sizes.contains(&0) {
            return Err(Error::InvalidParameter(format!(
                "layer sizes must list at least two positive sizes, got {sizes:?}"
            )));
        }
        if !(output_scale > 0.0 && output_scale.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "output scale must be positive, got {output_scale}"
            )));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let last = sizes.len() - 2;
        let layers = sizes
            .windows(2)
            .enumerate()
            .map(|(idx, w)| {
                let (inputs, outputs) = (w[0], w[1]);
                let mut limit = (6.0 / (inputs + outputs) as f64).sqrt();
                if idx == last {
                    limit *= 0.1;
                }
                let weight = Array2::from_shape_simple_fn((outputs, inputs), || {
                    rng.random_range(-limit..limit)
                });
                let bias_value = if idx == last && output_scale > 1.0 {
                    (1.0 / output_scale).atanh()
                } else {
                    0.0
                };
                Layer {
                    weight,
                    bias: Array1::from_elem(outputs, bias_value),
                }
            })
            .collect();
        Ok(MlpParams {
            layers,
            output_scale,
            seed,
            basis_fingerprint,
        })
    }

    pub fn sizes(&self) -> Vec<usize> {
        let mut s = vec![self.layers[0].inputs()];
        s.extend(self.layers.iter().map(Layer::outputs));
        s
    }

    pub fn input_size(&self) -> usize {
        self.layers[0].inputs()
    }

    pub fn output_size(&self) -> usize {
        self.layers[self.layers.len() - 1].outputs()
    }

    pub fn num_params(&self) -> usize {
        self.layers
            .iter()
            .map(|l| l.weight.len() + l.bias.len())
            .sum()
    }

    /// Same shapes, all zeros (gradient and moment buffers).
    pub fn zeros_like(&self) -> Vec<Layer> {
        self.layers
            .iter()
            .map(|l| Layer::zeros(l.inputs(), l.outputs()))
            .collect()
    }

    pub fn check_basis(&self, basis: &GraphBasis) -> Result<()> {
        if self.basis_fingerprint != basis.fingerprint() {
            return Err(Error::FingerprintMismatch {
                context: "estimator vs graph basis",
                expected: basis.fingerprint().to_hex(),
                found: self.basis_fingerprint.to_hex(),
            });
        }
        Ok(())
    }

    pub(crate) fn validate(&self) -> Result<()> {
        for pair in self.layers.windows(2) {
            if pair[0].outputs() != pair[1].inputs() {
                return Err(Error::DimensionMismatch(format!(
                    "layer widths do not chain: {} -> {}",
                    pair[0].outputs(),
                    pair[1].inputs()
                )));
            }
        }
        for l in &self.layers {
            if l.bias.len() != l.outputs() {
                return Err(Error::DimensionMismatch("bias length".into()));
            }
            if l.weight.iter().chain(l.bias.iter()).any(|v| !v.is_finite()) {
                return Err(Error::Numerical("non-finite parameter".into()));
            }
        }
        Ok(())
    }
}

/// Graph coefficients divided by the RMS of the noisy waveform.
pub fn normalized_features(noisy: &TimeGraphSpectrogram, waveform: &[f64]) -> Array2<f64> {
    let energy: f64 = waveform.iter().map(|v| v * v).sum();
    let rms = (energy / waveform.len().max(1) as f64).sqrt().max(1e-12);
    noisy.coeffs.mapv(|v| v / rms)
}

/// Activations kept for backpropagation.
pub(crate) struct ForwardCache {
    /// Input to each layer (`inputs[0]` are the features).
    pub inputs: Vec<Array2<f64>>,
    /// `tanh` of the output pre-activation.
    pub tanh_out: Array2<f64>,
}

pub(crate) fn forward_cached(
    params: &MlpParams,
    features: &Array2<f64>,
) -> Result<(Array2<f64>, ForwardCache)> {
    if features.ncols() != params.input_size() {
        return Err(Error::DimensionMismatch(format!(
            "feature width {} does not match estimator input {}",
            features.ncols(),
            params.input_size()
        )));
    }
    let mut inputs = Vec::with_capacity(params.layers.len());
    let mut act = features.clone();
    let last = params.layers.len() - 1;
    for (idx, layer) in params.layers.iter().enumerate() {
        let mut z = act.dot(&layer.weight.t());
        z += &layer.bias.view().insert_axis(Axis(0));
        inputs.push(act);
        if idx == last {
            let t = z.mapv(f64::tanh);
            let out = t.mapv(|v| params.output_scale * v);
            return Ok((
                out,
                ForwardCache {
                    inputs,
                    tanh_out: t,
                },
            ));
        }
        act = z.mapv(|v| v.max(0.0));
    }
    unreachable!("at least one layer")
}

/// Mask for every frame of `features` (`F × input_size`).
pub fn mlp_forward(params: &MlpParams, features: &Array2<f64>) -> Result<Mask> {
    params.validate()?;
    let (out, _) = forward_cached(params, features)?;
    Mask::new(out, Some(params.output_scale))
}

/// Gradients of every layer given `∂L/∂mask`.
pub(crate) fn backward(
    params: &MlpParams,
    cache: &ForwardCache,
    grad_out: &Array2<f64>,
) -> Vec<Layer> {
    let c = params.output_scale;
    let mut delta = grad_out * &cache.tanh_out.mapv(|t| c * (1.0 - t * t));
    let mut grads: Vec<Layer> = Vec::with_capacity(params.layers.len());
    for (idx, layer) in params.layers.iter().enumerate().rev() {
        let input = &cache.inputs[idx];
        grads.push(Layer {
            weight: delta.t().dot(input),
            bias: delta.sum_axis(Axis(0)),
        });
        if idx > 0 {
            let upstream = delta.dot(&layer.weight);
            // input = relu(z): derivative is 1 where the activation is positive.
            delta = upstream * &input.mapv(|a| if a > 0.0 { 1.0 } else { 0.0 });
        }
    }
    grads.reverse();
    grads
}
