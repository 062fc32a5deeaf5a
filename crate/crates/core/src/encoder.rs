//! Feed-forward encoder: affine layers with ReLU between them and an identity
//! output layer, plus analytic backpropagation.

use ndarray::{Array1, Array2, ArrayView2, Axis, Zip};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{LscError, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct Layer {
    /// `out x in`.
    pub weight: Array2<f64>,
    pub bias: Array1<f64>,
}

impl Layer {
    pub fn zeros(fan_in: usize, fan_out: usize) -> Self {
        Self {
            weight: Array2::zeros((fan_out, fan_in)),
            bias: Array1::zeros(fan_out),
        }
    }
}

/// Encoder weights. The same type holds gradients and optimizer moments.
#[derive(Debug, Clone, PartialEq)]
pub struct EncoderParams {
    layer_dims: Vec<usize>,
    layers: Vec<Layer>,
}

fn check_dims(layer_dims: &[usize]) -> Result<()> {
    if layer_dims.len() < 2 {
        return Err(LscError::InvalidArchitecture(format!(
            "need at least an input and an output dimension, got {layer_dims:?}"
        )));
    }
    if layer_dims.contains(&0) {
        return Err(LscError::InvalidArchitecture(format!("layer dimensions must be positive: {layer_dims:?}")));
    }
    Ok(())
}

/// Seeded init: weights uniform in `[-1/sqrt(fan_in), 1/sqrt(fan_in))`, biases zero.
pub fn init_encoder(layer_dims: &[usize], seed: u64) -> Result<EncoderParams> {
    check_dims(layer_dims)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let layers = layer_dims
        .windows(2)
        .map(|w| {
            let (fan_in, fan_out) = (w[0], w[1]);
            let bound = 1.0 / (fan_in as f64).sqrt();
            Layer {
                weight: Array2::from_shape_simple_fn((fan_out, fan_in), || rng.random_range(-bound..bound)),
                bias: Array1::zeros(fan_out),
            }
        })
        .collect();
    Ok(EncoderParams {
        layer_dims: layer_dims.to_vec(),
        layers,
    })
}

/// Activations kept from a forward pass for backpropagation.
#[derive(Debug, Clone)]
pub struct ForwardCache {
    /// Input to each layer; `inputs[0]` is the batch itself.
    inputs: Vec<Array2<f64>>,
    output: Array2<f64>,
}

impl ForwardCache {
    pub fn output(&self) -> &Array2<f64> {
        &self.output
    }

    pub fn into_output(self) -> Array2<f64> {
        self.output
    }
}

impl EncoderParams {
    /// Builds an encoder from explicit layers.
    pub fn from_layers(layers: Vec<Layer>) -> Result<Self> {
        let first = layers
            .first()
            .ok_or_else(|| LscError::InvalidArchitecture("encoder needs at least one layer".into()))?;
        let mut layer_dims = vec![first.weight.ncols()];
        for (k, l) in layers.iter().enumerate() {
            if l.weight.ncols() != *layer_dims.last().unwrap() || l.bias.len() != l.weight.nrows() {
                return Err(LscError::InvalidArchitecture(format!("layer {k} shapes do not chain")));
            }
            layer_dims.push(l.weight.nrows());
        }
        check_dims(&layer_dims)?;
        let params = Self { layer_dims, layers };
        if !params.is_finite() {
            return Err(LscError::InvalidInput("encoder parameters must be finite".into()));
        }
        Ok(params)
    }

    /// All-zero parameters with the given architecture.
    pub fn zeros_like(&self) -> Self {
        Self {
            layer_dims: self.layer_dims.clone(),
            layers: self.layer_dims.windows(2).map(|w| Layer::zeros(w[0], w[1])).collect(),
        }
    }

    pub fn layer_dims(&self) -> &[usize] {
        &self.layer_dims
    }

    pub fn layers(&self) -> &[Layer] {
        &self.layers
    }

    pub fn layers_mut(&mut self) -> &mut [Layer] {
        &mut self.layers
    }

    pub fn input_dim(&self) -> usize {
        self.layer_dims[0]
    }

    pub fn output_dim(&self) -> usize {
        *self.layer_dims.last().unwrap()
    }

    /// Number of trainable scalars; depends on the layer sizes only.
    pub fn param_count(&self) -> usize {
        param_count(&self.layer_dims)
    }

    pub fn is_finite(&self) -> bool {
        self.layers
            .iter()
            .all(|l| l.weight.iter().chain(l.bias.iter()).all(|v| v.is_finite()))
    }

    /// Every scalar in a fixed order: per layer, weights row-major then biases.
    pub fn flat(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.param_count());
        for l in &self.layers {
            out.extend(l.weight.iter());
            out.extend(l.bias.iter());
        }
        out
    }

    /// Inverse of [`Self::flat`].
    pub fn set_flat(&mut self, values: &[f64]) -> Result<()> {
        if values.len() != self.param_count() {
            return Err(LscError::Shape(format!(
                "{} values for {} parameters",
                values.len(),
                self.param_count()
            )));
        }
        let mut it = values.iter();
        for l in &mut self.layers {
            l.weight.iter_mut().chain(l.bias.iter_mut()).for_each(|v| *v = *it.next().unwrap());
        }
        Ok(())
    }

    fn check_input(&self, x: ArrayView2<'_, f64>) -> Result<()> {
        if x.ncols() != self.input_dim() {
            return Err(LscError::Shape(format!(
                "features have {} columns, encoder expects {}",
                x.ncols(),
                self.input_dim()
            )));
        }
        Ok(())
    }

    pub fn forward(&self, x: ArrayView2<'_, f64>) -> Result<Array2<f64>> {
        self.forward_cached(x).map(ForwardCache::into_output)
    }

    pub fn forward_cached(&self, x: ArrayView2<'_, f64>) -> Result<ForwardCache> {
        self.check_input(x)?;
        let last = self.layers.len() - 1;
        let mut inputs = Vec::with_capacity(self.layers.len());
        let mut h = x.to_owned();
        for (k, l) in self.layers.iter().enumerate() {
            let mut out = h.dot(&l.weight.t());
            out += &l.bias;
            if k < last {
                out.mapv_inplace(|v| v.max(0.0));
            }
            inputs.push(h);
            h = out;
        }
        Ok(ForwardCache { inputs, output: h })
    }

    /// Parameter gradient given `dL/dz` for the cached batch.
    pub fn backward(&self, cache: &ForwardCache, grad_output: ArrayView2<'_, f64>) -> Result<EncoderParams> {
        if grad_output.dim() != cache.output.dim() {
            return Err(LscError::Shape(format!(
                "output gradient {:?} does not match embeddings {:?}",
                grad_output.dim(),
                cache.output.dim()
            )));
        }
        let mut grads = self.zeros_like();
        let mut delta = grad_output.to_owned();
        for k in (0..self.layers.len()).rev() {
            let input = &cache.inputs[k];
            grads.layers[k].weight = delta.t().dot(input);
            grads.layers[k].bias = delta.sum_axis(Axis(0));
            if k > 0 {
                let mut back = delta.dot(&self.layers[k].weight);
                // input of layer k is relu(pre-activation of layer k-1)
                Zip::from(&mut back).and(input).for_each(|g, &a| {
                    if a <= 0.0 {
                        *g = 0.0;
                    }
                });
                delta = back;
            }
        }
        Ok(grads)
    }
}

/// Trainable scalar count of an encoder with these layer sizes.
pub fn param_count(layer_dims: &[usize]) -> usize {
    layer_dims.windows(2).map(|w| w[0] * w[1] + w[1]).sum()
}

pub fn forward(params: &EncoderParams, x: ArrayView2<'_, f64>) -> Result<Array2<f64>> {
    params.forward(x)
}
