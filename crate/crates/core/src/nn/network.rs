use super::layers::{conv_forward, dense_forward, maxpool_forward, relu_forward};
use super::spec::{LayerSpec, NetworkSpec};
use crate::error::{Error, Result};
use crate::numerics::Tensor;

/// Weight and bias of one affine layer.
#[derive(Debug, Clone, PartialEq)]
pub struct Params {
    pub weight: Tensor,
    pub bias: Tensor,
}

impl Params {
    pub fn zeros_for(layer: &LayerSpec) -> Option<Self> {
        let shape = layer.weight_shape()?;
        Some(Params {
            bias: Tensor::zeros(&[shape[0]]),
            weight: Tensor::zeros(&shape),
        })
    }

    pub fn len(&self) -> usize {
        self.weight.len() + self.bias.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// A [`NetworkSpec`] together with parameters for each affine layer.
#[derive(Debug, Clone, PartialEq)]
pub struct Network {
    spec: NetworkSpec,
    params: Vec<Params>,
}

/// Per-parameter gradients, shaped like [`Network::params`].
#[derive(Debug, Clone, PartialEq)]
pub struct GradientSet {
    pub params: Vec<Params>,
}

impl GradientSet {
    pub fn zeros_like(net: &Network) -> Self {
        GradientSet {
            params: net
                .params
                .iter()
                .map(|p| Params {
                    weight: Tensor::zeros(p.weight.shape()),
                    bias: Tensor::zeros(p.bias.shape()),
                })
                .collect(),
        }
    }

    pub fn add_assign(&mut self, other: &GradientSet) {
        for (a, b) in self.params.iter_mut().zip(&other.params) {
            for (x, y) in a.weight.data_mut().iter_mut().zip(b.weight.data()) {
                *x += y;
            }
            for (x, y) in a.bias.data_mut().iter_mut().zip(b.bias.data()) {
                *x += y;
            }
        }
    }

    pub fn scale(&mut self, factor: f64) {
        for p in &mut self.params {
            p.weight.data_mut().iter_mut().for_each(|x| *x *= factor);
            p.bias.data_mut().iter_mut().for_each(|x| *x *= factor);
        }
    }

    /// All components, weights before biases, layer by layer.
    pub fn flatten(&self) -> Vec<f64> {
        self.params
            .iter()
            .flat_map(|p| p.weight.data().iter().chain(p.bias.data()).copied())
            .collect()
    }
}

/// Everything a backward pass needs from the forward pass.
pub(crate) struct Trace {
    /// `activations[i]` is the input of layer `i`; the last entry is the output.
    pub activations: Vec<Tensor>,
    pub pool_argmax: Vec<Option<Vec<usize>>>,
}

impl Network {
    /// All weights and biases zero.
    pub fn zeros(spec: NetworkSpec) -> Self {
        let params = spec.layers().iter().filter_map(Params::zeros_for).collect();
        Network { spec, params }
    }

    pub fn from_params(spec: NetworkSpec, params: Vec<Params>) -> Result<Self> {
        let affine: Vec<LayerSpec> = spec
            .layers()
            .iter()
            .copied()
            .filter(LayerSpec::is_affine)
            .collect();
        if affine.len() != params.len() {
            return Err(Error::invalid(format!(
                "network has {} affine layers but {} parameter sets were given",
                affine.len(),
                params.len()
            )));
        }
        for (k, (layer, p)) in affine.iter().zip(&params).enumerate() {
            let shape = layer.weight_shape().unwrap();
            if p.weight.shape() != shape.as_slice() || p.bias.shape() != [shape[0]] {
                return Err(Error::invalid(format!(
                    "affine layer {}: expected weight {shape:?} and bias [{}], got {:?} and {:?}",
                    k + 1,
                    shape[0],
                    p.weight.shape(),
                    p.bias.shape()
                )));
            }
        }
        Ok(Network { spec, params })
    }

    pub fn spec(&self) -> &NetworkSpec {
        &self.spec
    }

    pub fn params(&self) -> &[Params] {
        &self.params
    }

    pub fn params_mut(&mut self) -> &mut [Params] {
        &mut self.params
    }

    pub fn parameter_count(&self) -> usize {
        self.params.iter().map(Params::len).sum()
    }

    pub fn affine_count(&self) -> usize {
        self.params.len()
    }

    fn check_input(&self, input: &Tensor) -> Result<()> {
        let want = self.spec.input_shape();
        if input.shape() != want {
            return Err(Error::invalid(format!(
                "input shape {:?} does not match network input {want:?}",
                input.shape()
            ))
            .at_layer(1));
        }
        Ok(())
    }

    /// Run layers `[0, end)` starting from `input`.
    pub(crate) fn trace(&self, input: &Tensor, end: usize) -> Result<Trace> {
        self.check_input(input)?;
        let mut activations = Vec::with_capacity(end + 1);
        let mut pool_argmax = Vec::with_capacity(end);
        activations.push(input.clone());
        let mut k = 0;
        for layer in &self.spec.layers()[..end] {
            let x = activations.last().unwrap();
            let (y, argmax) = match layer {
                LayerSpec::Conv2d { .. } => {
                    k += 1;
                    (conv_forward(&self.params[k - 1], x), None)
                }
                LayerSpec::Dense { .. } => {
                    k += 1;
                    (dense_forward(&self.params[k - 1], x), None)
                }
                LayerSpec::Relu => (relu_forward(x), None),
                LayerSpec::MaxPool2x2 => {
                    let (y, a) = maxpool_forward(x);
                    (y, Some(a))
                }
                LayerSpec::Flatten => (Tensor::vector(x.data().to_vec()), None),
            };
            activations.push(y);
            pool_argmax.push(argmax);
        }
        Ok(Trace {
            activations,
            pool_argmax,
        })
    }

    /// Logits for one input.
    pub fn forward(&self, input: &Tensor) -> Result<Tensor> {
        let mut t = self.trace(input, self.spec.layers().len())?;
        Ok(t.activations.pop().unwrap())
    }

    /// The tensor that affine layer `k` (1-based) receives: all layers strictly
    /// before it are applied. `k = 1` returns the input unchanged.
    pub fn forward_prefix(&self, input: &Tensor, k: usize) -> Result<Tensor> {
        let affine = self.spec.affine_layers();
        if k == 0 || k > affine.len() {
            return Err(Error::invalid(format!(
                "affine layer index {k} out of range 1..={}",
                affine.len()
            )));
        }
        let mut t = self.trace(input, affine[k - 1])?;
        Ok(t.activations.pop().unwrap())
    }

    /// Outputs of every affine layer (before any nonlinearity), in order.
    pub fn pre_activations(&self, input: &Tensor) -> Result<Vec<Tensor>> {
        let t = self.trace(input, self.spec.layers().len())?;
        Ok(self
            .spec
            .affine_layers()
            .into_iter()
            .map(|i| t.activations[i + 1].clone())
            .collect())
    }

    /// Index of the largest logit (lowest index on ties).
    pub fn predict(&self, input: &Tensor) -> Result<usize> {
        Ok(argmax(self.forward(input)?.data()))
    }
}

pub(crate) fn argmax(values: &[f64]) -> usize {
    let mut best = 0;
    for (i, &v) in values.iter().enumerate() {
        if v > values[best] {
            best = i;
        }
    }
    best
}
