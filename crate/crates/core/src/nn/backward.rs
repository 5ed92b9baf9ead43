use super::layers::{conv_backward, dense_backward, maxpool_backward, relu_backward};
use super::loss::softmax_cross_entropy;
use super::network::{GradientSet, Network, Params};
use super::spec::LayerSpec;
use crate::error::Result;
use crate::numerics::Tensor;

/// Loss and exact parameter gradients for one labelled input.
pub fn backward(net: &Network, input: &Tensor, label: usize) -> Result<(f64, GradientSet)> {
    let trace = net.trace(input, net.spec().layers().len())?;
    let logits = trace.activations.last().unwrap();
    let (loss, dlogits) = softmax_cross_entropy(logits.data(), label)?;
    let (grads, _) = propagate(net, &trace, Tensor::vector(dlogits), false);
    Ok((loss, grads))
}

/// Gradient of `Σ_j dlogits[j] · logit_j` with respect to the input image.
pub fn input_gradient(net: &Network, input: &Tensor, dlogits: &[f64]) -> Result<Tensor> {
    let trace = net.trace(input, net.spec().layers().len())?;
    let (_, dx) = propagate(net, &trace, Tensor::vector(dlogits.to_vec()), true);
    Ok(dx.expect("input gradient requested"))
}

fn propagate(
    net: &Network,
    trace: &super::network::Trace,
    dlogits: Tensor,
    want_input_grad: bool,
) -> (GradientSet, Option<Tensor>) {
    let layers = net.spec().layers();
    let first_affine = net.spec().affine_layers()[0];
    let mut grads: Vec<Option<Params>> = vec![None; net.affine_count()];
    let mut k = net.affine_count();
    let mut g = dlogits;
    for i in (0..layers.len()).rev() {
        let x = &trace.activations[i];
        // below the first affine layer only the input gradient still matters
        let need_dx = want_input_grad || i > first_affine;
        g = match layers[i] {
            LayerSpec::Conv2d { .. } | LayerSpec::Dense { .. } => {
                k -= 1;
                let p = &net.params()[k];
                let (pg, dx) = if matches!(layers[i], LayerSpec::Conv2d { .. }) {
                    conv_backward(p, x, &g, need_dx)
                } else {
                    dense_backward(p, x, &g, need_dx)
                };
                grads[k] = Some(pg);
                match dx {
                    Some(dx) => dx,
                    None => break,
                }
            }
            LayerSpec::Relu => relu_backward(x, &g),
            LayerSpec::MaxPool2x2 => {
                let argmax = trace.pool_argmax[i].as_ref().expect("pool trace");
                maxpool_backward(x.shape(), argmax, &g)
            }
            LayerSpec::Flatten => Tensor::new(x.shape().to_vec(), g.into_data()).expect("shape"),
        };
    }
    let grads = GradientSet {
        params: grads
            .into_iter()
            .map(|p| p.expect("every affine layer visited"))
            .collect(),
    };
    (grads, want_input_grad.then_some(g))
}
