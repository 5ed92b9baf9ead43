use super::backward::backward;
use super::loss::softmax_cross_entropy;
use super::network::{argmax, GradientSet, Network};
use crate::data::Dataset;
use crate::error::{Error, Result};

/// `w ← w − lr·g` for every parameter.
pub fn sgd_step(net: &mut Network, grads: &GradientSet, lr: f64) -> Result<()> {
    if !(lr > 0.0 && lr.is_finite()) {
        return Err(Error::invalid(format!(
            "learning rate must be positive, got {lr}"
        )));
    }
    if grads.params.len() != net.affine_count() {
        return Err(Error::invalid("gradient set does not match network"));
    }
    for (p, g) in net.params_mut().iter_mut().zip(&grads.params) {
        if p.weight.shape() != g.weight.shape() || p.bias.shape() != g.bias.shape() {
            return Err(Error::invalid("gradient shapes do not match network"));
        }
        for (w, d) in p.weight.data_mut().iter_mut().zip(g.weight.data()) {
            *w -= lr * d;
        }
        for (b, d) in p.bias.data_mut().iter_mut().zip(g.bias.data()) {
            *b -= lr * d;
        }
    }
    Ok(())
}

/// Mean loss and mean gradient over the given samples, accumulated in the
/// order of `indices`.
pub fn batch_gradient(
    net: &Network,
    data: &Dataset,
    indices: &[usize],
) -> Result<(f64, GradientSet)> {
    if indices.is_empty() {
        return Err(Error::invalid("empty batch"));
    }
    let mut total = GradientSet::zeros_like(net);
    let mut loss = 0.0;
    for &i in indices {
        let (l, g) = backward(net, &data.images[i], data.labels[i])?;
        loss += l;
        total.add_assign(&g);
    }
    let n = indices.len() as f64;
    total.scale(1.0 / n);
    Ok((loss / n, total))
}

/// Mean cross-entropy and argmax accuracy over a dataset.
pub fn evaluate(net: &Network, data: &Dataset) -> Result<(f64, f64)> {
    if data.is_empty() {
        return Err(Error::invalid("cannot evaluate on an empty dataset"));
    }
    let mut loss = 0.0;
    let mut correct = 0usize;
    for (x, &y) in data.images.iter().zip(&data.labels) {
        let logits = net.forward(x)?;
        loss += softmax_cross_entropy(logits.data(), y)?.0;
        if argmax(logits.data()) == y {
            correct += 1;
        }
    }
    let n = data.len() as f64;
    Ok((loss / n, correct as f64 / n))
}
