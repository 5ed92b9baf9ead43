//! Central finite differences of the training loss, used as an oracle for
//! [`backward`](super::backward).

use super::loss::softmax_cross_entropy;
use super::network::{GradientSet, Network};
use crate::error::Result;
use crate::numerics::Tensor;

fn loss(net: &Network, input: &Tensor, label: usize) -> Result<f64> {
    let logits = net.forward(input)?;
    Ok(softmax_cross_entropy(logits.data(), label)?.0)
}

fn slot(net: &mut Network, k: usize, bias: bool) -> &mut [f64] {
    let p = &mut net.params_mut()[k];
    if bias {
        p.bias.data_mut()
    } else {
        p.weight.data_mut()
    }
}

/// `(L(w + h) − L(w − h)) / 2h` for every weight and bias, one at a time.
pub fn numerical_gradient(
    net: &Network,
    input: &Tensor,
    label: usize,
    h: f64,
) -> Result<GradientSet> {
    let mut probe = net.clone();
    let mut out = GradientSet::zeros_like(net);
    for k in 0..net.affine_count() {
        for bias in [false, true] {
            for i in 0..slot(&mut probe, k, bias).len() {
                let original = slot(&mut probe, k, bias)[i];
                slot(&mut probe, k, bias)[i] = original + h;
                let plus = loss(&probe, input, label)?;
                slot(&mut probe, k, bias)[i] = original - h;
                let minus = loss(&probe, input, label)?;
                slot(&mut probe, k, bias)[i] = original;
                let g = &mut out.params[k];
                let t = if bias { &mut g.bias } else { &mut g.weight };
                t.data_mut()[i] = (plus - minus) / (2.0 * h);
            }
        }
    }
    Ok(out)
}

/// `|a − b| / max(|a|, |b|, floor)`: relative error, falling back to an
/// absolute comparison against `floor` when both values are tiny. Equal
/// values (including two zeros) give 0.
pub fn relative_error(a: f64, b: f64, floor: f64) -> f64 {
    if a == b {
        return 0.0;
    }
    (a - b).abs() / a.abs().max(b.abs()).max(floor)
}

/// Largest relative error between two gradient sets, with its flat index.
pub fn max_relative_error(
    analytic: &GradientSet,
    numeric: &GradientSet,
    floor: f64,
) -> (f64, usize) {
    analytic
        .flatten()
        .into_iter()
        .zip(numeric.flatten())
        .map(|(a, n)| relative_error(a, n, floor))
        .enumerate()
        .fold(
            (0.0, 0),
            |(best, at), (i, e)| if e > best { (e, i) } else { (best, at) },
        )
}
