use crate::error::Result;
use crate::nn::{input_gradient, Network};
use crate::numerics::Tensor;

/// Input-gradient saliency of the predicted class.
///
/// `|∂ logit_pred / ∂ x|`, maximized over channels and min-max normalized to
/// `[0, 1]`. A flat map (max = min) is returned as all zeros. The result has
/// shape `[H, W]`.
pub fn saliency_map(net: &Network, image: &Tensor) -> Result<Tensor> {
    let pred = net.predict(image)?;
    let mut onehot = vec![0.0; net.spec().class_count()];
    onehot[pred] = 1.0;
    let grad = input_gradient(net, image, &onehot)?;
    let (c, h, w) = (grad.shape()[0], grad.shape()[1], grad.shape()[2]);
    let mut map = vec![0.0f64; h * w];
    for ch in 0..c {
        for (m, g) in map
            .iter_mut()
            .zip(&grad.data()[ch * h * w..(ch + 1) * h * w])
        {
            *m = m.max(g.abs());
        }
    }
    let (lo, hi) = map
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| {
            (lo.min(v), hi.max(v))
        });
    if hi > lo {
        map.iter_mut().for_each(|v| *v = (*v - lo) / (hi - lo));
    } else {
        map.fill(0.0);
    }
    Tensor::new(vec![h, w], map)
}
