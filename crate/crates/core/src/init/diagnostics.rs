//! Measurements used to compare initializers.

use crate::error::{Error, Result};
use crate::nn::Network;
use crate::numerics::{pooled_mean_variance, Matrix, Tensor};

/// Mean over filters of `|cos(filter, target)|`.
pub fn mean_abs_cosine(filters: &Matrix, target: &[f64]) -> Result<f64> {
    if filters.cols() != target.len() {
        return Err(Error::invalid("filter and target dimensions differ"));
    }
    let tn = target.iter().map(|x| x * x).sum::<f64>().sqrt();
    let mut total = 0.0;
    for f in filters.iter_rows() {
        let fnorm = f.iter().map(|x| x * x).sum::<f64>().sqrt();
        let dot: f64 = f.iter().zip(target).map(|(a, b)| a * b).sum();
        if fnorm > 0.0 && tn > 0.0 {
            total += (dot / (fnorm * tn)).abs();
        }
    }
    Ok(total / filters.rows() as f64)
}

/// Standard deviation of every affine layer's outputs, pooled over units and
/// probe inputs.
pub fn preactivation_stds(net: &Network, probes: &[Tensor]) -> Result<Vec<f64>> {
    let mut per_layer: Vec<Vec<f64>> = vec![Vec::new(); net.affine_count()];
    for x in probes {
        for (acc, t) in per_layer.iter_mut().zip(net.pre_activations(x)?) {
            acc.extend_from_slice(t.data());
        }
    }
    Ok(per_layer
        .iter()
        .map(|v| pooled_mean_variance(v).1.sqrt())
        .collect())
}

/// `std[k+1] / std[k]` for consecutive affine layers.
pub fn consecutive_ratios(stds: &[f64]) -> Vec<f64> {
    stds.windows(2).map(|w| w[1] / w[0]).collect()
}
