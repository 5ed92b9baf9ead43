use rand::Rng;

use super::filters::FilterBank;
use crate::error::{Error, Result};
use crate::numerics::{
    sample_multivariate_gaussian, scale_to_variance, zca_whiten, GaussianModel, SampleMatrix,
};

/// Fit `N(mean, C)` to the crops and draw `n_k` filters from `N(mean, C + εI)`.
pub fn sample_filter_bank<R: Rng + ?Sized>(
    crops: &SampleMatrix,
    n_k: usize,
    epsilon: f64,
    rng: &mut R,
) -> Result<SampleMatrix> {
    if crops.rows() < 2 {
        return Err(Error::invalid(format!(
            "need at least 2 crops to estimate statistics, got {}",
            crops.rows()
        )));
    }
    let model = GaussianModel::fit(crops)?;
    let spread: f64 = (0..model.dim()).map(|j| model.covariance[(j, j)]).sum();
    let magnitude: f64 = model.mean.iter().map(|m| m * m).sum();
    if spread <= 1e-24 * (1.0 + magnitude) {
        return Err(Error::DegenerateInput(
            "all crops are identical; the crop covariance is zero".into(),
        ));
    }
    sample_multivariate_gaussian(&model, n_k, epsilon, rng)
}

/// Data-statistics initialization of one affine layer: Gaussian fit to the
/// crops, `n_k` draws, ZCA whitening of the draws (ε-regularized), then a
/// uniform rescale to pooled variance `2 / fan_in`.
pub fn data_stats_init_layer<R: Rng + ?Sized>(
    crops: &SampleMatrix,
    n_k: usize,
    fan_in: usize,
    epsilon: f64,
    rng: &mut R,
) -> Result<FilterBank> {
    if crops.cols() != fan_in {
        return Err(Error::invalid(format!(
            "crop dimension {} does not match fan_in {fan_in}",
            crops.cols()
        )));
    }
    if n_k < 2 {
        return Err(Error::invalid(format!(
            "whitening a filter bank needs at least 2 filters, got {n_k}"
        )));
    }
    let sampled = sample_filter_bank(crops, n_k, epsilon, rng)?;
    let whitened = zca_whiten(&sampled, epsilon)?;
    let filters = scale_to_variance(&whitened, 2.0 / fan_in as f64)?;
    Ok(FilterBank { filters })
}
