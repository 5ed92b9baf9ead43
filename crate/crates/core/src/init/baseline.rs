use rand::Rng;

use crate::error::{Error, Result};
use crate::numerics::Tensor;
use crate::rng::fill_standard_normal;

fn gaussian_tensor<R: Rng + ?Sized>(shape: &[usize], variance: f64, rng: &mut R) -> Result<Tensor> {
    let mut t = Tensor::new(shape.to_vec(), vec![0.0; shape.iter().product()])?;
    fill_standard_normal(rng, t.data_mut());
    let std = variance.sqrt();
    t.data_mut().iter_mut().for_each(|w| *w *= std);
    Ok(t)
}

/// I.i.d. `N(0, 2 / fan_in)` weights.
pub fn init_he<R: Rng + ?Sized>(fan_in: usize, shape: &[usize], rng: &mut R) -> Result<Tensor> {
    if fan_in == 0 {
        return Err(Error::invalid("fan_in must be >= 1"));
    }
    gaussian_tensor(shape, 2.0 / fan_in as f64, rng)
}

/// I.i.d. `N(0, 2 / (fan_in + fan_out))` weights.
pub fn init_xavier<R: Rng + ?Sized>(
    fan_in: usize,
    fan_out: usize,
    shape: &[usize],
    rng: &mut R,
) -> Result<Tensor> {
    if fan_in == 0 || fan_out == 0 {
        return Err(Error::invalid("fan_in and fan_out must be >= 1"));
    }
    gaussian_tensor(shape, 2.0 / (fan_in + fan_out) as f64, rng)
}
