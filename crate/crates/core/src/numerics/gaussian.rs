use rand::Rng;

use super::cholesky::cholesky;
use super::matrix::{Matrix, SampleMatrix};
use super::stats::{covariance_matrix, mean_vector};
use crate::error::{Error, Result};
use crate::rng::fill_standard_normal;

/// Mean and population covariance of a sample set.
#[derive(Debug, Clone)]
pub struct GaussianModel {
    pub mean: Vec<f64>,
    pub covariance: Matrix,
}

impl GaussianModel {
    pub fn new(mean: Vec<f64>, covariance: Matrix) -> Result<Self> {
        if covariance.rows() != mean.len() || covariance.cols() != mean.len() {
            return Err(Error::invalid(format!(
                "covariance {}x{} does not match mean of length {}",
                covariance.rows(),
                covariance.cols(),
                mean.len()
            )));
        }
        Ok(GaussianModel { mean, covariance })
    }

    pub fn fit(samples: &SampleMatrix) -> Result<Self> {
        let mean = mean_vector(samples);
        let covariance = covariance_matrix(samples, &mean)?;
        Ok(GaussianModel { mean, covariance })
    }

    pub fn dim(&self) -> usize {
        self.mean.len()
    }
}

/// Draw `count` rows from `N(mean, C + εI)`.
///
/// The standard normal block `Z` (count × d) is filled row-major from
/// consecutive Box–Muller pairs, then each row is `mean + L z` with
/// `L = cholesky(C, ε)`.
pub fn sample_multivariate_gaussian<R: Rng + ?Sized>(
    model: &GaussianModel,
    count: usize,
    epsilon: f64,
    rng: &mut R,
) -> Result<SampleMatrix> {
    if count == 0 {
        return Err(Error::invalid("sample count must be at least 1"));
    }
    let d = model.dim();
    let l = cholesky(&model.covariance, epsilon)?;
    let mut z = vec![0.0; count * d];
    fill_standard_normal(rng, &mut z);

    let mut out = Matrix::zeros(count, d);
    for (i, zi) in z.chunks_exact(d).enumerate() {
        let row = out.row_mut(i);
        for (r, (x, m)) in row.iter_mut().zip(&model.mean).enumerate() {
            let lz: f64 = l.row(r)[..=r].iter().zip(zi).map(|(a, b)| a * b).sum();
            *x = m + lz;
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng;

    #[test]
    fn zero_covariance_collapses_to_mean() {
        let d = 3;
        let model = GaussianModel::new(vec![1.0, -2.0, 0.5], Matrix::zeros(d, d)).unwrap();
        let eps = 1e-8;
        let s = sample_multivariate_gaussian(&model, 50, eps, &mut rng::seeded(1)).unwrap();
        let bound = 3.0 * eps.sqrt() * (d as f64).sqrt();
        for row in s.iter_rows() {
            for (x, m) in row.iter().zip(&model.mean) {
                assert!((x - m).abs() <= bound);
            }
        }
    }

    #[test]
    fn single_draw_shape() {
        let model = GaussianModel::new(vec![0.0; 4], Matrix::identity(4)).unwrap();
        let s = sample_multivariate_gaussian(&model, 1, 0.0, &mut rng::seeded(1)).unwrap();
        assert_eq!((s.rows(), s.cols()), (1, 4));
        assert!(sample_multivariate_gaussian(&model, 0, 0.0, &mut rng::seeded(1)).is_err());
    }

    #[test]
    fn moments_converge() {
        let cov = Matrix::from_rows(&[vec![2.0, 0.5], vec![0.5, 1.0]]).unwrap();
        let model = GaussianModel::new(vec![1.0, -1.0], cov.clone()).unwrap();
        let s = sample_multivariate_gaussian(&model, 100_000, 0.0, &mut rng::seeded(2024)).unwrap();
        let fitted = GaussianModel::fit(&s).unwrap();
        for (a, b) in fitted.mean.iter().zip(&model.mean) {
            assert!((a - b).abs() < 0.02, "mean {a} vs {b}");
        }
        for (a, b) in fitted.covariance.data().iter().zip(cov.data()) {
            assert!((a - b).abs() < 0.05, "cov {a} vs {b}");
        }
    }

    #[test]
    fn deterministic_per_seed() {
        let cov = Matrix::from_rows(&[vec![2.0, 0.5], vec![0.5, 1.0]]).unwrap();
        let model = GaussianModel::new(vec![1.0, -1.0], cov).unwrap();
        let a = sample_multivariate_gaussian(&model, 33, 1e-5, &mut rng::seeded(8)).unwrap();
        let b = sample_multivariate_gaussian(&model, 33, 1e-5, &mut rng::seeded(8)).unwrap();
        let bits = |m: &Matrix| m.data().iter().map(|x| x.to_bits()).collect::<Vec<_>>();
        assert_eq!(bits(&a), bits(&b));
    }
}
