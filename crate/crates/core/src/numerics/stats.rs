use super::matrix::{Matrix, SampleMatrix};
use crate::error::{Error, Result};

/// Column means of a sample matrix.
pub fn mean_vector(samples: &SampleMatrix) -> Vec<f64> {
    let n = samples.rows() as f64;
    let mut mean = vec![0.0; samples.cols()];
    for row in samples.iter_rows() {
        for (m, &x) in mean.iter_mut().zip(row) {
            *m += x;
        }
    }
    for m in &mut mean {
        *m /= n;
    }
    mean
}

/// Population covariance (divisor `N`) around the supplied mean.
///
/// Only the upper triangle is accumulated; the result is exactly symmetric.
pub fn covariance_matrix(samples: &SampleMatrix, mean: &[f64]) -> Result<Matrix> {
    let d = samples.cols();
    if mean.len() != d {
        return Err(Error::invalid(format!(
            "mean has length {} but samples have dimension {d}",
            mean.len()
        )));
    }
    let mut cov = Matrix::zeros(d, d);
    let mut centered = vec![0.0; d];
    for row in samples.iter_rows() {
        for ((c, &x), &m) in centered.iter_mut().zip(row).zip(mean) {
            *c = x - m;
        }
        for j in 0..d {
            let cj = centered[j];
            if cj == 0.0 {
                continue;
            }
            let out = &mut cov.row_mut(j)[j..];
            for (o, &ck) in out.iter_mut().zip(&centered[j..]) {
                *o += cj * ck;
            }
        }
    }
    let n = samples.rows() as f64;
    for j in 0..d {
        for k in j..d {
            let v = cov[(j, k)] / n;
            cov[(j, k)] = v;
            cov[(k, j)] = v;
        }
    }
    Ok(cov)
}

/// Subtract `mean` from every row.
pub fn center_rows(samples: &SampleMatrix, mean: &[f64]) -> SampleMatrix {
    let mut out = samples.clone();
    for i in 0..out.rows() {
        for (x, &m) in out.row_mut(i).iter_mut().zip(mean) {
            *x -= m;
        }
    }
    out
}

/// Mean and population variance of all elements taken together.
pub fn pooled_mean_variance(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / n;
    (mean, var)
}

/// Multiply every element by `sqrt(target / v)` where `v` is the pooled
/// elementwise population variance of the input.
pub fn scale_to_variance(samples: &SampleMatrix, target_variance: f64) -> Result<SampleMatrix> {
    if !(target_variance > 0.0 && target_variance.is_finite()) {
        return Err(Error::invalid(format!(
            "target variance must be positive, got {target_variance}"
        )));
    }
    let data = samples.data();
    let (lo, hi) = data
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &x| {
            (lo.min(x), hi.max(x))
        });
    let (_, var) = pooled_mean_variance(data);
    if lo == hi || var <= f64::MIN_POSITIVE {
        return Err(Error::DegenerateInput(
            "pooled variance is zero; cannot rescale".into(),
        ));
    }
    let factor = (target_variance / var).sqrt();
    let scaled = data.iter().map(|x| x * factor).collect();
    Matrix::new(samples.rows(), samples.cols(), scaled)
}
