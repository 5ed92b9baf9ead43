use super::eigen::sym_eigendecomposition;
use super::matrix::{Matrix, SampleMatrix};
use super::stats::{center_rows, covariance_matrix, mean_vector};
use crate::error::{Error, Result};

/// Directions whose regularized variance falls below this fraction of the
/// largest one carry no data and are mapped to zero instead of amplified.
const RELATIVE_CUTOFF: f64 = 1e-12;

fn inv_sqrt_factors(eigenvalues: &[f64], epsilon: f64, scale: f64) -> Vec<f64> {
    let top = eigenvalues.iter().fold(0.0f64, |m, &l| m.max(l)) * scale;
    let cutoff = RELATIVE_CUTOFF * top;
    eigenvalues
        .iter()
        .map(|&l| {
            let v = l.max(0.0) * scale + epsilon;
            if v > cutoff && v > 0.0 {
                1.0 / v.sqrt()
            } else {
                0.0
            }
        })
        .collect()
}

fn check_whiten_args(samples: &SampleMatrix, epsilon: f64) -> Result<()> {
    if samples.rows() < 2 {
        return Err(Error::invalid(format!(
            "whitening needs at least 2 samples, got {}",
            samples.rows()
        )));
    }
    if !(epsilon >= 0.0 && epsilon.is_finite()) {
        return Err(Error::invalid(format!(
            "epsilon must be >= 0, got {epsilon}"
        )));
    }
    Ok(())
}

/// ZCA whitening: `(X − mean) · V diag((λ + ε)^−½) Vᵀ`, with `(λ, V)` the
/// eigenpairs of the population covariance.
///
/// When there are no more samples than dimensions the same map is evaluated
/// through the `N × N` Gram matrix instead (see [`zca_whiten_via_gram`]); both
/// give the same result, the Gram route just avoids a `d × d` eigenproblem.
pub fn zca_whiten(samples: &SampleMatrix, epsilon: f64) -> Result<SampleMatrix> {
    if samples.rows() <= samples.cols() {
        zca_whiten_via_gram(samples, epsilon)
    } else {
        zca_whiten_via_covariance(samples, epsilon)
    }
}

pub fn zca_whiten_via_covariance(samples: &SampleMatrix, epsilon: f64) -> Result<SampleMatrix> {
    check_whiten_args(samples, epsilon)?;
    let mean = mean_vector(samples);
    let cov = covariance_matrix(samples, &mean)?;
    let eig = sym_eigendecomposition(&cov)?;
    let f = inv_sqrt_factors(&eig.values, epsilon, 1.0);

    let d = samples.cols();
    let mut w = Matrix::zeros(d, d);
    for i in 0..d {
        for j in i..d {
            let v: f64 = (0..d)
                .map(|k| eig.vectors[(i, k)] * f[k] * eig.vectors[(j, k)])
                .sum();
            w[(i, j)] = v;
            w[(j, i)] = v;
        }
    }
    center_rows(samples, &mean).matmul(&w)
}

/// ZCA whitening through the Gram matrix `G = Xc Xcᵀ = U diag(μ) Uᵀ`.
///
/// Since the covariance eigenvalues are `μ / N` and every centered row lies in
/// the span of the covariance eigenvectors with non-zero eigenvalue, the ZCA
/// output equals `U diag((μ/N + ε)^−½) Uᵀ Xc`.
pub fn zca_whiten_via_gram(samples: &SampleMatrix, epsilon: f64) -> Result<SampleMatrix> {
    check_whiten_args(samples, epsilon)?;
    let n = samples.rows();
    let mean = mean_vector(samples);
    let xc = center_rows(samples, &mean);

    let mut gram = Matrix::zeros(n, n);
    for i in 0..n {
        for j in i..n {
            let v: f64 = xc.row(i).iter().zip(xc.row(j)).map(|(a, b)| a * b).sum();
            gram[(i, j)] = v;
            gram[(j, i)] = v;
        }
    }
    let eig = sym_eigendecomposition(&gram)?;
    let f = inv_sqrt_factors(&eig.values, epsilon, 1.0 / n as f64);

    // M = U diag(f) Uᵀ, then out = M · Xc
    let mut m = Matrix::zeros(n, n);
    for i in 0..n {
        for j in i..n {
            let v: f64 = (0..n)
                .map(|k| eig.vectors[(i, k)] * f[k] * eig.vectors[(j, k)])
                .sum();
            m[(i, j)] = v;
            m[(j, i)] = v;
        }
    }
    m.matmul(&xc)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::gaussian::{sample_multivariate_gaussian, GaussianModel};
    use crate::rng;
    use rand::Rng;

    fn max_abs_mean(s: &Matrix) -> f64 {
        mean_vector(s).iter().fold(0.0, |m, x| m.max(x.abs()))
    }

    fn cov_error(s: &Matrix) -> f64 {
        let mean = mean_vector(s);
        covariance_matrix(s, &mean)
            .unwrap()
            .sub(&Matrix::identity(s.cols()))
            .unwrap()
            .frobenius_norm()
    }

    #[test]
    fn identity_covariance_is_a_fixed_point() {
        // rows ±e_j·√d: zero mean, population covariance exactly I
        let d = 4;
        let mut rows = Vec::new();
        for j in 0..d {
            for sign in [1.0, -1.0] {
                let mut r = vec![0.0; d];
                r[j] = sign * (d as f64).sqrt();
                rows.push(r);
            }
        }
        let s = Matrix::from_rows(&rows).unwrap();
        let w = zca_whiten(&s, 0.0).unwrap();
        assert!(w.sub(&s).unwrap().max_abs() < 1e-8);
    }

    #[test]
    fn rank_deficient_is_regularized() {
        let mut r = rng::seeded(3);
        let s = Matrix::new(3, 8, (0..24).map(|_| r.random_range(0.0..1.0)).collect()).unwrap();
        let w = zca_whiten(&s, 1e-5).unwrap();
        assert!(w.data().iter().all(|x| x.is_finite()));
        assert!(max_abs_mean(&w) < 1e-10);
    }

    #[test]
    fn gaussian_draws_become_white() {
        let model = GaussianModel::new(vec![5.0, 5.0], Matrix::from_diag(&[2.0, 0.5])).unwrap();
        let s = sample_multivariate_gaussian(&model, 10_000, 0.0, &mut rng::seeded(6)).unwrap();
        let w = zca_whiten(&s, 0.0).unwrap();
        assert!(cov_error(&w) < 1e-6);
        assert!(max_abs_mean(&w) < 1e-10);
    }

    #[test]
    fn rejects_single_sample() {
        let s = Matrix::new(1, 3, vec![1.0, 2.0, 3.0]).unwrap();
        assert!(matches!(
            zca_whiten(&s, 1e-5),
            Err(Error::InvalidArgument(_))
        ));
    }

    #[test]
    fn gram_route_matches_covariance_route() {
        let mut r = rng::seeded(17);
        for (n, d) in [(5, 12), (12, 12), (20, 7)] {
            let s = Matrix::new(
                n,
                d,
                (0..n * d).map(|_| r.random_range(-1.0..2.0)).collect(),
            )
            .unwrap();
            for eps in [1e-5, 1e-2] {
                let a = zca_whiten_via_covariance(&s, eps).unwrap();
                let b = zca_whiten_via_gram(&s, eps).unwrap();
                let diff = a.sub(&b).unwrap().max_abs();
                assert!(diff < 1e-8, "n={n} d={d} eps={eps}: {diff}");
            }
        }
    }

    proptest::proptest! {
        #![proptest_config(proptest::prelude::ProptestConfig::with_cases(24))]
        #[test]
        fn full_rank_whitening_is_exact(d in 1usize..12, extra in 1usize..40, seed in proptest::prelude::any::<u64>()) {
            let n = d + extra;
            let mut r = rng::seeded(seed);
            let s = Matrix::new(n, d, (0..n * d).map(|_| r.random_range(-3.0..3.0)).collect()).unwrap();
            let w = zca_whiten(&s, 0.0).unwrap();
            proptest::prop_assert!(max_abs_mean(&w) <= 1e-10);
            proptest::prop_assert!(cov_error(&w) <= 1e-6);
        }
    }
}
