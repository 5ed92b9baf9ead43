//! Dense statistics and linear algebra on `f64` data.
//!
//! Everything here is a pure function of its inputs (plus an explicit
//! generator for sampling).

mod cholesky;
mod eigen;
mod gaussian;
mod matrix;
mod stats;
mod tensor;
mod whiten;

pub use cholesky::cholesky;
pub use eigen::{normalize_sign, sym_eigendecomposition, SymmetricEigen};
pub use gaussian::{sample_multivariate_gaussian, GaussianModel};
pub use matrix::{Matrix, SampleMatrix};
pub use stats::{
    center_rows, covariance_matrix, mean_vector, pooled_mean_variance, scale_to_variance,
};
pub use tensor::Tensor;
pub use whiten::{zca_whiten, zca_whiten_via_covariance, zca_whiten_via_gram};
