//! Data-dependent weight initialization for small convolutional networks.
//!
//! The crate bundles everything needed to compare initializers end to end:
//!
//! * [`numerics`]: dense statistics and linear algebra (covariance, Jacobi
//!   eigendecomposition, Cholesky, Gaussian sampling, ZCA whitening).
//! * [`nn`]: a minimal CNN (conv / dense / relu / maxpool / flatten) with exact
//!   reverse-mode gradients, SGD and a finite-difference gradient checker.
//! * [`init`]: Xavier, He, block-PCA and data-statistics initializers plus the
//!   layer-by-layer network driver.
//! * [`data`]: MNIST IDX, CIFAR-10 binary and PGM loaders, a synthetic
//!   signal-patch generator, splitting and minibatching.
//! * [`harness`]: run configuration, training runs, initializer comparison,
//!   metrics/plots, saliency maps and the `DSIN` model container.

pub mod data;
pub mod error;
pub mod harness;
pub mod init;
pub mod nn;
pub mod numerics;
pub mod rng;

pub use error::{Error, Result};
