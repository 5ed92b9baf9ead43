use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Scheme {
    Xavier,
    He,
    /// Block-PCA filters for the first conv layer, He elsewhere.
    Pca,
    /// Layer-wise Gaussian fit to data crops, whitened and rescaled to He variance.
    DataStats,
}

impl Scheme {
    pub const ALL: [Scheme; 4] = [Scheme::Xavier, Scheme::He, Scheme::Pca, Scheme::DataStats];

    pub fn name(&self) -> &'static str {
        match self {
            Scheme::Xavier => "xavier",
            Scheme::He => "he",
            Scheme::Pca => "pca",
            Scheme::DataStats => "datastats",
        }
    }
}

impl fmt::Display for Scheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Scheme {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Scheme::ALL
            .into_iter()
            .find(|k| k.name() == s.trim())
            .ok_or_else(|| {
                Error::invalid(format!(
                    "unknown init scheme `{s}` (expected xavier, he, pca or datastats)"
                ))
            })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct InitConfig {
    pub scheme: Scheme,
    /// Images drawn (without replacement) for data-dependent statistics.
    pub subsample_size: usize,
    /// Random crops taken from each subsampled activation.
    pub crops_per_image: usize,
    /// Diagonal regularization for Gaussian sampling and whitening.
    pub epsilon: f64,
    pub seed: u64,
    /// Subtract the mean block before forming the PCA scatter matrix.
    pub pca_center: bool,
}

impl Default for InitConfig {
    fn default() -> Self {
        InitConfig {
            scheme: Scheme::He,
            subsample_size: 256,
            crops_per_image: 10,
            epsilon: 1e-5,
            seed: 0,
            pca_center: false,
        }
    }
}

impl InitConfig {
    pub fn validate(&self) -> Result<()> {
        if self.subsample_size < 2 {
            return Err(Error::invalid("subsample_size must be >= 2"));
        }
        if self.crops_per_image < 1 {
            return Err(Error::invalid("crops_per_image must be >= 1"));
        }
        if !(self.epsilon > 0.0 && self.epsilon.is_finite()) {
            return Err(Error::invalid("epsilon must be > 0"));
        }
        Ok(())
    }
}
