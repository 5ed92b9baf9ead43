use crate::error::{Error, Result};
use crate::numerics::{Matrix, Tensor};

/// `n_k` vectorized filters, one per row. Conv filters are laid out
/// channel-major then row-major, matching the `(n_k, c_in, m, m)` weight
/// tensor, so the conversion is a reshape.
#[derive(Debug, Clone, PartialEq)]
pub struct FilterBank {
    pub filters: Matrix,
}

impl FilterBank {
    pub fn count(&self) -> usize {
        self.filters.rows()
    }

    pub fn dim(&self) -> usize {
        self.filters.cols()
    }

    pub fn from_weight(weight: &Tensor) -> Self {
        let n_k = weight.shape()[0];
        let d = weight.len() / n_k;
        FilterBank {
            filters: Matrix::new(n_k, d, weight.data().to_vec()).expect("weight has rows"),
        }
    }

    pub fn to_weight(&self, shape: &[usize]) -> Result<Tensor> {
        if shape.first() != Some(&self.count())
            || shape.iter().product::<usize>() != self.filters.data().len()
        {
            return Err(Error::invalid(format!(
                "{}x{} filter bank cannot fill weight shape {shape:?}",
                self.count(),
                self.dim()
            )));
        }
        Tensor::new(shape.to_vec(), self.filters.data().to_vec())
    }
}
