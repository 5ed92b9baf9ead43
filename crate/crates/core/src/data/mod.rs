//! Datasets: loaders for MNIST IDX, CIFAR-10 binary and PGM directories, a
//! synthetic signal-patch generator, splitting and minibatching.

mod cifar;
mod idx;
mod pgm;
mod split;
mod synthetic;

use std::path::Path;

pub use cifar::{encode_cifar10, load_cifar10, parse_cifar10, CIFAR_RECORD_BYTES};
pub use idx::{
    encode_idx_images, encode_idx_labels, load_mnist_idx, parse_idx_images, parse_idx_labels,
};
pub use pgm::{encode_pgm, load_pgm_dir, parse_pgm, write_pgm};
pub use split::{minibatches, split, split_counts, split_indices};
pub use synthetic::{
    synthetic_dataset, synthetic_dataset_with_origins, PatchOrigin, SyntheticSpec,
};

use crate::error::{Error, Result};
use crate::numerics::Tensor;

/// Labelled images of one common shape.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub images: Vec<Tensor>,
    pub labels: Vec<usize>,
    pub class_count: usize,
}

impl Dataset {
    pub fn new(images: Vec<Tensor>, labels: Vec<usize>, class_count: usize) -> Result<Self> {
        if images.is_empty() {
            return Err(Error::invalid("dataset must contain at least one image"));
        }
        if images.len() != labels.len() {
            return Err(Error::invalid(format!(
                "{} images but {} labels",
                images.len(),
                labels.len()
            )));
        }
        let shape = images[0].shape();
        if shape.len() != 3 {
            return Err(Error::invalid(format!(
                "images must be CxHxW, got {shape:?}"
            )));
        }
        if let Some(i) = images.iter().position(|im| im.shape() != shape) {
            return Err(Error::invalid(format!(
                "image {i} has shape {:?}, expected {shape:?}",
                images[i].shape()
            )));
        }
        if let Some(&bad) = labels.iter().find(|&&l| l >= class_count) {
            return Err(Error::invalid(format!(
                "label {bad} out of range for {class_count} classes"
            )));
        }
        Ok(Dataset {
            images,
            labels,
            class_count,
        })
    }

    pub fn len(&self) -> usize {
        self.images.len()
    }

    pub fn is_empty(&self) -> bool {
        self.images.is_empty()
    }

    /// `[c, h, w]` of every image.
    pub fn image_shape(&self) -> [usize; 3] {
        let s = self.images[0].shape();
        [s[0], s[1], s[2]]
    }

    pub fn subset(&self, indices: &[usize]) -> Dataset {
        Dataset {
            images: indices.iter().map(|&i| self.images[i].clone()).collect(),
            labels: indices.iter().map(|&i| self.labels[i]).collect(),
            class_count: self.class_count,
        }
    }

    /// Per-pixel mean image.
    pub fn mean_image(&self) -> Tensor {
        let mut mean = Tensor::zeros(self.images[0].shape());
        for im in &self.images {
            for (m, x) in mean.data_mut().iter_mut().zip(im.data()) {
                *m += x;
            }
        }
        let n = self.len() as f64;
        mean.data_mut().iter_mut().for_each(|m| *m /= n);
        mean
    }

    /// Copy with `mean` subtracted from every image.
    pub fn centered(&self, mean: &Tensor) -> Dataset {
        Dataset {
            images: self
                .images
                .iter()
                .map(|im| {
                    let data = im
                        .data()
                        .iter()
                        .zip(mean.data())
                        .map(|(x, m)| x - m)
                        .collect();
                    Tensor::new(im.shape().to_vec(), data).expect("same shape")
                })
                .collect(),
            labels: self.labels.clone(),
            class_count: self.class_count,
        }
    }

    pub fn class_histogram(&self) -> Vec<usize> {
        let mut h = vec![0; self.class_count];
        for &l in &self.labels {
            h[l] += 1;
        }
        h
    }
}

/// Read a whole file, transparently gunzipping `.gz` content.
pub(crate) fn read_maybe_gz(path: &Path) -> Result<Vec<u8>> {
    use std::io::Read;
    let raw = std::fs::read(path).map_err(|e| Error::io(path, e))?;
    if raw.starts_with(&[0x1f, 0x8b]) {
        let mut out = Vec::new();
        flate2::read::GzDecoder::new(raw.as_slice())
            .read_to_end(&mut out)
            .map_err(|e| Error::format(0, format!("{}: bad gzip stream: {e}", path.display())))?;
        Ok(out)
    } else {
        Ok(raw)
    }
}
