//! CIFAR-10 binary batches: 3073-byte records of one label byte followed by
//! the 32×32 R, G and B planes.

use std::path::Path;

use super::{read_maybe_gz, Dataset};
use crate::error::{Error, Result};
use crate::numerics::Tensor;

pub const CIFAR_RECORD_BYTES: usize = 1 + 3 * 32 * 32;

pub fn parse_cifar10(bytes: &[u8]) -> Result<Dataset> {
    if bytes.is_empty() || !bytes.len().is_multiple_of(CIFAR_RECORD_BYTES) {
        return Err(Error::format(
            (bytes.len() - bytes.len() % CIFAR_RECORD_BYTES) as u64,
            format!(
                "length {} is not a positive multiple of {CIFAR_RECORD_BYTES}",
                bytes.len()
            ),
        ));
    }
    let mut images = Vec::with_capacity(bytes.len() / CIFAR_RECORD_BYTES);
    let mut labels = Vec::with_capacity(images.capacity());
    for (r, rec) in bytes.chunks_exact(CIFAR_RECORD_BYTES).enumerate() {
        let label = rec[0];
        if label > 9 {
            return Err(Error::format(
                (r * CIFAR_RECORD_BYTES) as u64,
                format!("label {label} out of range 0..=9"),
            ));
        }
        labels.push(usize::from(label));
        images.push(Tensor::new(
            vec![3, 32, 32],
            rec[1..].iter().map(|&b| f64::from(b) / 255.0).collect(),
        )?);
    }
    Dataset::new(images, labels, 10)
}

/// Load and concatenate CIFAR-10 batch files (raw or gzipped).
pub fn load_cifar10<P: AsRef<Path>>(batch_paths: &[P]) -> Result<Dataset> {
    if batch_paths.is_empty() {
        return Err(Error::invalid("no CIFAR-10 batch files given"));
    }
    let mut images = Vec::new();
    let mut labels = Vec::new();
    for p in batch_paths {
        let bytes = read_maybe_gz(p.as_ref())?;
        let d = parse_cifar10(&bytes).map_err(|e| match e {
            Error::Format { offset, message } => {
                Error::format(offset, format!("{}: {message}", p.as_ref().display()))
            }
            other => other,
        })?;
        images.extend(d.images);
        labels.extend(d.labels);
    }
    Dataset::new(images, labels, 10)
}

/// Inverse of [`parse_cifar10`] for images whose values are multiples of 1/255.
pub fn encode_cifar10(dataset: &Dataset) -> Result<Vec<u8>> {
    if dataset.image_shape() != [3, 32, 32] {
        return Err(Error::invalid("CIFAR-10 records hold 3x32x32 images"));
    }
    let mut out = Vec::with_capacity(dataset.len() * CIFAR_RECORD_BYTES);
    for (im, &l) in dataset.images.iter().zip(&dataset.labels) {
        out.push(l as u8);
        out.extend(
            im.data()
                .iter()
                .map(|&v| (v * 255.0).round().clamp(0.0, 255.0) as u8),
        );
    }
    Ok(out)
}
