//! MNIST IDX files: big-endian header (magic 2051 for images, 2049 for
//! labels, then the dimension sizes) followed by raw unsigned bytes.

use std::path::Path;

use super::{read_maybe_gz, Dataset};
use crate::error::{Error, Result};
use crate::numerics::Tensor;

const IMAGE_MAGIC: u32 = 2051;
const LABEL_MAGIC: u32 = 2049;

fn be_u32(bytes: &[u8], offset: usize) -> Result<u32> {
    bytes
        .get(offset..offset + 4)
        .map(|b| u32::from_be_bytes([b[0], b[1], b[2], b[3]]))
        .ok_or_else(|| Error::format(offset as u64, "truncated header"))
}

/// Returns `(rows, cols, images)` with each image as raw bytes.
pub fn parse_idx_images(bytes: &[u8]) -> Result<(usize, usize, Vec<&[u8]>)> {
    let magic = be_u32(bytes, 0)?;
    if magic != IMAGE_MAGIC {
        return Err(Error::format(
            0,
            format!("bad image magic {magic}, expected {IMAGE_MAGIC}"),
        ));
    }
    let count = be_u32(bytes, 4)? as usize;
    let rows = be_u32(bytes, 8)? as usize;
    let cols = be_u32(bytes, 12)? as usize;
    if rows == 0 || cols == 0 {
        return Err(Error::format(
            8,
            format!("empty image dimensions {rows}x{cols}"),
        ));
    }
    let size = rows * cols;
    let payload = &bytes[16..];
    if payload.len() < count * size {
        return Err(Error::format(
            bytes.len() as u64,
            format!(
                "truncated payload: {count} images need {} bytes",
                16 + count * size
            ),
        ));
    }
    if payload.len() > count * size {
        return Err(Error::format(
            (16 + count * size) as u64,
            "trailing bytes after image payload",
        ));
    }
    Ok((rows, cols, payload.chunks_exact(size).collect()))
}

pub fn parse_idx_labels(bytes: &[u8]) -> Result<Vec<u8>> {
    let magic = be_u32(bytes, 0)?;
    if magic != LABEL_MAGIC {
        return Err(Error::format(
            0,
            format!("bad label magic {magic}, expected {LABEL_MAGIC}"),
        ));
    }
    let count = be_u32(bytes, 4)? as usize;
    let payload = &bytes[8..];
    if payload.len() != count {
        return Err(Error::format(
            (8 + payload.len().min(count)) as u64,
            format!(
                "label file declares {count} labels but holds {}",
                payload.len()
            ),
        ));
    }
    Ok(payload.to_vec())
}

/// Load an MNIST image/label pair (raw or gzipped) as `1×H×W` images scaled
/// into `[0, 1]`.
pub fn load_mnist_idx(
    images_path: impl AsRef<Path>,
    labels_path: impl AsRef<Path>,
) -> Result<Dataset> {
    let image_bytes = read_maybe_gz(images_path.as_ref())?;
    let label_bytes = read_maybe_gz(labels_path.as_ref())?;
    let (rows, cols, raw) = parse_idx_images(&image_bytes)?;
    let labels = parse_idx_labels(&label_bytes)?;
    if raw.len() != labels.len() {
        return Err(Error::format(
            4,
            format!("{} images but {} labels", raw.len(), labels.len()),
        ));
    }
    if let Some(i) = labels.iter().position(|&l| l > 9) {
        return Err(Error::format(
            (8 + i) as u64,
            format!("label {} out of range 0..=9", labels[i]),
        ));
    }
    let images = raw
        .into_iter()
        .map(|px| {
            Tensor::new(
                vec![1, rows, cols],
                px.iter().map(|&b| f64::from(b) / 255.0).collect(),
            )
        })
        .collect::<Result<Vec<_>>>()?;
    Dataset::new(images, labels.into_iter().map(usize::from).collect(), 10)
}

pub fn encode_idx_images(rows: usize, cols: usize, images: &[Vec<u8>]) -> Vec<u8> {
    let mut out = Vec::with_capacity(16 + images.len() * rows * cols);
    for v in [IMAGE_MAGIC, images.len() as u32, rows as u32, cols as u32] {
        out.extend_from_slice(&v.to_be_bytes());
    }
    for im in images {
        out.extend_from_slice(im);
    }
    out
}

pub fn encode_idx_labels(labels: &[u8]) -> Vec<u8> {
    let mut out = Vec::with_capacity(8 + labels.len());
    out.extend_from_slice(&LABEL_MAGIC.to_be_bytes());
    out.extend_from_slice(&(labels.len() as u32).to_be_bytes());
    out.extend_from_slice(labels);
    out
}
