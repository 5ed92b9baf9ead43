//! Binary PGM ("P5") images, used both for the generic directory loader and
//! for heatmap output.

use std::path::Path;

use super::Dataset;
use crate::error::{Error, Result};
use crate::numerics::Tensor;

/// Decode a P5 image into a `1×H×W` tensor scaled by `1/maxval`.
pub fn parse_pgm(bytes: &[u8]) -> Result<Tensor> {
    let mut pos = 0usize;
    let mut fields = Vec::with_capacity(4);
    while fields.len() < 4 {
        // skip whitespace and comments
        while pos < bytes.len() {
            match bytes[pos] {
                b'#' => {
                    while pos < bytes.len() && bytes[pos] != b'\n' {
                        pos += 1;
                    }
                }
                c if c.is_ascii_whitespace() => pos += 1,
                _ => break,
            }
        }
        let start = pos;
        while pos < bytes.len() && !bytes[pos].is_ascii_whitespace() {
            pos += 1;
        }
        if start == pos {
            return Err(Error::format(pos as u64, "truncated PGM header"));
        }
        fields.push((start, std::str::from_utf8(&bytes[start..pos]).unwrap_or("")));
    }
    if fields[0].1 != "P5" {
        return Err(Error::format(0, "not a binary PGM (missing P5 magic)"));
    }
    let mut nums = [0usize; 3];
    for (n, &(at, text)) in nums.iter_mut().zip(&fields[1..]) {
        *n = text
            .parse()
            .map_err(|_| Error::format(at as u64, format!("bad header field `{text}`")))?;
    }
    let [w, h, maxval] = nums;
    if w == 0 || h == 0 {
        return Err(Error::format(fields[1].0 as u64, "empty image"));
    }
    if maxval == 0 || maxval > 255 {
        return Err(Error::format(
            fields[3].0 as u64,
            format!("unsupported maxval {maxval}"),
        ));
    }
    // exactly one whitespace byte separates the header from the raster
    pos += 1;
    let raster = bytes.get(pos..pos + w * h).ok_or_else(|| {
        Error::format(bytes.len() as u64, format!("raster needs {} bytes", w * h))
    })?;
    Tensor::new(
        vec![1, h, w],
        raster
            .iter()
            .map(|&b| f64::from(b) / maxval as f64)
            .collect(),
    )
}

/// Encode values in `[0, 1]` laid out `height × width` as an 8-bit P5 image.
pub fn encode_pgm(values: &[f64], height: usize, width: usize) -> Result<Vec<u8>> {
    if values.len() != height * width || values.is_empty() {
        return Err(Error::invalid(format!(
            "{} values do not form a {height}x{width} image",
            values.len()
        )));
    }
    let mut out = format!("P5\n{width} {height}\n255\n").into_bytes();
    out.extend(
        values
            .iter()
            .map(|&v| (v.clamp(0.0, 1.0) * 255.0).round() as u8),
    );
    Ok(out)
}

pub fn write_pgm(
    path: impl AsRef<Path>,
    values: &[f64],
    height: usize,
    width: usize,
) -> Result<()> {
    let bytes = encode_pgm(values, height, width)?;
    std::fs::write(path.as_ref(), bytes).map_err(|e| Error::io(path.as_ref(), e))
}

/// Load `root/<class>/*.pgm`. Class directories are sorted by name and
/// numbered from 0; files inside each are read in name order.
pub fn load_pgm_dir(root: impl AsRef<Path>) -> Result<Dataset> {
    let root = root.as_ref();
    let list = |dir: &Path| -> Result<Vec<std::path::PathBuf>> {
        let mut v = std::fs::read_dir(dir)
            .map_err(|e| Error::io(dir, e))?
            .map(|e| e.map(|e| e.path()).map_err(|err| Error::io(dir, err)))
            .collect::<Result<Vec<_>>>()?;
        v.sort();
        Ok(v)
    };
    let classes: Vec<_> = list(root)?.into_iter().filter(|p| p.is_dir()).collect();
    if classes.is_empty() {
        return Err(Error::invalid(format!(
            "{}: no class directories",
            root.display()
        )));
    }
    let mut images = Vec::new();
    let mut labels = Vec::new();
    for (label, dir) in classes.iter().enumerate() {
        for file in list(dir)? {
            if file.extension().and_then(|e| e.to_str()) != Some("pgm") {
                continue;
            }
            let bytes = std::fs::read(&file).map_err(|e| Error::io(&file, e))?;
            let im = parse_pgm(&bytes).map_err(|e| match e {
                Error::Format { offset, message } => {
                    Error::format(offset, format!("{}: {message}", file.display()))
                }
                other => other,
            })?;
            images.push(im);
            labels.push(label);
        }
    }
    Dataset::new(images, labels, classes.len())
}
