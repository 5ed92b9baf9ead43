use rand::Rng;

use crate::error::{Error, Result};
use crate::numerics::{SampleMatrix, Tensor};

fn image_dims(t: &Tensor) -> Result<(usize, usize, usize)> {
    match *t.shape() {
        [c, h, w] => Ok((c, h, w)),
        ref s => Err(Error::invalid(format!(
            "expected a CxHxW tensor, got {s:?}"
        ))),
    }
}

fn check_window(m: usize, h: usize, w: usize) -> Result<()> {
    if m == 0 || m > h || m > w {
        return Err(Error::invalid(format!(
            "window {m}x{m} does not fit a {h}x{w} input"
        )));
    }
    Ok(())
}

/// Every stride-1 `m × m` block of one channel, in raster order (left to
/// right, then down), each vectorized row-major.
pub fn extract_blocks(image: &Tensor, m: usize, channel: usize) -> Result<SampleMatrix> {
    let (c, h, w) = image_dims(image)?;
    check_window(m, h, w)?;
    if channel >= c {
        return Err(Error::invalid(format!(
            "channel {channel} out of range for {c} channels"
        )));
    }
    let (by, bx) = (h - m + 1, w - m + 1);
    let mut out = Vec::with_capacity(by * bx * m * m);
    for y in 0..by {
        for x in 0..bx {
            push_block(image, channel, y, x, m, &mut out);
        }
    }
    SampleMatrix::new(by * bx, m * m, out)
}

#[inline]
fn push_block(image: &Tensor, channel: usize, y: usize, x: usize, m: usize, out: &mut Vec<f64>) {
    let (h, w) = (image.shape()[1], image.shape()[2]);
    for i in 0..m {
        let start = (channel * h + y + i) * w + x;
        out.extend_from_slice(&image.data()[start..start + m]);
    }
}

/// `n` random `m × m × c` crops, each vectorized channel-major then
/// row-major. Top-left corners are uniform over the valid positions; for each
/// crop the row offset is drawn before the column offset.
pub fn extract_random_crops<R: Rng + ?Sized>(
    activation: &Tensor,
    m: usize,
    n: usize,
    rng: &mut R,
) -> Result<SampleMatrix> {
    extract_random_crops_with_offsets(activation, m, n, rng).map(|(s, _)| s)
}

/// [`extract_random_crops`] plus the `(row, col)` offset of each crop.
pub fn extract_random_crops_with_offsets<R: Rng + ?Sized>(
    activation: &Tensor,
    m: usize,
    n: usize,
    rng: &mut R,
) -> Result<(SampleMatrix, Vec<(usize, usize)>)> {
    let (c, h, w) = image_dims(activation)?;
    check_window(m, h, w)?;
    if n == 0 {
        return Err(Error::invalid("need at least one crop"));
    }
    let mut out = Vec::with_capacity(n * c * m * m);
    let mut offsets = Vec::with_capacity(n);
    for _ in 0..n {
        let y = rng.random_range(0..=h - m);
        let x = rng.random_range(0..=w - m);
        for ch in 0..c {
            push_block(activation, ch, y, x, m, &mut out);
        }
        offsets.push((y, x));
    }
    Ok((SampleMatrix::new(n, c * m * m, out)?, offsets))
}
