use rand::Rng;

use super::Dataset;
use crate::error::{Error, Result};
use crate::numerics::Tensor;
use crate::rng::normal_pair;

/// Two-class toy problem: class 0 is clamped Gaussian noise, class 1 is the
/// same noise with a known patch added near the image centre.
#[derive(Debug, Clone)]
pub struct SyntheticSpec {
    pub image_side: usize,
    /// `1 × p × p` pattern added to class-1 images.
    pub signal_patch: Tensor,
    pub noise_std: f64,
    /// Maximum offset (per axis) of the patch from its centred position.
    pub patch_jitter: usize,
    pub samples_per_class: usize,
}

impl SyntheticSpec {
    /// A `p × p` diagonal cross of ones on a 0.5 background, so every patch
    /// pixel carries signal.
    pub fn cross_patch(p: usize) -> Tensor {
        let mut t = Tensor::filled(&[1, p, p], 0.5);
        for i in 0..p {
            t.data_mut()[i * p + i] = 1.0;
            t.data_mut()[i * p + (p - 1 - i)] = 1.0;
        }
        t
    }

    pub fn patch_side(&self) -> usize {
        self.signal_patch.shape()[1]
    }

    /// Top-left corner of the un-jittered patch.
    pub fn centre_origin(&self) -> usize {
        (self.image_side - self.patch_side()) / 2
    }

    fn validate(&self) -> Result<()> {
        let s = self.signal_patch.shape();
        if s.len() != 3 || s[0] != 1 || s[1] != s[2] {
            return Err(Error::invalid(format!(
                "signal patch must be 1xPxP, got {s:?}"
            )));
        }
        if self.image_side == 0 || s[1] > self.image_side {
            return Err(Error::invalid(format!(
                "patch side {} does not fit image side {}",
                s[1], self.image_side
            )));
        }
        if !(self.noise_std >= 0.0 && self.noise_std.is_finite()) {
            return Err(Error::invalid("noise_std must be >= 0"));
        }
        if self.samples_per_class == 0 {
            return Err(Error::invalid("samples_per_class must be >= 1"));
        }
        Ok(())
    }
}

/// Top-left `(row, col)` of the planted patch, `None` for class 0.
pub type PatchOrigin = Option<(usize, usize)>;

pub fn synthetic_dataset<R: Rng + ?Sized>(spec: &SyntheticSpec, rng: &mut R) -> Result<Dataset> {
    synthetic_dataset_with_origins(spec, rng).map(|(d, _)| d)
}

/// Like [`synthetic_dataset`], also returning each class-1 image's patch
/// origin `(row, col)` (`None` for class 0).
///
/// Samples alternate between class 0 and class 1. Per image the generator
/// draws the noise field row-major, then (class 1 only) the row and column
/// jitter.
pub fn synthetic_dataset_with_origins<R: Rng + ?Sized>(
    spec: &SyntheticSpec,
    rng: &mut R,
) -> Result<(Dataset, Vec<PatchOrigin>)> {
    spec.validate()?;
    let side = spec.image_side;
    let p = spec.patch_side();
    let centre = spec.centre_origin() as i64;
    let max_origin = (side - p) as i64;
    let jitter = spec.patch_jitter as i64;

    let n = 2 * spec.samples_per_class;
    let mut images = Vec::with_capacity(n);
    let mut labels = Vec::with_capacity(n);
    let mut origins = Vec::with_capacity(n);
    for s in 0..n {
        let class = s % 2;
        let mut px = vec![0.0; side * side];
        if spec.noise_std > 0.0 {
            let mut i = 0;
            while i < px.len() {
                let (a, b) = normal_pair(rng);
                px[i] = a * spec.noise_std;
                if i + 1 < px.len() {
                    px[i + 1] = b * spec.noise_std;
                }
                i += 2;
            }
        }
        let origin = if class == 1 {
            let mut pick = || {
                let off = if jitter > 0 {
                    rng.random_range(-jitter..=jitter)
                } else {
                    0
                };
                (centre + off).clamp(0, max_origin) as usize
            };
            let (oy, ox) = (pick(), pick());
            for y in 0..p {
                for x in 0..p {
                    px[(oy + y) * side + ox + x] += spec.signal_patch.data()[y * p + x];
                }
            }
            Some((oy, ox))
        } else {
            None
        };
        px.iter_mut().for_each(|v| *v = v.clamp(0.0, 1.0));
        images.push(Tensor::new(vec![1, side, side], px)?);
        labels.push(class);
        origins.push(origin);
    }
    Ok((Dataset::new(images, labels, 2)?, origins))
}
