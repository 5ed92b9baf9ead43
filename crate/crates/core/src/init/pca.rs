use super::blocks::extract_blocks;
use super::filters::FilterBank;
use crate::error::{Error, Result};
use crate::numerics::{mean_vector, sym_eigendecomposition, Matrix, Tensor};

/// Block-PCA filters.
///
/// For every channel and every stride-1 `m × m` block position the `N × mm`
/// matrix of that block across all images is formed and the eigenvectors of
/// its scatter `UᵀU` are taken (uncentered unless `center` is set). The
/// sign-normalized eigenvector matrices are averaged over block positions and
/// then over channels, the first `n_k` averaged columns are re-orthonormalized
/// by modified Gram–Schmidt in eigen order, and each becomes one filter,
/// replicated across input channels with weight `1 / c_in`.
pub fn pca_init(
    images: &[Tensor],
    n_k: usize,
    m: usize,
    c_in: usize,
    center: bool,
) -> Result<FilterBank> {
    let mm = m * m;
    if n_k == 0 || n_k > mm {
        return Err(Error::invalid(format!(
            "PCA init can produce at most {mm} filters of size {m}x{m}, asked for {n_k}"
        )));
    }
    let first = images
        .first()
        .ok_or_else(|| Error::invalid("PCA init needs at least one image"))?;
    let shape = first.shape().to_vec();
    if shape.len() != 3 || shape[0] != c_in {
        return Err(Error::invalid(format!(
            "expected {c_in}xHxW images, got {shape:?}"
        )));
    }
    if let Some(bad) = images.iter().find(|im| im.shape() != shape.as_slice()) {
        return Err(Error::invalid(format!(
            "images must share one shape, found {:?} and {shape:?}",
            bad.shape()
        )));
    }
    let (h, w) = (shape[1], shape[2]);
    if m == 0 || m > h || m > w {
        return Err(Error::invalid(format!(
            "block {m}x{m} does not fit {h}x{w} images"
        )));
    }
    let positions = (h - m + 1) * (w - m + 1);

    let mut averaged = Matrix::zeros(mm, mm);
    for ch in 0..c_in {
        // blocks[i] holds every block of image i for this channel, raster order
        let blocks = images
            .iter()
            .map(|im| extract_blocks(im, m, ch))
            .collect::<Result<Vec<_>>>()?;
        let mut channel_sum = Matrix::zeros(mm, mm);
        for pos in 0..positions {
            let rows: Vec<f64> = blocks
                .iter()
                .flat_map(|b| b.row(pos).iter().copied())
                .collect();
            let u = Matrix::new(images.len(), mm, rows)?;
            let scatter = scatter_matrix(&u, center);
            let eig = sym_eigendecomposition(&scatter)?;
            for (acc, v) in channel_sum.data_mut().iter_mut().zip(eig.vectors.data()) {
                *acc += v;
            }
        }
        let scale = 1.0 / (positions * c_in) as f64;
        for (acc, v) in averaged.data_mut().iter_mut().zip(channel_sum.data()) {
            *acc += v * scale;
        }
    }

    let basis = modified_gram_schmidt(&averaged, n_k)?;
    let mut filters = Matrix::zeros(n_k, c_in * mm);
    let inv_c = 1.0 / c_in as f64;
    for (j, e) in basis.iter().enumerate() {
        let row = filters.row_mut(j);
        for ch in 0..c_in {
            for (dst, &v) in row[ch * mm..(ch + 1) * mm].iter_mut().zip(e) {
                *dst = v * inv_c;
            }
        }
    }
    Ok(FilterBank { filters })
}

/// `UᵀU`, optionally after subtracting the column means of `U`.
fn scatter_matrix(u: &Matrix, center: bool) -> Matrix {
    let d = u.cols();
    let mean = if center { mean_vector(u) } else { vec![0.0; d] };
    let mut s = Matrix::zeros(d, d);
    let mut row = vec![0.0; d];
    for r in u.iter_rows() {
        for ((dst, &x), &m) in row.iter_mut().zip(r).zip(&mean) {
            *dst = x - m;
        }
        for j in 0..d {
            for k in j..d {
                s[(j, k)] += row[j] * row[k];
            }
        }
    }
    for j in 0..d {
        for k in 0..j {
            s[(j, k)] = s[(k, j)];
        }
    }
    s
}

/// Orthonormalize the first `count` columns of `a`, in column order.
fn modified_gram_schmidt(a: &Matrix, count: usize) -> Result<Vec<Vec<f64>>> {
    let mut basis: Vec<Vec<f64>> = Vec::with_capacity(count);
    for j in 0..count {
        let mut v = a.column(j);
        for q in &basis {
            let dot: f64 = v.iter().zip(q).map(|(x, y)| x * y).sum();
            v.iter_mut().zip(q).for_each(|(x, y)| *x -= dot * y);
        }
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm < 1e-12 {
            return Err(Error::DegenerateInput(format!(
                "averaged eigenvector {j} vanishes after orthogonalization (norm {norm:e})"
            )));
        }
        v.iter_mut().for_each(|x| *x /= norm);
        basis.push(v);
    }
    Ok(basis)
}
