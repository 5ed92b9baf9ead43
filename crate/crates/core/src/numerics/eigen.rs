use super::matrix::Matrix;
use crate::error::{Error, Result};

const MAX_SWEEPS: usize = 100;

/// Eigenpairs of a symmetric matrix.
///
/// `values` are sorted in descending order (stable, so exact ties keep the
/// lower diagonal index first). Column `j` of `vectors` is the unit
/// eigenvector for `values[j]`, sign-normalized so that its largest-magnitude
/// component is positive (earliest index on ties).
#[derive(Debug, Clone)]
pub struct SymmetricEigen {
    pub values: Vec<f64>,
    pub vectors: Matrix,
}

impl SymmetricEigen {
    pub fn vector(&self, j: usize) -> Vec<f64> {
        self.vectors.column(j)
    }
}

pub(crate) fn check_symmetric(s: &Matrix, what: &str) -> Result<()> {
    if !s.is_square() {
        return Err(Error::invalid(format!(
            "{what}: matrix is {}x{}, expected square",
            s.rows(),
            s.cols()
        )));
    }
    let tol = 1e-10 * s.max_abs().max(1.0);
    let n = s.rows();
    for i in 0..n {
        for j in i + 1..n {
            if (s[(i, j)] - s[(j, i)]).abs() > tol {
                return Err(Error::invalid(format!(
                    "{what}: matrix is not symmetric at ({i}, {j})"
                )));
            }
        }
    }
    Ok(())
}

/// Cyclic Jacobi eigendecomposition of a symmetric matrix.
pub fn sym_eigendecomposition(s: &Matrix) -> Result<SymmetricEigen> {
    check_symmetric(s, "eigendecomposition")?;
    let n = s.rows();
    let mut a = s.clone();
    // symmetrize exactly so the rotations see one consistent matrix
    for i in 0..n {
        for j in i + 1..n {
            let v = 0.5 * (a[(i, j)] + a[(j, i)]);
            a[(i, j)] = v;
            a[(j, i)] = v;
        }
    }
    let mut v = Matrix::identity(n);
    let scale = a.frobenius_norm();

    let mut converged = n == 1 || scale == 0.0;
    let mut sweep = 0;
    while !converged {
        if sweep == MAX_SWEEPS {
            return Err(Error::NumericalFailure(format!(
                "Jacobi eigendecomposition did not converge in {MAX_SWEEPS} sweeps"
            )));
        }
        sweep += 1;
        for p in 0..n - 1 {
            for q in p + 1..n {
                let apq = a[(p, q)];
                if apq == 0.0 {
                    continue;
                }
                let app = a[(p, p)];
                let aqq = a[(q, q)];
                if sweep > 4 && apq.abs() <= 1e-18 * (app.abs() + aqq.abs()) {
                    a[(p, q)] = 0.0;
                    a[(q, p)] = 0.0;
                    continue;
                }
                rotate(&mut a, &mut v, p, q);
            }
        }
        let off: f64 = (0..n)
            .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| a[(i, j)] * a[(i, j)])
            .sum();
        converged = off.sqrt() <= 1e-15 * scale;
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| {
        a[(j, j)]
            .partial_cmp(&a[(i, i)])
            .expect("finite eigenvalues")
    });

    let values: Vec<f64> = order.iter().map(|&i| a[(i, i)]).collect();
    let mut vectors = Matrix::zeros(n, n);
    for (dst, &src) in order.iter().enumerate() {
        let mut col = v.column(src);
        normalize_sign(&mut col);
        for (r, x) in col.into_iter().enumerate() {
            vectors[(r, dst)] = x;
        }
    }
    Ok(SymmetricEigen { values, vectors })
}

/// Annihilate `a[p][q]` with a plane rotation and accumulate it into `v`.
fn rotate(a: &mut Matrix, v: &mut Matrix, p: usize, q: usize) {
    let n = a.rows();
    let apq = a[(p, q)];
    let theta = (a[(q, q)] - a[(p, p)]) / (2.0 * apq);
    let t = if theta.abs() > 1e150 {
        0.5 / theta
    } else {
        theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt())
    };
    let c = 1.0 / (t * t + 1.0).sqrt();
    let s = t * c;

    for k in 0..n {
        let akp = a[(k, p)];
        let akq = a[(k, q)];
        a[(k, p)] = c * akp - s * akq;
        a[(k, q)] = s * akp + c * akq;
    }
    for k in 0..n {
        let apk = a[(p, k)];
        let aqk = a[(q, k)];
        a[(p, k)] = c * apk - s * aqk;
        a[(q, k)] = s * apk + c * aqk;
    }
    a[(p, q)] = 0.0;
    a[(q, p)] = 0.0;

    for k in 0..n {
        let vkp = v[(k, p)];
        let vkq = v[(k, q)];
        v[(k, p)] = c * vkp - s * vkq;
        v[(k, q)] = s * vkp + c * vkq;
    }
}

/// Flip `v` so that its largest-magnitude entry (first on ties) is positive.
pub fn normalize_sign(v: &mut [f64]) {
    let mut best = 0;
    for (i, x) in v.iter().enumerate() {
        if x.abs() > v[best].abs() {
            best = i;
        }
    }
    if v[best] < 0.0 {
        v.iter_mut().for_each(|x| *x = -*x);
    }
}
