use super::eigen::check_symmetric;
use super::matrix::Matrix;
use crate::error::{Error, Result};

/// Lower-triangular `L` with `L Lᵀ = A + εI`.
///
/// Zero pivots (within rounding of the matrix scale) are accepted and give a
/// zero column, so singular positive-semidefinite input still factors.
/// A clearly negative pivot is a numerical failure.
pub fn cholesky(a: &Matrix, epsilon: f64) -> Result<Matrix> {
    if !(epsilon >= 0.0 && epsilon.is_finite()) {
        return Err(Error::invalid(format!(
            "epsilon must be >= 0, got {epsilon}"
        )));
    }
    check_symmetric(a, "cholesky")?;
    let n = a.rows();
    let tol = 1e-13 * (a.max_abs() + epsilon);
    let mut l = Matrix::zeros(n, n);
    for j in 0..n {
        let mut pivot = a[(j, j)] + epsilon;
        pivot -= l.row(j)[..j].iter().map(|x| x * x).sum::<f64>();
        if pivot < -tol {
            return Err(Error::NumericalFailure(format!(
                "matrix is not positive semidefinite: pivot {j} is {pivot:e}"
            )));
        }
        if pivot <= tol {
            continue;
        }
        let diag = pivot.sqrt();
        l[(j, j)] = diag;
        for i in j + 1..n {
            let dot: f64 = l.row(i)[..j]
                .iter()
                .zip(&l.row(j)[..j])
                .map(|(x, y)| x * y)
                .sum();
            l[(i, j)] = (a[(i, j)] - dot) / diag;
        }
    }
    Ok(l)
}
