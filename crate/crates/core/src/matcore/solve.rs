use super::{Matrix, Scalar};
use crate::error::{Error, Result};

/// Pivot ratio beyond which a system is reported as singular.
const MAX_PIVOT_RATIO: f64 = 1e12;

/// Solves `A·X = B` by LU factorization with partial pivoting.
///
/// The system is rejected when the smallest pivot is zero or more than
/// `1e12` times smaller than the largest one; the error carries the smallest
/// pivot magnitude.
pub fn solve_dense<T: Scalar>(a: &Matrix<T>, b: &Matrix<T>) -> Result<Matrix<T>> {
    if !a.is_square() {
        return Err(Error::Shape(format!(
            "solve needs a square matrix, got {}x{}",
            a.rows(),
            a.cols()
        )));
    }
    if b.rows() != a.rows() {
        return Err(Error::Shape(format!(
            "right-hand side has {} rows, expected {}",
            b.rows(),
            a.rows()
        )));
    }
    let n = a.rows();
    let mut lu = a.clone();
    let mut x = b.clone();
    let mut min_pivot = f64::INFINITY;
    let mut max_pivot = 0.0_f64;

    for k in 0..n {
        let (p, pmag) = (k..n)
            .map(|i| (i, lu[(i, k)].abs()))
            .fold((k, -1.0), |best, cur| if cur.1 > best.1 { cur } else { best });
        min_pivot = min_pivot.min(pmag);
        max_pivot = max_pivot.max(pmag);
        if pmag == 0.0 || !pmag.is_finite() {
            return Err(Error::Singular { pivot: pmag });
        }
        if p != k {
            swap_rows(&mut lu, p, k);
            swap_rows(&mut x, p, k);
        }
        let pivot = lu[(k, k)];
        for i in k + 1..n {
            let f = lu[(i, k)] / pivot;
            if f == T::zero() {
                continue;
            }
            lu[(i, k)] = f;
            for j in k + 1..n {
                let u = lu[(k, j)];
                lu[(i, j)] -= f * u;
            }
            for j in 0..x.cols() {
                let u = x[(k, j)];
                x[(i, j)] -= f * u;
            }
        }
    }
    if min_pivot * MAX_PIVOT_RATIO < max_pivot {
        return Err(Error::Singular { pivot: min_pivot });
    }

    for k in (0..n).rev() {
        let pivot = lu[(k, k)];
        for j in 0..x.cols() {
            let mut acc = x[(k, j)];
            for i in k + 1..n {
                acc -= lu[(k, i)] * x[(i, j)];
            }
            x[(k, j)] = acc / pivot;
        }
    }
    Ok(x)
}

fn swap_rows<T: Scalar>(m: &mut Matrix<T>, a: usize, b: usize) {
    for j in 0..m.cols() {
        let tmp = m[(a, j)];
        m[(a, j)] = m[(b, j)];
        m[(b, j)] = tmp;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identity_solve() {
        let b = Matrix::from_rows(&[vec![1.0, -2.0], vec![3.5, 0.25]]).unwrap();
        assert_eq!(solve_dense(&Matrix::identity(2), &b).unwrap(), b);
    }

    #[test]
    fn diagonal_solve() {
        let x = solve_dense(&Matrix::diag(&[2.0, 4.0]), &Matrix::column_vector(&[2.0, 4.0])).unwrap();
        assert_eq!(x, Matrix::column_vector(&[1.0, 1.0]));
    }

    #[test]
    fn singular_matrix_reports_pivot() {
        let a = Matrix::from_rows(&[vec![1.0, 2.0], vec![2.0, 4.0]]).unwrap();
        match solve_dense(&a, &Matrix::column_vector(&[1.0, 1.0])) {
            Err(Error::Singular { pivot }) => assert!(pivot < 1e-12),
            other => panic!("expected singular error, got {other:?}"),
        }
    }

    #[test]
    fn needs_pivoting() {
        let a = Matrix::from_rows(&[vec![0.0, 1.0], vec![1.0, 0.0]]).unwrap();
        let x = solve_dense(&a, &Matrix::column_vector(&[3.0, 5.0])).unwrap();
        assert_eq!(x, Matrix::column_vector(&[5.0, 3.0]));
    }

    #[test]
    fn shape_errors() {
        assert!(solve_dense(&Matrix::<f64>::zeros(2, 3), &Matrix::zeros(2, 1)).is_err());
        assert!(solve_dense(&Matrix::<f64>::identity(2), &Matrix::zeros(3, 1)).is_err());
    }
}
