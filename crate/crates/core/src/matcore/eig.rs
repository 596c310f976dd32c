use super::Matrix;
use crate::error::{Error, Result};

const OFF_DIAG_TOL: f64 = 1e-14;
const MAX_SWEEPS: usize = 100;

/// Eigendecomposition `A = R·diag(Λ)·Rᵀ` of a real symmetric matrix, with the
/// eigenvalues in descending order and eigenvectors stored as columns of `R`.
#[derive(Clone, Debug, PartialEq)]
pub struct SpectralDecomposition {
    pub eigenvectors: Matrix<f64>,
    pub eigenvalues: Vec<f64>,
}

impl SpectralDecomposition {
    pub fn dim(&self) -> usize {
        self.eigenvalues.len()
    }

    /// `R·diag(f(λ))·Rᵀ`.
    pub fn apply_fn(&self, f: impl Fn(f64) -> f64) -> Matrix<f64> {
        let n = self.dim();
        let r = &self.eigenvectors;
        let mut out = Matrix::zeros(n, n);
        for k in 0..n {
            let fk = f(self.eigenvalues[k]);
            if fk == 0.0 {
                continue;
            }
            for i in 0..n {
                let rik = r[(i, k)] * fk;
                for j in 0..n {
                    out[(i, j)] += rik * r[(j, k)];
                }
            }
        }
        symmetrize(&out)
    }

    pub fn reconstruct(&self) -> Matrix<f64> {
        self.apply_fn(|l| l)
    }

    pub fn eigenvector(&self, k: usize) -> Vec<f64> {
        self.eigenvectors.column(k)
    }
}

fn symmetrize(a: &Matrix<f64>) -> Matrix<f64> {
    Matrix::from_fn(a.rows(), a.cols(), |i, j| 0.5 * (a[(i, j)] + a[(j, i)]))
}

/// Cyclic Jacobi eigensolver applied to `(A + Aᵀ)/2`.
pub fn sym_eig(a: &Matrix<f64>) -> Result<SpectralDecomposition> {
    if !a.is_square() {
        return Err(Error::Shape(format!(
            "eigendecomposition needs a square matrix, got {}x{}",
            a.rows(),
            a.cols()
        )));
    }
    let n = a.rows();
    let mut m = symmetrize(a);
    let mut v = Matrix::<f64>::identity(n);
    let scale = m.frobenius_norm();

    for _ in 0..MAX_SWEEPS {
        if off_diagonal_norm(&m) <= OFF_DIAG_TOL * scale {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                let apq = m[(p, q)];
                if apq == 0.0 {
                    continue;
                }
                let (c, s) = jacobi_rotation(m[(p, p)], apq, m[(q, q)]);
                rotate(&mut m, &mut v, p, q, c, s);
            }
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| m[(j, j)].total_cmp(&m[(i, i)]));
    let eigenvalues = order.iter().map(|&k| m[(k, k)]).collect();
    let mut eigenvectors = Matrix::zeros(n, n);
    for (dst, &src) in order.iter().enumerate() {
        let mut col = v.column(src);
        // deterministic orientation: largest component positive
        let lead = col
            .iter()
            .copied()
            .fold(0.0_f64, |best, x| if x.abs() > best.abs() + 1e-12 { x } else { best });
        if lead < 0.0 {
            col.iter_mut().for_each(|x| *x = -*x);
        }
        eigenvectors.set_column(dst, &col);
    }
    Ok(SpectralDecomposition {
        eigenvectors,
        eigenvalues,
    })
}

fn off_diagonal_norm(m: &Matrix<f64>) -> f64 {
    let n = m.rows();
    let mut sum = 0.0;
    for i in 0..n {
        for j in 0..n {
            if i != j {
                sum += m[(i, j)] * m[(i, j)];
            }
        }
    }
    sum.sqrt()
}

/// Cosine and sine zeroing the (p, q) entry of a symmetric 2×2 block.
fn jacobi_rotation(app: f64, apq: f64, aqq: f64) -> (f64, f64) {
    let tau = (aqq - app) / (2.0 * apq);
    let t = if tau >= 0.0 {
        1.0 / (tau + (1.0 + tau * tau).sqrt())
    } else {
        -1.0 / (-tau + (1.0 + tau * tau).sqrt())
    };
    let c = 1.0 / (1.0 + t * t).sqrt();
    (c, t * c)
}

fn rotate(m: &mut Matrix<f64>, v: &mut Matrix<f64>, p: usize, q: usize, c: f64, s: f64) {
    let n = m.rows();
    for k in 0..n {
        let mkp = m[(k, p)];
        let mkq = m[(k, q)];
        m[(k, p)] = c * mkp - s * mkq;
        m[(k, q)] = s * mkp + c * mkq;
    }
    for k in 0..n {
        let mpk = m[(p, k)];
        let mqk = m[(q, k)];
        m[(p, k)] = c * mpk - s * mqk;
        m[(q, k)] = s * mpk + c * mqk;
    }
    m[(p, q)] = 0.0;
    m[(q, p)] = 0.0;
    for k in 0..n {
        let vkp = v[(k, p)];
        let vkq = v[(k, q)];
        v[(k, p)] = c * vkp - s * vkq;
        v[(k, q)] = s * vkp + c * vkq;
    }
}

/// `|A| = R·|Λ|·Rᵀ`.
pub fn matrix_abs(a: &Matrix<f64>) -> Result<Matrix<f64>> {
    Ok(sym_eig(a)?.apply_fn(f64::abs))
}
