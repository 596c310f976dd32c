use super::{Matrix, Scalar};
use crate::error::{Error, Result};

/// Column residuals below this fraction of `‖M‖_F` count as rank-deficient.
const RANK_TOL: f64 = 1e-14;

/// Thin QR factorization `M = Q·R` with an orthonormal `Q` and an upper
/// triangular `R` whose diagonal is real and nonnegative.
#[derive(Clone, Debug)]
pub struct ThinQr<T> {
    pub q: Matrix<T>,
    pub r: Matrix<T>,
    /// Columns of `Q` that were filled in by the completion rule because the
    /// corresponding column of `M` had no residual left.
    pub completions: usize,
}

struct Reflector<T> {
    // acts on rows start.., H = I - 2 v vᴴ with ‖v‖ = 1
    start: usize,
    v: Vec<T>,
}

impl<T: Scalar> Reflector<T> {
    /// Reflector sending `x` to `alpha·e₀`, with `alpha = -phase(x₀)·‖x‖`.
    fn annihilating(start: usize, x: &[T]) -> (Self, T) {
        let norm = x.iter().map(|v| v.abs_sqr()).sum::<f64>().sqrt();
        let alpha = -x[0].phase() * T::from_real(norm);
        let mut v = x.to_vec();
        v[0] -= alpha;
        let vnorm = v.iter().map(|e| e.abs_sqr()).sum::<f64>().sqrt();
        if vnorm == 0.0 {
            // x = 0: identity reflector
            return (Self { start, v: Vec::new() }, alpha);
        }
        let inv = T::from_real(1.0 / vnorm);
        v.iter_mut().for_each(|e| *e *= inv);
        (Self { start, v }, alpha)
    }

    fn apply_to_vec(&self, w: &mut [T]) {
        if self.v.is_empty() {
            return;
        }
        let tail = &mut w[self.start..];
        let dot = self
            .v
            .iter()
            .zip(tail.iter())
            .fold(T::zero(), |acc, (&vi, &wi)| acc + vi.conj() * wi);
        let two_dot = dot + dot;
        for (wi, &vi) in tail.iter_mut().zip(&self.v) {
            *wi -= vi * two_dot;
        }
    }

    fn apply_to_columns(&self, m: &mut Matrix<T>, first_col: usize) {
        if self.v.is_empty() {
            return;
        }
        for j in first_col..m.cols() {
            let mut col = m.column(j);
            self.apply_to_vec(&mut col);
            m.set_column(j, &col);
        }
    }
}

/// Householder thin QR of an `n×r` matrix with `n ≥ r`.
///
/// The diagonal of `R` is made nonnegative by rotating the phase of each `Q`
/// column. When a column has (numerically) no component outside the span of
/// the previous ones, its `R` diagonal is set to zero and the `Q` column is the
/// canonical basis vector with the largest residual, orthogonalized against the
/// earlier `Q` columns.
pub fn qr_thin<T: Scalar>(m: &Matrix<T>) -> Result<ThinQr<T>> {
    let (n, r) = m.shape();
    if n < r {
        return Err(Error::Shape(format!("thin QR needs rows >= cols, got {n}x{r}")));
    }
    m.check_finite()?;
    let tol = RANK_TOL * m.frobenius_norm();
    let mut work = m.clone();
    let mut reflectors: Vec<Reflector<T>> = Vec::with_capacity(r);
    // phase applied to each Q column after the fact
    let mut phases = vec![T::one(); r];
    let mut deficient = vec![false; r];

    for j in 0..r {
        let x: Vec<T> = (j..n).map(|i| work[(i, j)]).collect();
        let resid = x.iter().map(|v| v.abs_sqr()).sum::<f64>().sqrt();
        if resid <= tol {
            deficient[j] = true;
            let w = completion_residual(&reflectors, n, j);
            let (h, alpha) = Reflector::annihilating(j, &w);
            // H e_j = w / alpha, so Q_j · phase(alpha) is the orthogonalized e_p
            phases[j] = alpha.phase();
            h.apply_to_columns(&mut work, j);
            reflectors.push(h);
        } else {
            let (h, alpha) = Reflector::annihilating(j, &x);
            h.apply_to_columns(&mut work, j);
            work[(j, j)] = alpha;
            for i in j + 1..n {
                work[(i, j)] = T::zero();
            }
            phases[j] = alpha.phase();
            reflectors.push(h);
        }
    }

    let mut q = Matrix::zeros(n, r);
    for j in 0..r {
        let mut e = vec![T::zero(); n];
        e[j] = T::one();
        for h in reflectors.iter().rev() {
            h.apply_to_vec(&mut e);
        }
        let p = phases[j];
        e.iter_mut().for_each(|v| *v *= p);
        q.set_column(j, &e);
    }

    let mut rfac = Matrix::zeros(r, r);
    for i in 0..r {
        let pc = phases[i].conj();
        for k in i..r {
            rfac[(i, k)] = work[(i, k)] * pc;
        }
        if deficient[i] {
            rfac[(i, i)] = T::zero();
        } else {
            // exact zero imaginary part on the diagonal
            rfac[(i, i)] = T::from_real(rfac[(i, i)].abs());
        }
    }

    Ok(ThinQr {
        q,
        r: rfac,
        completions: deficient.iter().filter(|&&d| d).count(),
    })
}

/// Residual, in the reflected coordinates rows `j..`, of the canonical basis
/// vector that is least contained in the span of the first `j` Q columns.
fn completion_residual<T: Scalar>(reflectors: &[Reflector<T>], n: usize, j: usize) -> Vec<T> {
    let mut best: Option<(f64, Vec<T>)> = None;
    for p in 0..n {
        let mut e = vec![T::zero(); n];
        e[p] = T::one();
        // Qᴴ e_p = H_{j-1} ... H_0 e_p
        for h in reflectors {
            h.apply_to_vec(&mut e);
        }
        let tail = e[j..].to_vec();
        let norm = tail.iter().map(|v| v.abs_sqr()).sum::<f64>();
        if best.as_ref().is_none_or(|(b, _)| norm > *b + 1e-12) {
            best = Some((norm, tail));
        }
    }
    best.map(|(_, w)| w).expect("n >= 1")
}
