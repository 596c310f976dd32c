use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::discretize::{fourier_mode, VDiscretization};
use crate::error::{Error, Result};
use crate::matcore::{qr_thin, sym_eig, Matrix, Scalar};

/// Orthonormality tolerance checked on construction.
pub const ORTHO_TOL: f64 = 1e-10;

/// Factored rank-`r` state `U = X·S·Vᴴ`.
#[derive(Clone, Debug, PartialEq)]
pub struct LowRankState<T: Scalar = f64> {
    pub x: Matrix<T>,
    pub s: Matrix<T>,
    pub v: Matrix<T>,
}

impl<T: Scalar> LowRankState<T> {
    pub fn new(x: Matrix<T>, s: Matrix<T>, v: Matrix<T>) -> Result<Self> {
        let r = s.rows();
        if !s.is_square() || x.cols() != r || v.cols() != r {
            return Err(Error::Shape(format!(
                "factors {}x{}, {}x{}, {}x{} do not form a rank-r triple",
                x.rows(),
                x.cols(),
                s.rows(),
                s.cols(),
                v.rows(),
                v.cols()
            )));
        }
        if x.rows() < r || v.rows() < r {
            return Err(Error::Shape(format!("rank {r} exceeds a factor dimension")));
        }
        let state = Self { x, s, v };
        let defect = state.ortho_residual();
        if defect > ORTHO_TOL {
            return Err(Error::Input(format!(
                "factors are not orthonormal (defect {defect:e})"
            )));
        }
        Ok(state)
    }

    pub fn rank(&self) -> usize {
        self.s.rows()
    }

    pub fn reconstruct(&self) -> Matrix<T> {
        &(&self.x * &self.s) * &self.v.adjoint()
    }

    /// `max(‖XᴴX − I‖_F, ‖VᴴV − I‖_F)`.
    pub fn ortho_residual(&self) -> f64 {
        self.x
            .orthonormality_defect()
            .max(self.v.orthonormality_defect())
    }

    /// `‖U‖_F`, which equals `‖S‖_F` for orthonormal factors.
    pub fn frobenius_norm(&self) -> f64 {
        self.reconstruct().frobenius_norm()
    }
}

/// Either a full `N_x×N_v` matrix or a factored one.
#[derive(Clone, Debug, PartialEq)]
pub enum State<T: Scalar = f64> {
    Full(Matrix<T>),
    LowRank(LowRankState<T>),
}

impl<T: Scalar> State<T> {
    pub fn reconstruct(&self) -> Matrix<T> {
        match self {
            State::Full(u) => u.clone(),
            State::LowRank(s) => s.reconstruct(),
        }
    }

    pub fn frobenius_norm(&self) -> f64 {
        match self {
            State::Full(u) => u.frobenius_norm(),
            State::LowRank(s) => s.frobenius_norm(),
        }
    }

    /// Orthonormality defect of the factors, zero for full states.
    pub fn ortho_residual(&self) -> f64 {
        match self {
            State::Full(_) => 0.0,
            State::LowRank(s) => s.ortho_residual(),
        }
    }

    /// Fails on the first non-finite entry; low-rank states are checked factor by factor.
    pub fn check_finite(&self) -> Result<()> {
        match self {
            State::Full(u) => u.check_finite(),
            State::LowRank(s) => {
                s.x.check_finite()?;
                s.s.check_finite()?;
                s.v.check_finite()
            }
        }
    }
}

#[derive(Clone, Debug)]
pub struct StepReport<T: Scalar = f64> {
    pub state: State<T>,
    pub frobenius_before: f64,
    pub frobenius_after: f64,
    /// QR columns filled in by the rank-completion rule during this step.
    pub qr_rank_events: usize,
}

/// Rank-`r` factorization of `U0`.
///
/// `V` holds the leading eigenvectors of `U0ᵀU0` and `X·S` is the QR of
/// `U0·V`, so the result is exact whenever `rank(U0) ≤ r`.
pub fn init_lowrank(u0: &Matrix<f64>, r: usize) -> Result<LowRankState<f64>> {
    let (n_x, n_v) = u0.shape();
    if r == 0 || r > n_x.min(n_v) {
        return Err(Error::Input(format!(
            "rank {r} must lie in 1..={}",
            n_x.min(n_v)
        )));
    }
    let gram = u0.adjoint_mul(u0);
    let eig = sym_eig(&gram)?;
    let v = Matrix::from_fn(n_v, r, |i, j| eig.eigenvectors[(i, j)]);
    let qr = qr_thin(&(u0 * &v))?;
    LowRankState::new(qr.q, qr.r, v)
}

/// Random rank-`r` state: standard normal factors, orthonormalized by QR.
pub fn random_lowrank(n_x: usize, n_v: usize, r: usize, seed: u64) -> Result<LowRankState<f64>> {
    if r == 0 || r > n_x.min(n_v) {
        return Err(Error::Input(format!(
            "rank {r} must lie in 1..={}",
            n_x.min(n_v)
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut normal = |rows: usize, cols: usize| {
        Matrix::from_fn(rows, cols, |_, _| StandardNormal.sample(&mut rng))
    };
    let x = qr_thin(&normal(n_x, r))?.q;
    let s = normal(r, r);
    let v = qr_thin(&normal(n_v, r))?.q;
    LowRankState::new(x, s, v)
}

/// Rank-1 complex state `x_m v_kᵀ` with `X = x_m/√N_x`.
pub fn mode_state(m: usize, k: usize, n_x: usize, vdisc: &VDiscretization) -> Result<LowRankState<Complex64>> {
    if k >= vdisc.size() {
        return Err(Error::Input(format!(
            "eigenvector index {k} out of range for N_v = {}",
            vdisc.size()
        )));
    }
    let root = (n_x as f64).sqrt();
    let x = fourier_mode(m, n_x)?.scale_real(1.0 / root);
    let v = Matrix::column_vector(&vdisc.eigenvector(k)).lift();
    LowRankState::new(x, Matrix::diag(&[Complex64::new(root, 0.0)]), v)
}
