//! Velocity discretization, periodic difference matrices and Fourier-mode
//! bookkeeping.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::matcore::{matrix_abs, sym_eig, CMatrix, Matrix, SpectralDecomposition};

/// Eigenvalues in `[-NEG_CLAMP, 0)` are treated as zero for diffusion problems.
const NEG_CLAMP: f64 = 1e-12;

/// Named coefficient `a(v)` usable from configuration files and the CLI.
///
/// Grammar: `const:<c>`, `linear`, `abs`, `square`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Coefficient {
    Const(f64),
    Linear,
    Abs,
    Square,
}

impl Coefficient {
    pub fn eval(&self, v: f64) -> f64 {
        match *self {
            Coefficient::Const(c) => c,
            Coefficient::Linear => v,
            Coefficient::Abs => v.abs(),
            Coefficient::Square => v * v,
        }
    }
}

impl FromStr for Coefficient {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let (name, param) = match s.split_once(':') {
            Some((n, p)) => (n, Some(p)),
            None => (s, None),
        };
        let no_param = |c: Coefficient| match param {
            None => Ok(c),
            Some(_) => Err(Error::Input(format!("coefficient `{name}` takes no parameter"))),
        };
        match name {
            "const" => {
                let p = param.ok_or_else(|| Error::Input("`const` needs a value, e.g. const:1".into()))?;
                let c: f64 = p
                    .parse()
                    .map_err(|_| Error::Input(format!("bad constant `{p}`")))?;
                if !c.is_finite() {
                    return Err(Error::Input(format!("bad constant `{p}`")));
                }
                Ok(Coefficient::Const(c))
            }
            "linear" => no_param(Coefficient::Linear),
            "abs" => no_param(Coefficient::Abs),
            "square" => no_param(Coefficient::Square),
            _ => Err(Error::Input(format!("unknown coefficient `{s}`"))),
        }
    }
}

impl fmt::Display for Coefficient {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Coefficient::Const(c) => write!(f, "const:{c}"),
            Coefficient::Linear => f.write_str("linear"),
            Coefficient::Abs => f.write_str("abs"),
            Coefficient::Square => f.write_str("square"),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum VKind {
    Nodal,
    Modal,
}

/// The symmetric velocity matrix `A` and what the steppers derive from it.
#[derive(Clone, Debug)]
pub struct VDiscretization {
    pub kind: VKind,
    pub a: Matrix<f64>,
    pub abs_a: Matrix<f64>,
    pub spectrum: SpectralDecomposition,
}

impl VDiscretization {
    fn from_matrix(kind: VKind, a: Matrix<f64>) -> Result<Self> {
        let spectrum = sym_eig(&a)?;
        let abs_a = matrix_abs(&a)?;
        Ok(Self {
            kind,
            a,
            abs_a,
            spectrum,
        })
    }

    pub fn size(&self) -> usize {
        self.a.rows()
    }

    /// `max_k |λ_k|`, the speed entering the advective CFL number.
    pub fn lambda_max_abs(&self) -> f64 {
        self.spectrum.eigenvalues.iter().fold(0.0, |m, l| m.max(l.abs()))
    }

    /// `max_k λ_k`, the diffusivity entering the parabolic CFL number.
    pub fn lambda_max(&self) -> f64 {
        self.spectrum.eigenvalues[0]
    }

    /// Validates the spectrum for a diffusion problem: eigenvalues must be
    /// nonnegative, with roundoff-sized negatives clamped to zero.
    pub fn into_parabolic(mut self) -> Result<Self> {
        for l in self.spectrum.eigenvalues.iter_mut() {
            if *l < -NEG_CLAMP {
                return Err(Error::Input(format!(
                    "diffusion coefficient matrix has negative eigenvalue {l:e}"
                )));
            }
            if *l < 0.0 {
                *l = 0.0;
            }
        }
        Ok(self)
    }

    /// Eigenvector `v_k` as a column vector.
    pub fn eigenvector(&self, k: usize) -> Vec<f64> {
        self.spectrum.eigenvector(k)
    }
}

/// `A = diag(a(v_i))`.
pub fn build_nodal(a: impl Fn(f64) -> f64, points: &[f64]) -> Result<VDiscretization> {
    if points.is_empty() {
        return Err(Error::Input("no velocity points".into()));
    }
    for (i, &p) in points.iter().enumerate() {
        if points[..i].contains(&p) {
            return Err(Error::Input(format!("duplicate velocity point {p}")));
        }
    }
    let values: Vec<f64> = points.iter().map(|&v| a(v)).collect();
    if let Some(bad) = values.iter().position(|v| !v.is_finite()) {
        return Err(Error::Input(format!(
            "a(v) is not finite at v = {}",
            points[bad]
        )));
    }
    VDiscretization::from_matrix(VKind::Nodal, Matrix::diag(&values))
}

/// Cell midpoints of `n` uniform cells on `[-1, 1]`.
pub fn uniform_midpoints(n: usize) -> Vec<f64> {
    (0..n)
        .map(|i| -1.0 + (2 * i + 1) as f64 / n as f64)
        .collect()
}

/// Galerkin matrix `A_ij = ∫ a(v) φ_i(v) φ_j(v) dv` in the orthonormal
/// Legendre basis on `[-1, 1]`, integrated with an `order`-point Gauss rule.
pub fn build_modal(a: impl Fn(f64) -> f64, basis_size: usize, order: usize) -> Result<VDiscretization> {
    if basis_size == 0 {
        return Err(Error::Input("basis size must be positive".into()));
    }
    if order < 1 {
        return Err(Error::Input("quadrature order must be at least 1".into()));
    }
    let (nodes, weights) = gauss_legendre(order);
    let mut m = Matrix::zeros(basis_size, basis_size);
    for (&v, &w) in nodes.iter().zip(&weights) {
        let av = a(v);
        if !av.is_finite() {
            return Err(Error::Input(format!("a(v) is not finite at v = {v}")));
        }
        let phi = legendre_normalized(basis_size, v);
        for i in 0..basis_size {
            for j in 0..basis_size {
                m[(i, j)] += w * av * phi[i] * phi[j];
            }
        }
    }
    VDiscretization::from_matrix(VKind::Modal, m)
}

/// Default quadrature order for [`build_modal`].
pub fn default_quadrature_order(basis_size: usize) -> usize {
    2 * basis_size
}

/// Builds the discretization named by `kind` for coefficient `coef`.
pub fn build(kind: VKind, coef: Coefficient, n_v: usize, quadrature_order: Option<usize>) -> Result<VDiscretization> {
    match kind {
        VKind::Nodal => build_nodal(|v| coef.eval(v), &uniform_midpoints(n_v)),
        VKind::Modal => build_modal(
            |v| coef.eval(v),
            n_v,
            quadrature_order.unwrap_or_else(|| default_quadrature_order(n_v)),
        ),
    }
}

/// `sqrt((2n+1)/2)·P_n(v)` for `n < count`.
pub fn legendre_normalized(count: usize, v: f64) -> Vec<f64> {
    let mut p = Vec::with_capacity(count);
    let (mut prev, mut cur) = (0.0, 1.0);
    for n in 0..count {
        p.push(cur * ((2 * n + 1) as f64 / 2.0).sqrt());
        let next = ((2 * n + 1) as f64 * v * cur - n as f64 * prev) / (n + 1) as f64;
        prev = cur;
        cur = next;
    }
    p
}

/// Gauss-Legendre nodes and weights on `[-1, 1]`.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        // Tricomi initial guess then Newton on P_n
        let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre_with_derivative(n, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre_with_derivative(n, x);
        dp = if d != 0.0 { d } else { dp };
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    (nodes, weights)
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let (mut p0, mut p1) = (1.0, x);
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// Uniform periodic grid in `x` with the central-difference matrices.
///
/// `m_alpha` has stencil `(-1, 0, 1)` and `m_beta` has `(1, -2, 1)`, both
/// wrapped around the corners.
#[derive(Clone, Debug)]
pub struct XGrid {
    pub n_x: usize,
    pub dx: f64,
    pub m_alpha: Matrix<f64>,
    pub m_beta: Matrix<f64>,
}

impl XGrid {
    pub fn new(n_x: usize, dx: f64) -> Result<Self> {
        if n_x < 3 {
            return Err(Error::Input(format!("need at least 3 grid points, got {n_x}")));
        }
        if !(dx > 0.0 && dx.is_finite()) {
            return Err(Error::Input(format!("grid spacing must be positive, got {dx}")));
        }
        let m_alpha = Matrix::from_fn(n_x, n_x, |i, j| {
            if j == (i + 1) % n_x {
                1.0
            } else if j == (i + n_x - 1) % n_x {
                -1.0
            } else {
                0.0
            }
        });
        let m_beta = Matrix::from_fn(n_x, n_x, |i, j| {
            if i == j {
                -2.0
            } else if j == (i + 1) % n_x || j == (i + n_x - 1) % n_x {
                1.0
            } else {
                0.0
            }
        });
        Ok(Self {
            n_x,
            dx,
            m_alpha,
            m_beta,
        })
    }

    /// Grid on `[0, 2π)` with `Δx = 2π/N_x`.
    pub fn periodic(n_x: usize) -> Result<Self> {
        Self::new(n_x, 2.0 * PI / n_x as f64)
    }
}

/// Fourier mode `x_m` with entries `ω^{jm}`, `ω = e^{2πi/N_x}`.
pub fn fourier_mode(m: usize, n_x: usize) -> Result<CMatrix> {
    if m >= n_x {
        return Err(Error::Input(format!("mode {m} out of range for N_x = {n_x}")));
    }
    Ok(Matrix::from_fn(n_x, 1, |j, _| {
        let phase = 2.0 * PI * ((j * m) % n_x) as f64 / n_x as f64;
        Complex64::from_polar(1.0, phase)
    }))
}

/// Spectral shorthand for mode `m` on `N_x` points.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ModeCoordinates {
    pub m: usize,
    pub n_x: usize,
    pub theta: f64,
    /// `1 - cos θ`
    pub y: f64,
    /// `sin θ`
    pub z: f64,
    /// eigenvalue of `m_alpha`, `2iZ`
    pub alpha: Complex64,
    /// eigenvalue of `m_beta`, `-2Y`
    pub beta: f64,
}

pub fn mode_coords(m: usize, n_x: usize) -> Result<ModeCoordinates> {
    if m >= n_x {
        return Err(Error::Input(format!("mode {m} out of range for N_x = {n_x}")));
    }
    let theta = 2.0 * PI * m as f64 / n_x as f64;
    let half = (theta / 2.0).sin();
    let y = 2.0 * half * half;
    let z = theta.sin();
    Ok(ModeCoordinates {
        m,
        n_x,
        theta,
        y,
        z,
        alpha: Complex64::new(0.0, 2.0 * z),
        beta: -2.0 * y,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn nodal_examples() {
        let d = build_nodal(|v| v, &[-1.0, 1.0]).unwrap();
        assert_eq!(d.a, Matrix::diag(&[-1.0, 1.0]));
        assert_eq!(d.abs_a, Matrix::identity(2));

        let d = build_nodal(|_| 1.0, &[0.1, 0.5, 0.7]).unwrap();
        assert_eq!(d.a, Matrix::identity(3));

        let d = build_nodal(|v| v * v, &[-2.0, 0.0, 3.0]).unwrap();
        assert_eq!(d.a, Matrix::diag(&[4.0, 0.0, 9.0]));
        assert_eq!(d.lambda_max(), 9.0);
        assert_eq!(d.lambda_max_abs(), 9.0);
    }

    #[test]
    fn nodal_errors() {
        assert!(build_nodal(|v| 1.0 / v, &[0.0, 1.0]).is_err());
        assert!(build_nodal(|v| v, &[1.0, 1.0]).is_err());
    }

    #[test]
    fn nodal_abs_matches_entrywise() {
        let d = build_nodal(|v| v, &uniform_midpoints(6)).unwrap();
        for i in 0..6 {
            assert_eq!(d.abs_a[(i, i)], d.a[(i, i)].abs());
        }
    }

    /// Independent oracle: Jacobi matrix of the orthonormal Legendre family.
    fn legendre_jacobi(n: usize) -> Matrix<f64> {
        Matrix::from_fn(n, n, |i, j| {
            let k = i.max(j) as f64;
            if i.abs_diff(j) == 1 {
                k / (4.0 * k * k - 1.0).sqrt()
            } else {
                0.0
            }
        })
    }

    #[test]
    fn modal_examples() {
        let d = build_modal(|_| 1.0, 3, 6).unwrap();
        assert!((&d.a - &Matrix::identity(3)).max_abs() < 1e-14);

        let d = build_modal(|v| v, 2, 4).unwrap();
        assert!((d.a[(0, 1)] - 1.0 / 3f64.sqrt()).abs() < 1e-13);
        assert!((d.a[(0, 1)] - 0.577350).abs() < 1e-6);
        assert!(d.a[(0, 0)].abs() < 1e-13);

        let d = build_modal(|v| v, 4, 8).unwrap();
        assert!((&d.a - &legendre_jacobi(4)).max_abs() < 1e-13);
    }

    #[test]
    fn modal_identity_up_to_sixteen() {
        for n in 1..=16 {
            let d = build_modal(|_| 1.0, n, default_quadrature_order(n)).unwrap();
            assert!((&d.a - &Matrix::identity(n)).max_abs() < 1e-13, "n = {n}");
        }
    }

    #[test]
    fn modal_order_zero_rejected() {
        assert!(build_modal(|v| v, 3, 0).is_err());
    }

    #[test]
    fn parabolic_rejects_negative_spectrum() {
        let d = build_nodal(|v| v, &[-1.0, 1.0]).unwrap();
        assert!(d.into_parabolic().is_err());
        let d = build_modal(|v| v * v, 4, 8).unwrap().into_parabolic().unwrap();
        assert!(d.spectrum.eigenvalues.iter().all(|&l| l >= 0.0));
    }

    #[test]
    fn gauss_legendre_integrates_polynomials() {
        let (x, w) = gauss_legendre(5);
        // exact through degree 9
        let int = |k: i32| x.iter().zip(&w).map(|(x, w)| w * x.powi(k)).sum::<f64>();
        assert!((int(0) - 2.0).abs() < 1e-14);
        assert!((int(8) - 2.0 / 9.0).abs() < 1e-14);
        assert!(int(7).abs() < 1e-14);
    }

    #[test]
    fn xgrid_stencils() {
        let g = XGrid::new(4, 1.0).unwrap();
        assert_eq!(g.m_alpha.row(0), &[0.0, 1.0, 0.0, -1.0]);
        assert_eq!(g.m_beta.row(0), &[-2.0, 1.0, 0.0, 1.0]);

        let g = XGrid::new(3, 1.0).unwrap();
        for i in 0..3 {
            assert_eq!(g.m_beta.row(i).iter().sum::<f64>(), 0.0);
            assert_eq!(g.m_alpha.row(i).iter().sum::<f64>(), 0.0);
        }

        let g = XGrid::new(8, 1.0).unwrap();
        assert_eq!(g.m_alpha, -&g.m_alpha.transpose());
        assert_eq!(g.m_beta, g.m_beta.transpose());
        // circulant
        for i in 1..8 {
            for j in 0..8 {
                assert_eq!(g.m_alpha[(i, j)], g.m_alpha[(i - 1, (j + 7) % 8)]);
                assert_eq!(g.m_beta[(i, j)], g.m_beta[(i - 1, (j + 7) % 8)]);
            }
        }
    }

    #[test]
    fn xgrid_errors() {
        assert!(XGrid::new(2, 1.0).is_err());
        assert!(XGrid::new(4, 0.0).is_err());
    }

    #[test]
    fn fourier_mode_examples() {
        let x0 = fourier_mode(0, 5).unwrap();
        assert!(x0.as_slice().iter().all(|&v| v == Complex64::new(1.0, 0.0)));

        let x = fourier_mode(2, 8).unwrap();
        let expect = [
            Complex64::new(1.0, 0.0),
            Complex64::new(0.0, 1.0),
            Complex64::new(-1.0, 0.0),
            Complex64::new(0.0, -1.0),
        ];
        for j in 0..8 {
            assert!((x[(j, 0)] - expect[j % 4]).norm() < 1e-15);
        }

        let x = fourier_mode(3, 6).unwrap();
        for j in 0..6 {
            let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
            assert!((x[(j, 0)] - Complex64::new(sign, 0.0)).norm() < 1e-15);
        }
        assert!(fourier_mode(6, 6).is_err());
    }

    #[test]
    fn mode_coordinate_examples() {
        let c = mode_coords(0, 7).unwrap();
        assert_eq!((c.y, c.z, c.beta), (0.0, 0.0, 0.0));
        assert_eq!(c.alpha, Complex64::new(0.0, 0.0));

        let c = mode_coords(2, 8).unwrap();
        assert!((c.theta - PI / 2.0).abs() < 1e-15);
        assert!((c.y - 1.0).abs() < 1e-15 && (c.z - 1.0).abs() < 1e-15);
        assert!((c.alpha - Complex64::new(0.0, 2.0)).norm() < 1e-15);
        assert!((c.beta + 2.0).abs() < 1e-15);

        let c = mode_coords(3, 6).unwrap();
        assert!((c.y - 2.0).abs() < 1e-15 && c.z.abs() < 1e-15);
        assert!((c.beta + 4.0).abs() < 1e-15);
        assert!(mode_coords(6, 6).is_err());
    }

    #[test]
    fn modes_diagonalize_difference_matrices() {
        for n_x in 3..=64 {
            let g = XGrid::new(n_x, 1.0).unwrap();
            let ma: CMatrix = g.m_alpha.lift();
            let mb: CMatrix = g.m_beta.lift();
            for m in 0..n_x {
                let c = mode_coords(m, n_x).unwrap();
                let x = fourier_mode(m, n_x).unwrap();
                let ra = &(&ma * &x) - &x.scale(c.alpha);
                let rb = &(&mb * &x) - &x.scale_real(c.beta);
                assert!(ra.max_abs() < 1e-12, "alpha n_x={n_x} m={m}");
                assert!(rb.max_abs() < 1e-12, "beta n_x={n_x} m={m}");
                assert!((c.z * c.z - c.y * (2.0 - c.y)).abs() < 1e-12);
                assert!(c.alpha.re == 0.0 && (-4.0..=0.0).contains(&c.beta));
            }
        }
    }

    #[test]
    fn coefficient_grammar() {
        assert_eq!("const:2.5".parse::<Coefficient>().unwrap(), Coefficient::Const(2.5));
        assert_eq!("linear".parse::<Coefficient>().unwrap(), Coefficient::Linear);
        assert_eq!("abs".parse::<Coefficient>().unwrap(), Coefficient::Abs);
        assert_eq!("square".parse::<Coefficient>().unwrap(), Coefficient::Square);
        assert!("const".parse::<Coefficient>().is_err());
        assert!("const:x".parse::<Coefficient>().is_err());
        assert!("linear:2".parse::<Coefficient>().is_err());
        assert!("cubic".parse::<Coefficient>().is_err());
        for c in [Coefficient::Const(-0.125), Coefficient::Linear, Coefficient::Square] {
            assert_eq!(c.to_string().parse::<Coefficient>().unwrap(), c);
        }
    }
}
