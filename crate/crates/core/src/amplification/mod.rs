//! Closed-form von Neumann amplification factors.
//!
//! A hyperbolic mode is described by `Y = 1 − cos θ`, `Z = sin θ` and the
//! signed CFL number `ν`; surfaces `h(Y, μ) = |G|²` depend on `μ = |ν|` and
//! on `Z` only through `Z² = Y(2 − Y)`. Parabolic factors are functions of
//! `x = 2Yν`.

mod boundary;

pub use boundary::{
    contour_grid, find_boundary, stability_y_grid, BoundaryResult, ContourRow, Critical, PREDICATE_SLACK,
};

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::integrators::{Approach, Equation, SchemeSpec, Splitting, Substep};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AmpQuery {
    pub y: f64,
    pub z: f64,
    pub nu: f64,
}

impl AmpQuery {
    /// Query on the branch `Z = +√(Y(2−Y))`.
    pub fn new(y: f64, nu: f64) -> Result<Self> {
        if !(0.0..=2.0).contains(&y) || !nu.is_finite() {
            return Err(Error::Input(format!("need Y in [0, 2] and finite nu, got Y = {y}, nu = {nu}")));
        }
        Ok(Self {
            y,
            z: (y * (2.0 - y)).sqrt(),
            nu,
        })
    }

    /// Query with an explicit `Z`, as measured on a grid mode.
    pub fn with_z(y: f64, z: f64, nu: f64) -> Self {
        Self { y, z, nu }
    }

    /// Parabolic shorthand `x = 2Yν`.
    pub fn x(&self) -> f64 {
        2.0 * self.y * self.nu
    }
}

/// `P₁ = (1 − |ν|Y) − iνZ`, the upwind factor.
fn p1(q: &AmpQuery) -> Complex64 {
    Complex64::new(1.0 - q.nu.abs() * q.y, -q.nu * q.z)
}

/// `½(1 + P²)`, one SSP-RK2 step of a linear factor `P`.
fn ssp_rk2(p: Complex64) -> Complex64 {
    0.5 * (1.0 + p * p)
}

fn halved(q: &AmpQuery) -> AmpQuery {
    AmpQuery { nu: 0.5 * q.nu, ..*q }
}

/// `G = (1 − |ν|Y) − iνZ` for forward Euler on the full tensor.
pub fn amp_full_hyperbolic(q: &AmpQuery) -> Complex64 {
    p1(q)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct HyperbolicFactors {
    pub p1: Complex64,
    /// `2 − P₁`
    pub p2_dtp: Complex64,
    /// `1 + iνZ`
    pub p2_ptd: Complex64,
    /// `1 − iνZ`
    pub p3_ptd: Complex64,
}

pub fn amp_p1_p2_p3(q: &AmpQuery) -> HyperbolicFactors {
    let p1 = p1(q);
    HyperbolicFactors {
        p1,
        p2_dtp: 2.0 - p1,
        p2_ptd: Complex64::new(1.0, q.nu * q.z),
        p3_ptd: Complex64::new(1.0, -q.nu * q.z),
    }
}

/// `1 + 2Yμ(μ − 1)`.
pub fn h_full_hyperbolic(y: f64, mu: f64) -> f64 {
    1.0 + 2.0 * y * mu * (mu - 1.0)
}

/// `[1 + 2Yμ(μ−1)]²·[1 + 2Yμ(μ+1)]`.
pub fn h_dtp_lie(y: f64, mu: f64) -> f64 {
    let a = 1.0 + 2.0 * y * mu * (mu - 1.0);
    a * a * (1.0 + 2.0 * y * mu * (mu + 1.0))
}

/// `[1 + 2Yμ(μ−1)]·[1 + μ²Y(2−Y)]²`.
pub fn h_ptd_lie(y: f64, mu: f64) -> f64 {
    let b = 1.0 + mu * mu * y * (2.0 - y);
    (1.0 + 2.0 * y * mu * (mu - 1.0)) * b * b
}

/// `|½(1 + P²)|²` for `P = (1 ∓ μY) − iνZ`, written out in `Y` and `μ`.
fn ssp_upwind_sqr(y: f64, mu: f64, sign: f64) -> f64 {
    let a = 1.0 + sign * mu * y;
    let zz = mu * mu * y * (2.0 - y);
    let re = 0.5 * (1.0 + a * a - zz);
    re * re + a * a * zz
}

/// `|½(1 + P²)|²` for `P = 1 ± iνZ`.
fn ssp_central_sqr(y: f64, mu: f64) -> f64 {
    let zz = mu * mu * y * (2.0 - y);
    let re = 0.5 * (2.0 - zz);
    re * re + zz
}

/// `|P̄₁(μ/2)|⁴·|P̄₂(μ/2)|⁴·|P̄₁(μ)|²` with `P₂ = 2 − P₁`.
pub fn h_dtp_strang_rk2(y: f64, mu: f64) -> f64 {
    let a = ssp_upwind_sqr(y, 0.5 * mu, -1.0);
    let b = ssp_upwind_sqr(y, 0.5 * mu, 1.0);
    a * a * b * b * ssp_upwind_sqr(y, mu, -1.0)
}

/// `|P̄₁(μ/2)|⁴·|P̄₂(μ/2)|⁴·|P̄₃(μ)|²` with `P₂ = 1 + iνZ`, `P₃ = 1 − iνZ`.
pub fn h_ptd_strang_rk2(y: f64, mu: f64) -> f64 {
    let a = ssp_upwind_sqr(y, 0.5 * mu, -1.0);
    let b = ssp_central_sqr(y, 0.5 * mu);
    a * a * b * b * ssp_central_sqr(y, mu)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum ParabolicVariant {
    FullTheta(f64),
    /// Lie splitting with the same θ in every substep; the
    /// project-then-discretize variant has the same factor.
    LieTheta(f64),
    Hybrid,
    StrangCn,
}

/// Parabolic amplification factor at `x = 2Yν ≥ 0`.
pub fn g_parabolic(x: f64, variant: ParabolicVariant) -> Result<f64> {
    if !(x >= 0.0) {
        return Err(Error::Input(format!("x must be nonnegative, got {x}")));
    }
    // θ-scheme factors of the forward and backward-in-time pieces
    let fwd = |t: f64, x: f64| (1.0 - (1.0 - t) * x) / (1.0 + t * x);
    let bwd = |t: f64, x: f64| (1.0 + (1.0 - t) * x) / (1.0 - t * x);
    Ok(match variant {
        ParabolicVariant::FullTheta(t) => fwd(t, x),
        ParabolicVariant::LieTheta(t) if t == 0.5 => fwd(0.5, x),
        ParabolicVariant::LieTheta(t) => {
            if t * x == 1.0 {
                return Err(Error::Pole { x });
            }
            let p = fwd(t, x);
            p * p * bwd(t, x)
        }
        ParabolicVariant::Hybrid => 1.0 / (1.0 + x),
        ParabolicVariant::StrangCn => {
            let (a, b) = (fwd(0.5, 0.5 * x), bwd(0.5, 0.5 * x));
            let pair = if x == 4.0 { 1.0 } else { a * b };
            pair * fwd(0.5, x) * pair
        }
    })
}

/// Closed-form complex multiplier of `scheme` on the mode described by `q`.
pub fn mode_multiplier(scheme: &SchemeSpec, q: &AmpQuery) -> Result<Complex64> {
    scheme.validate()?;
    match scheme.equation {
        Equation::Hyperbolic => {
            let rk2 = scheme.substep == Substep::SspRk2;
            let lift = |p: Complex64| if rk2 { ssp_rk2(p) } else { p };
            let f = amp_p1_p2_p3(q);
            let (p2, p3) = match scheme.approach {
                Approach::Ptd => (f.p2_ptd, f.p3_ptd),
                _ => (f.p2_dtp, f.p1),
            };
            Ok(match (scheme.approach, scheme.splitting) {
                (Approach::FullTensor, _) => lift(f.p1),
                (_, Splitting::Lie) => lift(f.p1) * lift(p2) * lift(p3),
                (approach, Splitting::Strang) => {
                    let h = amp_p1_p2_p3(&halved(q));
                    let p2h = if approach == Approach::Ptd { h.p2_ptd } else { h.p2_dtp };
                    let (a, b) = (ssp_rk2(h.p1), ssp_rk2(p2h));
                    a * a * b * b * ssp_rk2(p3)
                }
            })
        }
        Equation::Parabolic => Ok(Complex64::new(g_parabolic(q.x(), parabolic_variant(scheme)?)?, 0.0)),
    }
}

fn parabolic_variant(scheme: &SchemeSpec) -> Result<ParabolicVariant> {
    let theta = || {
        scheme
            .substep
            .theta()
            .ok_or_else(|| Error::Input(format!("no θ for substep {}", scheme.substep)))
    };
    Ok(match (scheme.approach, scheme.splitting, scheme.substep) {
        (Approach::FullTensor, _, _) => ParabolicVariant::FullTheta(theta()?),
        (_, _, Substep::HybridBeFeBe) => ParabolicVariant::Hybrid,
        (_, Splitting::Strang, _) => ParabolicVariant::StrangCn,
        (_, Splitting::Lie, _) => ParabolicVariant::LieTheta(theta()?),
    })
}

/// A stability surface `h(Y, μ) = |G|²`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Surface {
    FullHyperbolic,
    DtpLie,
    PtdLie,
    DtpStrangRk2,
    PtdStrangRk2,
    /// `g(2Yμ)²`, infinite at a pole.
    Parabolic(ParabolicVariant),
    /// `|G|²` of the complex factor of any other valid scheme.
    Modulus(SchemeSpec),
}

impl Surface {
    pub fn from_scheme(scheme: &SchemeSpec) -> Result<Self> {
        scheme.validate()?;
        Ok(match (scheme.equation, scheme.approach, scheme.splitting, scheme.substep) {
            (Equation::Parabolic, ..) => Surface::Parabolic(parabolic_variant(scheme)?),
            (_, Approach::FullTensor, _, Substep::ForwardEuler) => Surface::FullHyperbolic,
            (_, Approach::Dtp, Splitting::Lie, Substep::ForwardEuler) => Surface::DtpLie,
            (_, Approach::Ptd, Splitting::Lie, Substep::ForwardEuler) => Surface::PtdLie,
            (_, Approach::Dtp, Splitting::Strang, _) => Surface::DtpStrangRk2,
            (_, Approach::Ptd, Splitting::Strang, _) => Surface::PtdStrangRk2,
            _ => Surface::Modulus(*scheme),
        })
    }

    pub fn eval(&self, y: f64, mu: f64) -> f64 {
        match self {
            Surface::FullHyperbolic => h_full_hyperbolic(y, mu),
            Surface::DtpLie => h_dtp_lie(y, mu),
            Surface::PtdLie => h_ptd_lie(y, mu),
            Surface::DtpStrangRk2 => h_dtp_strang_rk2(y, mu),
            Surface::PtdStrangRk2 => h_ptd_strang_rk2(y, mu),
            Surface::Parabolic(v) => match g_parabolic(2.0 * y * mu, *v) {
                Ok(g) => g * g,
                Err(_) => f64::INFINITY,
            },
            Surface::Modulus(s) => AmpQuery::new(y, mu)
                .and_then(|q| mode_multiplier(s, &q))
                .map(|g| g.norm_sqr())
                .unwrap_or(f64::INFINITY),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(y: f64, nu: f64) -> AmpQuery {
        AmpQuery::new(y, nu).unwrap()
    }

    #[test]
    fn full_hyperbolic_examples() {
        assert_eq!(amp_full_hyperbolic(&q(0.0, 0.7)), Complex64::new(1.0, 0.0));
        assert_eq!(amp_full_hyperbolic(&q(2.0, 0.5)).norm(), 0.0);
        for y in [0.1, 0.5, 1.3, 2.0] {
            assert!((amp_full_hyperbolic(&q(y, 1.0)).norm_sqr() - 1.0).abs() < 1e-14);
            assert!((amp_full_hyperbolic(&q(y, -1.0)).norm_sqr() - 1.0).abs() < 1e-14);
        }
    }

    #[test]
    fn factor_identities() {
        let f = amp_p1_p2_p3(&q(0.0, 0.4));
        assert_eq!((f.p1, f.p2_dtp), (Complex64::new(1.0, 0.0), Complex64::new(1.0, 0.0)));
        for (y, nu) in [(0.3, 0.2), (1.7, -0.9), (1.0, 2.5)] {
            let f = amp_p1_p2_p3(&q(y, nu));
            let mu: f64 = nu.abs();
            assert!((f.p2_dtp.norm_sqr() - (1.0 + 2.0 * y * mu * (mu + 1.0))).abs() < 1e-13);
            let prod = f.p2_ptd * f.p3_ptd;
            assert!(prod.im.abs() < 1e-15);
            assert!((prod.re - (1.0 + nu * nu * y * (2.0 - y))).abs() < 1e-13);
        }
    }

    #[test]
    fn h_examples() {
        assert_eq!(h_dtp_lie(0.0, 0.7), 1.0);
        assert!((h_dtp_lie(2.0, 1.0 / 3.0) - 25.0 / 729.0).abs() < 1e-15);
        assert!((h_dtp_lie(0.1, 0.4) - 1.00781).abs() < 1e-5);
        assert_eq!(h_ptd_lie(0.0, 0.3), 1.0);
        assert!((h_ptd_lie(1.0, 1.0 / 3.0) - 500.0 / 729.0).abs() < 1e-15);
        assert_eq!(h_dtp_strang_rk2(0.0, 0.5), 1.0);
        assert_eq!(h_dtp_strang_rk2(1.2, 0.0), 1.0);
        assert_eq!(h_ptd_strang_rk2(0.0, 1.5), 1.0);
    }

    #[test]
    fn strang_surfaces_around_thresholds() {
        let grid = stability_y_grid();
        let max = |f: fn(f64, f64) -> f64, mu: f64| grid.iter().map(|&y| f(y, mu)).fold(0.0, f64::max);
        assert!(max(h_dtp_strang_rk2, 0.86) <= 1.0 + PREDICATE_SLACK);
        assert!(max(h_dtp_strang_rk2, 0.88) > 1.0);
        assert!(max(h_ptd_strang_rk2, 1.99) <= 1.0 + PREDICATE_SLACK);
        assert!(max(h_ptd_strang_rk2, 2.1) > 1.0);
    }

    #[test]
    fn surfaces_match_complex_factors() {
        let s = |n: &str| n.parse::<SchemeSpec>().unwrap();
        for i in 0..=40 {
            let y = i as f64 * 0.05;
            for j in 0..=30 {
                let mu = j as f64 * 0.1;
                for nu in [mu, -mu] {
                    let qq = q(y, nu);
                    for (name, h) in [
                        ("hyp-full-fe", h_full_hyperbolic(y, mu)),
                        ("hyp-dtp-lie-fe", h_dtp_lie(y, mu)),
                        ("hyp-ptd-lie-fe", h_ptd_lie(y, mu)),
                        ("hyp-dtp-strang-rk2", h_dtp_strang_rk2(y, mu)),
                        ("hyp-ptd-strang-rk2", h_ptd_strang_rk2(y, mu)),
                    ] {
                        let g = mode_multiplier(&s(name), &qq).unwrap().norm_sqr();
                        assert!((g - h).abs() <= 1e-12 * h.max(1.0), "{name} Y={y} nu={nu}");
                    }
                }
            }
        }
    }

    #[test]
    fn parabolic_examples() {
        use ParabolicVariant::*;
        for v in [FullTheta(0.3), LieTheta(0.0), LieTheta(0.5), LieTheta(1.0), Hybrid, StrangCn] {
            assert_eq!(g_parabolic(0.0, v).unwrap(), 1.0);
        }
        let be = g_parabolic((5f64.sqrt() - 1.0) / 2.0, LieTheta(1.0)).unwrap();
        assert!((be.abs() - 1.0).abs() < 1e-14);
        let fe = g_parabolic((5f64.sqrt() + 1.0) / 2.0, LieTheta(0.0)).unwrap();
        assert!((fe.abs() - 1.0).abs() < 1e-14);
        assert!((g_parabolic(1e6, Hybrid).unwrap() - 1e-6).abs() < 1e-11);
        assert!(matches!(g_parabolic(1.0, LieTheta(1.0)), Err(Error::Pole { .. })));
        assert!(g_parabolic(-1.0, Hybrid).is_err());
        // removable singularities
        assert_eq!(g_parabolic(2.0, LieTheta(0.5)).unwrap(), 0.0);
        assert!((g_parabolic(4.0, StrangCn).unwrap() + 1.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn parabolic_pole_is_infinite_on_surface() {
        let s = Surface::Parabolic(ParabolicVariant::LieTheta(1.0));
        assert_eq!(s.eval(0.5, 1.0), f64::INFINITY);
    }
}
