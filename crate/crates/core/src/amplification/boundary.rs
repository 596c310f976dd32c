use super::Surface;
use crate::error::{Error, Result};

/// `h ≤ 1 + PREDICATE_SLACK` counts as stable.
pub const PREDICATE_SLACK: f64 = 1e-12;

const UNIFORM_POINTS: usize = 4001;
const LOG_PROBES: usize = 60;
const MAX_BISECTIONS: usize = 60;

/// Largest critical value; anything stable here is reported as unconditional.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Critical {
    Finite(f64),
    Unconditional,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BoundaryResult {
    pub critical: Critical,
    /// Largest `μ` verified stable.
    pub lo: f64,
    /// Smallest `μ` verified unstable, infinite when unconditional.
    pub hi: f64,
    /// Argmax of `h` over the sample set at the critical `μ` (or at the cap).
    pub worst_y: f64,
    pub evaluations: usize,
}

/// Sample set in `Y`: 4001 uniform points on `[0, 2]` plus log-spaced probes
/// `2·10^(−k/4)`, `k = 1..60`, that resolve the thin unstable band next to
/// `Y = 0` when `μ` is only slightly supercritical.
pub fn stability_y_grid() -> Vec<f64> {
    let mut ys: Vec<f64> = (0..UNIFORM_POINTS)
        .map(|i| 2.0 * i as f64 / (UNIFORM_POINTS - 1) as f64)
        .collect();
    ys.extend((1..=LOG_PROBES).map(|k| 2.0 * 10f64.powf(-(k as f64) / 4.0)));
    ys
}

fn worst(surface: &Surface, mu: f64, ys: &[f64]) -> (f64, f64) {
    let mut best = (f64::NEG_INFINITY, 0.0);
    for &y in ys {
        let h = surface.eval(y, mu);
        let h = if h.is_nan() { f64::INFINITY } else { h };
        if h > best.0 {
            best = (h, y);
        }
    }
    best
}

/// Bisection on `μ ∈ [0, mu_cap]` for the largest `μ` with
/// `max_Y h(Y, μ) ≤ 1 + 1e-12`.
pub fn find_boundary(surface: &Surface, mu_cap: f64, tol: f64) -> Result<BoundaryResult> {
    if !(tol > 0.0 && tol.is_finite()) {
        return Err(Error::Input(format!("tolerance must be positive, got {tol}")));
    }
    if !(mu_cap >= 1.0 && mu_cap.is_finite()) {
        return Err(Error::Input(format!("mu_cap must be at least 1, got {mu_cap}")));
    }
    if tol < mu_cap * 0.5f64.powi(MAX_BISECTIONS as i32) {
        return Err(Error::Input(format!(
            "tolerance {tol:e} is below the bisection resolution for mu_cap = {mu_cap}"
        )));
    }
    let ys = stability_y_grid();
    let mut evaluations = 0;
    let mut stable = |mu: f64| {
        evaluations += ys.len();
        let (h, y) = worst(surface, mu, &ys);
        (h <= 1.0 + PREDICATE_SLACK, y)
    };

    let (cap_ok, cap_y) = stable(mu_cap);
    if cap_ok {
        return Ok(BoundaryResult {
            critical: Critical::Unconditional,
            lo: mu_cap,
            hi: f64::INFINITY,
            worst_y: cap_y,
            evaluations,
        });
    }
    let (mut lo, mut hi) = (0.0, mu_cap);
    for _ in 0..MAX_BISECTIONS {
        if hi - lo <= tol {
            break;
        }
        let mid = 0.5 * (lo + hi);
        if stable(mid).0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let worst_y = stable(lo).1;
    Ok(BoundaryResult {
        critical: Critical::Finite(lo),
        lo,
        hi,
        worst_y,
        evaluations,
    })
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ContourRow {
    pub y: f64,
    pub mu: f64,
    /// Infinite at a pole.
    pub h: f64,
}

/// `h` on a uniform `(Y, μ)` grid over `[0, 2] × [0, mu_max]`, `μ` outer.
pub fn contour_grid(surface: &Surface, y_points: usize, mu_points: usize, mu_max: f64) -> Result<Vec<ContourRow>> {
    if y_points < 2 || mu_points < 2 {
        return Err(Error::Input("contour grids need at least 2 points per axis".into()));
    }
    if !(mu_max > 0.0 && mu_max.is_finite()) {
        return Err(Error::Input(format!("mu_max must be positive, got {mu_max}")));
    }
    let mut rows = Vec::with_capacity(y_points * mu_points);
    for j in 0..mu_points {
        let mu = mu_max * j as f64 / (mu_points - 1) as f64;
        for i in 0..y_points {
            let y = 2.0 * i as f64 / (y_points - 1) as f64;
            let h = surface.eval(y, mu);
            rows.push(ContourRow {
                y,
                mu,
                h: if h.is_nan() { f64::INFINITY } else { h },
            });
        }
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::amplification::ParabolicVariant;

    fn critical(r: &BoundaryResult) -> f64 {
        match r.critical {
            Critical::Finite(m) => m,
            Critical::Unconditional => panic!("expected a finite boundary"),
        }
    }

    #[test]
    fn hyperbolic_lie_boundaries() {
        for s in [Surface::DtpLie, Surface::PtdLie] {
            let r = find_boundary(&s, 1e6, 1e-9).unwrap();
            assert!((critical(&r) - 1.0 / 3.0).abs() < 1e-4, "{s:?}: {r:?}");
            assert!(r.lo <= critical(&r) && critical(&r) <= r.hi && r.hi - r.lo <= 1e-9);
        }
    }

    #[test]
    fn parabolic_boundaries() {
        let s = Surface::Parabolic(ParabolicVariant::LieTheta(1.0));
        let r = find_boundary(&s, 1e6, 1e-10).unwrap();
        assert!((critical(&r) - (5f64.sqrt() - 1.0) / 8.0).abs() < 1e-6);
        let s = Surface::Parabolic(ParabolicVariant::StrangCn);
        assert_eq!(find_boundary(&s, 1e6, 1e-8).unwrap().critical, Critical::Unconditional);
    }

    #[test]
    fn argument_checks() {
        assert!(find_boundary(&Surface::DtpLie, 1e6, 0.0).is_err());
        assert!(find_boundary(&Surface::DtpLie, 0.5, 1e-6).is_err());
        assert!(find_boundary(&Surface::DtpLie, 1e6, 1e-300).is_err());
    }

    #[test]
    fn small_contour() {
        let rows = contour_grid(&Surface::DtpLie, 3, 3, 1.0).unwrap();
        assert_eq!(rows.len(), 9);
        assert_eq!(rows[0], ContourRow { y: 0.0, mu: 0.0, h: 1.0 });
        assert!(contour_grid(&Surface::DtpLie, 1, 3, 1.0).is_err());
    }
}
