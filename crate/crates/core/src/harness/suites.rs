use std::path::{Path, PathBuf};

use num_complex::Complex64;

use super::csv::{write_contour, write_file};
use super::run::{closed_form, setup, time_step};
use super::config::{ExperimentConfig, InitialData};
use crate::amplification::{contour_grid, find_boundary, BoundaryResult, Critical, Surface};
use crate::discretize::{Coefficient, VKind};
use crate::error::{Error, Result};
use crate::integrators::{Equation, Model, SchemeSpec};

/// Largest accepted gap between measured and closed-form multipliers.
pub const ORACLE_TOL: f64 = 1e-10;
/// Largest accepted gap between the two parabolic formulations.
pub const EQUIVALENCE_TOL: f64 = 1e-12;
pub const BOUNDARY_MU_CAP: f64 = 1e6;
pub const BOUNDARY_TOL: f64 = 1e-9;

/// Every named scheme family the oracle suite covers.
pub const ORACLE_SCHEMES: &[&str] = &[
    "hyp-full-fe",
    "hyp-dtp-lie-fe",
    "hyp-ptd-lie-fe",
    "hyp-dtp-strang-rk2",
    "hyp-ptd-strang-rk2",
    "par-full-theta0",
    "par-full-theta0.5",
    "par-full-theta1",
    "par-dtp-lie-theta0",
    "par-dtp-lie-theta0.5",
    "par-dtp-lie-theta1",
    "par-ptd-lie-theta0",
    "par-ptd-lie-theta0.5",
    "par-ptd-lie-theta1",
    "par-hybrid",
    "par-ptd-hybrid",
    "par-strang-cn",
    "par-ptd-strang-cn",
];

/// CFL numbers the oracle probes. The parabolic values keep `θx` well away
/// from the backward-Euler pole at `θx = 1`.
const HYPERBOLIC_CFLS: &[f64] = &[0.3, 0.9, 1.8];
const PARABOLIC_CFLS: &[f64] = &[0.1, 0.2];

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct OracleCase {
    pub scheme: SchemeSpec,
    pub v_mode: VKind,
    pub coefficient: Coefficient,
    pub n_x: usize,
    pub n_v: usize,
    pub cfl: f64,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct OracleReport {
    pub case: OracleCase,
    pub modes: usize,
    /// `max |G_measured − G_closed|` over all `(m, k)`.
    pub max_discrepancy: f64,
    /// `max ‖U₁ − G·U₀‖/‖U₀‖`, the failure of mode closure.
    pub max_residual: f64,
    pub worst: (usize, usize),
}

impl OracleReport {
    pub fn passed(&self) -> bool {
        self.max_discrepancy <= ORACLE_TOL && self.max_residual <= ORACLE_TOL
    }
}

fn complex_model(equation: Equation, v_mode: VKind, coefficient: Coefficient, n_x: usize, n_v: usize) -> Result<Model<Complex64>> {
    let cfg = probe_config(equation, v_mode, coefficient, n_x, n_v)?;
    let (vdisc, grid) = setup(&cfg)?;
    Model::new(equation, vdisc, grid)
}

fn probe_config(equation: Equation, v_mode: VKind, coefficient: Coefficient, n_x: usize, n_v: usize) -> Result<ExperimentConfig> {
    let scheme = match equation {
        Equation::Hyperbolic => "hyp-full-fe",
        Equation::Parabolic => "par-full-theta0",
    };
    Ok(ExperimentConfig {
        scheme: scheme.parse()?,
        n_x,
        n_v,
        rank: 1,
        coefficient,
        v_mode,
        cfl: 0.0,
        steps: 0,
        seed: 0,
        initial_data: InitialData::WorstMode,
        quadrature_order: None,
    })
}

/// Measured against closed-form multipliers on every mode `(m, k)`.
pub fn run_oracle(case: &OracleCase) -> Result<OracleReport> {
    if case.n_x > 64 || case.n_v > 8 {
        return Err(Error::Input(format!(
            "oracle runs are limited to N_x <= 64, N_v <= 8 (got {}, {})",
            case.n_x, case.n_v
        )));
    }
    let model = complex_model(case.scheme.equation, case.v_mode, case.coefficient, case.n_x, case.n_v)?;
    let dt = time_step(case.scheme.equation, case.cfl, model.vdisc(), model.grid())?;
    let mut report = OracleReport {
        case: *case,
        modes: 0,
        max_discrepancy: 0.0,
        max_residual: 0.0,
        worst: (0, 0),
    };
    for m in 0..case.n_x {
        for k in 0..case.n_v {
            let (g, residual) = model.mode_multiplier(&case.scheme, m, k, dt)?;
            let expect = closed_form(&case.scheme, model.vdisc(), model.grid(), m, k, dt)?;
            let d = (g - expect).norm();
            let d = if d.is_nan() { f64::INFINITY } else { d };
            if d > report.max_discrepancy {
                report.max_discrepancy = d;
                report.worst = (m, k);
            }
            report.max_residual = report.max_residual.max(residual);
            report.modes += 1;
        }
    }
    Ok(report)
}

/// Oracle cases for `schemes`: nodal and modal velocity discretizations and
/// several CFL numbers each. Advection uses `a(v) = v`; diffusion uses
/// `a(v) = v²`, since it needs a nonnegative spectrum.
pub fn oracle_cases(schemes: &[SchemeSpec], n_x: usize, n_v: usize) -> Vec<OracleCase> {
    let mut cases = Vec::new();
    for scheme in schemes {
        let (coefficient, cfls) = match scheme.equation {
            Equation::Hyperbolic => (Coefficient::Linear, HYPERBOLIC_CFLS),
            Equation::Parabolic => (Coefficient::Square, PARABOLIC_CFLS),
        };
        for v_mode in [VKind::Nodal, VKind::Modal] {
            for &cfl in cfls {
                cases.push(OracleCase {
                    scheme: *scheme,
                    v_mode,
                    coefficient,
                    n_x,
                    n_v,
                    cfl,
                });
            }
        }
    }
    cases
}

pub fn oracle_schemes() -> Vec<SchemeSpec> {
    ORACLE_SCHEMES
        .iter()
        .map(|s| s.parse().expect("built-in scheme names parse"))
        .collect()
}

pub fn run_oracle_suite(schemes: &[SchemeSpec], n_x: usize, n_v: usize) -> Result<Vec<OracleReport>> {
    oracle_cases(schemes, n_x, n_v).iter().map(run_oracle).collect()
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EquivalenceReport {
    pub theta: f64,
    pub v_mode: VKind,
    pub cfl: f64,
    /// `max |G_dtp − G_ptd|` over all `(m, k)`.
    pub max_difference: f64,
}

/// Per-mode multipliers of the two parabolic Lie formulations at one θ.
pub fn run_parabolic_equivalence(theta: f64, v_mode: VKind, n_x: usize, n_v: usize, cfl: f64) -> Result<EquivalenceReport> {
    let dtp: SchemeSpec = format!("par-dtp-lie-theta{theta}").parse()?;
    let ptd: SchemeSpec = format!("par-ptd-lie-theta{theta}").parse()?;
    let model = complex_model(Equation::Parabolic, v_mode, Coefficient::Square, n_x, n_v)?;
    let dt = time_step(Equation::Parabolic, cfl, model.vdisc(), model.grid())?;
    let mut max_difference: f64 = 0.0;
    for m in 0..n_x {
        for k in 0..n_v {
            let (a, _) = model.mode_multiplier(&dtp, m, k, dt)?;
            let (b, _) = model.mode_multiplier(&ptd, m, k, dt)?;
            let d = (a - b).norm();
            max_difference = max_difference.max(if d.is_nan() { f64::INFINITY } else { d });
        }
    }
    Ok(EquivalenceReport {
        theta,
        v_mode,
        cfl,
        max_difference,
    })
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Expected {
    Value { mu: f64, tol: f64 },
    Unconditional,
}

impl Expected {
    pub fn accepts(&self, r: &BoundaryResult) -> bool {
        match (*self, r.critical) {
            (Expected::Value { mu, tol }, Critical::Finite(c)) => (c - mu).abs() <= tol,
            (Expected::Unconditional, Critical::Unconditional) => true,
            _ => false,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct BoundaryRow {
    pub scheme: SchemeSpec,
    pub name: String,
    pub result: BoundaryResult,
    pub expected: Expected,
    pub passed: bool,
}

/// Known stability limits of every scheme family: the schemes with a finite
/// CFL limit and those that are stable for every step size.
pub fn boundary_expectations() -> Vec<(SchemeSpec, Expected)> {
    let sqrt5 = 5f64.sqrt();
    let value = |mu: f64, tol: f64| Expected::Value { mu, tol };
    [
        ("hyp-full-fe", value(1.0, 1e-4)),
        ("hyp-dtp-lie-fe", value(1.0 / 3.0, 1e-4)),
        ("hyp-ptd-lie-fe", value(1.0 / 3.0, 1e-4)),
        ("hyp-dtp-strang-rk2", value(0.866, 0.01)),
        ("hyp-ptd-strang-rk2", value(2.0, 0.01)),
        ("par-full-theta0", value(0.5, 1e-6)),
        ("par-full-theta1", Expected::Unconditional),
        ("par-dtp-lie-theta1", value((sqrt5 - 1.0) / 8.0, 1e-6)),
        ("par-dtp-lie-theta0", value((1.0 + sqrt5) / 8.0, 1e-6)),
        ("par-dtp-lie-theta0.5", Expected::Unconditional),
        ("par-hybrid", Expected::Unconditional),
        ("par-strang-cn", Expected::Unconditional),
    ]
    .into_iter()
    .map(|(name, e)| (name.parse().expect("built-in scheme names parse"), e))
    .collect()
}

/// Stability boundary of `scheme` on `[0, 10⁶]`.
pub fn boundary_for(scheme: &SchemeSpec, tol: f64) -> Result<BoundaryResult> {
    find_boundary(&Surface::from_scheme(scheme)?, BOUNDARY_MU_CAP, tol)
}

pub fn run_boundary_suite() -> Result<Vec<BoundaryRow>> {
    boundary_expectations()
        .into_iter()
        .map(|(scheme, expected)| {
            let result = boundary_for(&scheme, BOUNDARY_TOL)?;
            Ok(BoundaryRow {
                name: scheme.to_string(),
                scheme,
                passed: expected.accepts(&result),
                result,
                expected,
            })
        })
        .collect()
}

/// File name, scheme and `μ` range of each stability-region figure.
pub const FIGURES: [(&str, &str, f64); 4] = [
    ("fig1_dtp_lie.csv", "hyp-dtp-lie-fe", 1.0),
    ("fig2_dtp_strang.csv", "hyp-dtp-strang-rk2", 1.2),
    ("fig3_ptd_lie.csv", "hyp-ptd-lie-fe", 1.0),
    ("fig4_ptd_strang.csv", "hyp-ptd-strang-rk2", 2.5),
];
pub const FIGURE_POINTS: usize = 401;

/// Writes the four `401×401` contour grids into `dir`.
pub fn emit_figure_grids(dir: &Path) -> Result<Vec<PathBuf>> {
    std::fs::create_dir_all(dir).map_err(|source| Error::Io {
        path: dir.to_path_buf(),
        source,
    })?;
    let mut paths = Vec::new();
    for (file, scheme, mu_max) in FIGURES {
        let surface = Surface::from_scheme(&scheme.parse()?)?;
        let rows = contour_grid(&surface, FIGURE_POINTS, FIGURE_POINTS, mu_max)?;
        let path = dir.join(file);
        write_file(&path, |w| write_contour(w, &rows))?;
        paths.push(path);
    }
    Ok(paths)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_cfl_multipliers_are_one() {
        for scheme in oracle_schemes() {
            let coefficient = match scheme.equation {
                Equation::Hyperbolic => Coefficient::Linear,
                Equation::Parabolic => Coefficient::Square,
            };
            let model = complex_model(scheme.equation, VKind::Nodal, coefficient, 8, 3).unwrap();
            for m in 0..8 {
                for k in 0..3 {
                    let (g, _) = model.mode_multiplier(&scheme, m, k, 0.0).unwrap();
                    assert_eq!(g, Complex64::new(1.0, 0.0), "{scheme}");
                }
            }
        }
    }

    #[test]
    fn oracle_small_instance() {
        let schemes = oracle_schemes();
        for r in run_oracle_suite(&schemes, 8, 3).unwrap() {
            assert!(r.passed(), "{r:?}");
        }
    }

    #[test]
    fn oracle_size_limit() {
        let case = oracle_cases(&oracle_schemes()[..1], 128, 4)[0];
        assert!(run_oracle(&case).is_err());
    }
}
