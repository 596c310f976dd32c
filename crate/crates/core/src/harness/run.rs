use std::time::Instant;

use num_complex::Complex64;

use super::config::{ExperimentConfig, InitialData};
use crate::amplification::{mode_multiplier, AmpQuery};
use crate::discretize::{build, mode_coords, VDiscretization, XGrid};
use crate::error::{Error, Result};
use crate::integrators::{mode_state, random_lowrank, Approach, Equation, Model, SchemeSpec, State};
use crate::matcore::Scalar;

/// Relative growth of the final norm still counted as stable.
pub const STABLE_GROWTH: f64 = 1e-8;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RunRecord {
    pub step: usize,
    pub frobenius: f64,
    pub ortho_residual: f64,
    /// Seconds since the start of the run.
    pub wall_time: f64,
}

/// Velocity discretization and grid described by `cfg`.
pub fn setup(cfg: &ExperimentConfig) -> Result<(VDiscretization, XGrid)> {
    let vdisc = build(cfg.v_mode, cfg.coefficient, cfg.n_v, cfg.quadrature_order)?;
    let vdisc = match cfg.scheme.equation {
        Equation::Hyperbolic => vdisc,
        Equation::Parabolic => vdisc.into_parabolic()?,
    };
    Ok((vdisc, XGrid::periodic(cfg.n_x)?))
}

/// `Δt = ν·Δx/λ_max` for advection, `ν·Δx²/λ_max` for diffusion.
pub fn time_step(equation: Equation, cfl: f64, vdisc: &VDiscretization, grid: &XGrid) -> Result<f64> {
    let (lambda, len) = match equation {
        Equation::Hyperbolic => (vdisc.lambda_max_abs(), grid.dx),
        Equation::Parabolic => (vdisc.lambda_max(), grid.dx * grid.dx),
    };
    if !(lambda > 0.0) {
        return Err(Error::Input("coefficient spectrum vanishes; the CFL number does not fix a step".into()));
    }
    Ok(cfl * len / lambda)
}

/// Mode CFL number `ν_k = λ_k·Δt/Δx` (or `/Δx²`).
pub fn mode_cfl(equation: Equation, vdisc: &VDiscretization, grid: &XGrid, k: usize, dt: f64) -> f64 {
    let lambda = vdisc.spectrum.eigenvalues[k];
    match equation {
        Equation::Hyperbolic => lambda * dt / grid.dx,
        Equation::Parabolic => lambda * dt / (grid.dx * grid.dx),
    }
}

/// Closed-form multiplier of `scheme` on grid mode `(m, k)`.
pub fn closed_form(scheme: &SchemeSpec, vdisc: &VDiscretization, grid: &XGrid, m: usize, k: usize, dt: f64) -> Result<Complex64> {
    let c = mode_coords(m, grid.n_x)?;
    let nu = mode_cfl(scheme.equation, vdisc, grid, k, dt);
    mode_multiplier(scheme, &AmpQuery::with_z(c.y, c.z, nu))
}

/// Mode `(m, k)` with the largest closed-form `|G|`, skipping `m = 0` and
/// `λ_k = 0`, whose factor is one for every scheme. A pole counts as
/// infinitely bad. Ties go to the first mode in `(m, k)` order.
pub fn worst_mode(scheme: &SchemeSpec, vdisc: &VDiscretization, grid: &XGrid, dt: f64) -> Result<(usize, usize)> {
    let mut best: Option<(f64, usize, usize)> = None;
    for m in 1..grid.n_x {
        for k in 0..vdisc.size() {
            if vdisc.spectrum.eigenvalues[k] == 0.0 {
                continue;
            }
            let g = match closed_form(scheme, vdisc, grid, m, k, dt) {
                Ok(g) => g.norm(),
                Err(Error::Pole { .. }) => f64::INFINITY,
                Err(e) => return Err(e),
            };
            if best.is_none_or(|(b, _, _)| g > b) {
                best = Some((g, m, k));
            }
        }
    }
    best.map(|(_, m, k)| (m, k))
        .ok_or_else(|| Error::Input("no nontrivial mode to select".into()))
}

/// Runs `cfg` and returns one record for the initial state and one per step.
///
/// A state that stops being finite aborts the run with its step index.
pub fn run_simulation(cfg: &ExperimentConfig) -> Result<Vec<RunRecord>> {
    cfg.validate()?;
    let (vdisc, grid) = setup(cfg)?;
    let dt = time_step(cfg.scheme.equation, cfg.cfl, &vdisc, &grid)?;
    let mode = match cfg.initial_data {
        InitialData::RandomRankR => None,
        InitialData::Eigenmode { m, k } => Some((m, k)),
        InitialData::WorstMode => Some(worst_mode(&cfg.scheme, &vdisc, &grid, dt)?),
    };
    match mode {
        None => {
            let st = random_lowrank(cfg.n_x, cfg.n_v, cfg.rank, cfg.seed)?;
            let state = match cfg.scheme.approach {
                Approach::FullTensor => State::Full(st.reconstruct()),
                _ => State::LowRank(st),
            };
            let model = Model::<f64>::new(cfg.scheme.equation, vdisc, grid)?;
            trajectory(&model, &cfg.scheme, state, dt, cfg.steps)
        }
        Some((m, k)) => {
            let st = mode_state(m, k, cfg.n_x, &vdisc)?;
            let state = match cfg.scheme.approach {
                Approach::FullTensor => State::Full(st.reconstruct()),
                _ => State::LowRank(st),
            };
            let model = Model::<Complex64>::new(cfg.scheme.equation, vdisc, grid)?;
            trajectory(&model, &cfg.scheme, state, dt, cfg.steps)
        }
    }
}

fn trajectory<T: Scalar>(model: &Model<T>, scheme: &SchemeSpec, mut state: State<T>, dt: f64, steps: usize) -> Result<Vec<RunRecord>> {
    let start = Instant::now();
    let record = |step: usize, s: &State<T>| RunRecord {
        step,
        frobenius: s.frobenius_norm(),
        ortho_residual: s.ortho_residual(),
        wall_time: start.elapsed().as_secs_f64(),
    };
    let mut out = Vec::with_capacity(steps + 1);
    out.push(record(0, &state));
    for n in 1..=steps {
        let report = model.step(scheme, &state, dt).map_err(|e| Error::Step {
            step: n,
            source: Box::new(e),
        })?;
        state = report.state;
        state.check_finite().map_err(|e| Error::Step {
            step: n,
            source: Box::new(e),
        })?;
        out.push(RunRecord {
            frobenius: report.frobenius_after,
            ..record(n, &state)
        });
    }
    Ok(out)
}

/// Final norm within `1 + 1e-8` of the initial one.
pub fn is_stable(records: &[RunRecord]) -> bool {
    match (records.first(), records.last()) {
        (Some(a), Some(b)) => b.frobenius <= a.frobenius * (1.0 + STABLE_GROWTH),
        _ => true,
    }
}

/// Each norm at most the previous one, up to a relative `1e-12`.
pub fn is_nonincreasing(records: &[RunRecord]) -> bool {
    records
        .windows(2)
        .all(|w| w[1].frobenius <= w[0].frobenius * (1.0 + 1e-12))
}

/// Bisects on the CFL number for the largest value whose run passes `verdict`
/// ([`is_stable`] or [`is_nonincreasing`]).
///
/// `lo` must pass and `hi` must fail.
pub fn empirical_threshold(
    base: &ExperimentConfig,
    verdict: fn(&[RunRecord]) -> bool,
    mut lo: f64,
    mut hi: f64,
    tol: f64,
) -> Result<f64> {
    let stable_at = |cfl: f64| -> Result<bool> {
        let cfg = ExperimentConfig { cfl, ..base.clone() };
        match run_simulation(&cfg) {
            Ok(records) => Ok(verdict(&records)),
            // overflow is as unstable as a run gets
            Err(Error::Step { source, .. }) if matches!(*source, Error::NonFinite { .. }) => Ok(false),
            Err(e) => Err(e),
        }
    };
    if !stable_at(lo)? || stable_at(hi)? {
        return Err(Error::Input(format!("[{lo}, {hi}] does not bracket the stability boundary")));
    }
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        if stable_at(mid)? {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(lo)
}

