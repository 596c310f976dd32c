use num_complex::Complex64;

use super::scheme::{Approach, Equation, SchemeSpec, Splitting, Substep};
use super::state::{mode_state, LowRankState, State, StepReport};
use crate::discretize::{fourier_mode, VDiscretization, XGrid};
use crate::error::{Error, Result};
use crate::matcore::{qr_thin, solve_dense, sym_eig, Matrix, Scalar, SpectralDecomposition};

/// Imaginary parts of `VᴴAV` above this (relative) size are an error.
const HERMITIAN_TOL: f64 = 1e-10;

/// Semi-discrete operator for one model problem on a fixed grid.
///
/// Hyperbolic: `F(U) = −c·M_α U Aᵀ + c·M_β U |A|ᵀ` with `c = 1/(2Δx)`.
/// Parabolic: `Q(U) = c·M_β U Aᵀ` with `c = 1/Δx²`.
#[derive(Clone, Debug)]
pub struct Model<T: Scalar = f64> {
    equation: Equation,
    vdisc: VDiscretization,
    grid: XGrid,
    m_alpha: Matrix<T>,
    m_beta: Matrix<T>,
    a_t: Matrix<T>,
    abs_a_t: Matrix<T>,
}

/// Time integrator applied to one split piece.
#[derive(Clone, Copy, Debug)]
enum Rule {
    Euler,
    SspRk2,
    Theta(f64),
}

/// Piece of the form `f(Y) = scale·L·Y·R` with `R` real symmetric.
struct Implicit<'a, T: Scalar> {
    left: &'a Matrix<T>,
    scale: f64,
    right: &'a SpectralDecomposition,
}

/// `Ã = VᴴAV` and what the steppers derive from it.
struct Projection<T: Scalar> {
    a: Matrix<T>,
    abs_a: Matrix<T>,
    spectrum: SpectralDecomposition,
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Piece {
    K,
    S,
    L,
}

impl<T: Scalar> Model<T> {
    pub fn new(equation: Equation, vdisc: VDiscretization, grid: XGrid) -> Result<Self> {
        let vdisc = match equation {
            Equation::Hyperbolic => vdisc,
            Equation::Parabolic => vdisc.into_parabolic()?,
        };
        Ok(Self {
            equation,
            m_alpha: grid.m_alpha.lift(),
            m_beta: grid.m_beta.lift(),
            a_t: vdisc.a.transpose().lift(),
            abs_a_t: vdisc.abs_a.transpose().lift(),
            vdisc,
            grid,
        })
    }

    pub fn equation(&self) -> Equation {
        self.equation
    }

    pub fn vdisc(&self) -> &VDiscretization {
        &self.vdisc
    }

    pub fn grid(&self) -> &XGrid {
        &self.grid
    }

    fn coef(&self) -> f64 {
        match self.equation {
            Equation::Hyperbolic => 0.5 / self.grid.dx,
            Equation::Parabolic => 1.0 / (self.grid.dx * self.grid.dx),
        }
    }

    /// `M_α` for advection, `M_β` for diffusion: the operator the projected
    /// S- and L-equations of the project-then-discretize variant keep.
    fn x_operator(&self) -> &Matrix<T> {
        match self.equation {
            Equation::Hyperbolic => &self.m_alpha,
            Equation::Parabolic => &self.m_beta,
        }
    }

    /// The full right-hand side `F(U)` or `Q(U)`.
    pub fn field(&self, u: &Matrix<T>) -> Matrix<T> {
        let c = self.coef();
        match self.equation {
            Equation::Hyperbolic => {
                let upwind = &(&self.m_beta * u) * &self.abs_a_t;
                let central = &(&self.m_alpha * u) * &self.a_t;
                (&upwind - &central).scale_real(c)
            }
            Equation::Parabolic => (&(&self.m_beta * u) * &self.a_t).scale_real(c),
        }
    }

    fn project(&self, v: &Matrix<T>) -> Result<Projection<T>> {
        let real = v.adjoint_mul(&(&self.a_t * v)).real_hermitian(HERMITIAN_TOL)?;
        let spectrum = sym_eig(&real)?;
        Ok(Projection {
            a: real.lift(),
            abs_a: spectrum.apply_fn(f64::abs).lift(),
            spectrum,
        })
    }

    fn rule(&self, substep: Substep, piece: Piece) -> Result<Rule> {
        Ok(match (self.equation, substep) {
            (Equation::Hyperbolic, Substep::ForwardEuler) => Rule::Euler,
            (Equation::Hyperbolic, Substep::SspRk2) => Rule::SspRk2,
            (Equation::Parabolic, Substep::HybridBeFeBe) => match piece {
                Piece::S => Rule::Theta(0.0),
                Piece::K | Piece::L => Rule::Theta(1.0),
            },
            (Equation::Parabolic, s) if s.theta().is_some() => Rule::Theta(s.theta().unwrap_or(0.0)),
            _ => {
                return Err(Error::Input(format!(
                    "substep {substep} does not apply to {:?} problems",
                    self.equation
                )))
            }
        })
    }

    fn check_shapes(&self, rows: usize, cols: usize) -> Result<()> {
        if rows != self.grid.n_x || cols != self.vdisc.size() {
            return Err(Error::Shape(format!(
                "state is {rows}x{cols}, model is {}x{}",
                self.grid.n_x,
                self.vdisc.size()
            )));
        }
        Ok(())
    }

    /// One step of the full-tensor scheme.
    pub fn full_step(&self, u: &Matrix<T>, substep: Substep, dt: f64) -> Result<Matrix<T>> {
        self.check_shapes(u.rows(), u.cols())?;
        check_dt(dt)?;
        if dt == 0.0 {
            return Ok(u.clone());
        }
        let rule = match (self.equation, substep) {
            (Equation::Parabolic, Substep::HybridBeFeBe) => {
                return Err(Error::Input("hybrid_be_fe_be needs a low-rank state".into()))
            }
            _ => self.rule(substep, Piece::K)?,
        };
        let implicit = Implicit {
            left: &self.m_beta,
            scale: self.coef(),
            right: &self.vdisc.spectrum,
        };
        advance(u, dt, rule, |u| self.field(u), Some(&implicit))
    }

    fn k_step(&self, approach: Approach, rule: Rule, st: LowRankState<T>, h: f64, events: &mut usize) -> Result<LowRankState<T>> {
        let p = self.project(&st.v)?;
        let k = &st.x * &st.s;
        let c = self.coef();
        let vh = st.v.adjoint();
        let implicit = Implicit {
            left: &self.m_beta,
            scale: c,
            right: &p.spectrum,
        };
        let k1 = match (approach, self.equation) {
            (Approach::Dtp, _) => advance(&k, h, rule, |k| &self.field(&(k * &vh)) * &st.v, Some(&implicit))?,
            (Approach::Ptd, Equation::Hyperbolic) => advance(
                &k,
                h,
                rule,
                |k| {
                    let upwind = &(&self.m_beta * k) * &p.abs_a;
                    let central = &(&self.m_alpha * k) * &p.a;
                    (&upwind - &central).scale_real(c)
                },
                None,
            )?,
            (Approach::Ptd, Equation::Parabolic) => {
                advance(&k, h, rule, |k| (&(&self.m_beta * k) * &p.a).scale_real(c), Some(&implicit))?
            }
            (Approach::FullTensor, _) => unreachable!("full-tensor states have no K-step"),
        };
        let qr = qr_thin(&k1)?;
        *events += qr.completions;
        Ok(LowRankState {
            x: qr.q,
            s: qr.r,
            v: st.v,
        })
    }

    fn s_step(&self, approach: Approach, rule: Rule, st: LowRankState<T>, h: f64) -> Result<LowRankState<T>> {
        let p = self.project(&st.v)?;
        let c = self.coef();
        let xmx = st.x.adjoint_mul(&(self.x_operator() * &st.x));
        let vh = st.v.adjoint();
        // the S equation runs backward in time
        let implicit = Implicit {
            left: &xmx,
            scale: -c,
            right: &p.spectrum,
        };
        let s = match (approach, self.equation) {
            (Approach::Dtp, _) => advance(
                &st.s,
                h,
                rule,
                |s| -&st.x.adjoint_mul(&(&self.field(&(&(&st.x * s) * &vh)) * &st.v)),
                Some(&implicit),
            )?,
            (Approach::Ptd, Equation::Hyperbolic) => {
                advance(&st.s, h, rule, |s| (&(&xmx * s) * &p.a).scale_real(c), None)?
            }
            (Approach::Ptd, Equation::Parabolic) => {
                advance(&st.s, h, rule, |s| (&(&xmx * s) * &p.a).scale_real(-c), Some(&implicit))?
            }
            (Approach::FullTensor, _) => unreachable!("full-tensor states have no S-step"),
        };
        Ok(LowRankState { s, ..st })
    }

    fn l_step(&self, approach: Approach, rule: Rule, st: LowRankState<T>, h: f64, events: &mut usize) -> Result<LowRankState<T>> {
        let c = self.coef();
        let xmx = st.x.adjoint_mul(&(self.x_operator() * &st.x));
        // L stored as the r×N_v row block S·Vᴴ
        let l = &st.s * &st.v.adjoint();
        let implicit = Implicit {
            left: &xmx,
            scale: c,
            right: &self.vdisc.spectrum,
        };
        let l1 = match (approach, self.equation) {
            (Approach::Dtp, _) => advance(&l, h, rule, |l| st.x.adjoint_mul(&self.field(&(&st.x * l))), Some(&implicit))?,
            (Approach::Ptd, Equation::Hyperbolic) => {
                advance(&l, h, rule, |l| (&(&xmx * l) * &self.a_t).scale_real(-c), None)?
            }
            (Approach::Ptd, Equation::Parabolic) => {
                advance(&l, h, rule, |l| (&(&xmx * l) * &self.a_t).scale_real(c), Some(&implicit))?
            }
            (Approach::FullTensor, _) => unreachable!("full-tensor states have no L-step"),
        };
        let qr = qr_thin(&l1.adjoint())?;
        *events += qr.completions;
        Ok(LowRankState {
            x: st.x,
            s: qr.r.adjoint(),
            v: qr.q,
        })
    }

    /// Lie–Trotter projector splitting: K, S, L, each over the full step.
    pub fn psi_lie_step(&self, approach: Approach, substep: Substep, st: &LowRankState<T>, dt: f64) -> Result<StepReport<T>> {
        self.psi(approach, substep, Splitting::Lie, st, dt)
    }

    /// Strang projector splitting: K(h/2), S(h/2), L(h), S(h/2), K(h/2).
    pub fn psi_strang_step(&self, approach: Approach, substep: Substep, st: &LowRankState<T>, dt: f64) -> Result<StepReport<T>> {
        self.psi(approach, substep, Splitting::Strang, st, dt)
    }

    fn psi(&self, approach: Approach, substep: Substep, splitting: Splitting, st: &LowRankState<T>, dt: f64) -> Result<StepReport<T>> {
        if approach == Approach::FullTensor {
            return Err(Error::Input("projector splitting needs a low-rank approach".into()));
        }
        self.check_shapes(st.x.rows(), st.v.rows())?;
        check_dt(dt)?;
        let before = st.frobenius_norm();
        let mut events = 0;
        let out = if dt == 0.0 {
            st.clone()
        } else {
            let (rk, rs, rl) = (
                self.rule(substep, Piece::K)?,
                self.rule(substep, Piece::S)?,
                self.rule(substep, Piece::L)?,
            );
            match splitting {
                Splitting::Lie => {
                    let s = self.k_step(approach, rk, st.clone(), dt, &mut events)?;
                    let s = self.s_step(approach, rs, s, dt)?;
                    self.l_step(approach, rl, s, dt, &mut events)?
                }
                Splitting::Strang => {
                    let half = 0.5 * dt;
                    let s = self.k_step(approach, rk, st.clone(), half, &mut events)?;
                    let s = self.s_step(approach, rs, s, half)?;
                    let s = self.l_step(approach, rl, s, dt, &mut events)?;
                    let s = self.s_step(approach, rs, s, half)?;
                    self.k_step(approach, rk, s, half, &mut events)?
                }
            }
        };
        let after = out.frobenius_norm();
        Ok(StepReport {
            state: State::LowRank(out),
            frobenius_before: before,
            frobenius_after: after,
            qr_rank_events: events,
        })
    }

    /// One step of `scheme`, dispatched on the state representation.
    pub fn step(&self, scheme: &SchemeSpec, state: &State<T>, dt: f64) -> Result<StepReport<T>> {
        scheme.validate()?;
        if scheme.equation != self.equation {
            return Err(Error::Input(format!(
                "scheme {scheme} does not match a {:?} model",
                self.equation
            )));
        }
        match (scheme.approach, state) {
            (Approach::FullTensor, State::Full(u)) => {
                let before = u.frobenius_norm();
                let u1 = self.full_step(u, scheme.substep, dt)?;
                Ok(StepReport {
                    frobenius_before: before,
                    frobenius_after: u1.frobenius_norm(),
                    state: State::Full(u1),
                    qr_rank_events: 0,
                })
            }
            (Approach::FullTensor, State::LowRank(_)) => {
                Err(Error::Input(format!("scheme {scheme} needs a full state")))
            }
            (approach, State::LowRank(st)) => self.psi(approach, scheme.substep, scheme.splitting, st, dt),
            (_, State::Full(_)) => Err(Error::Input(format!("scheme {scheme} needs a low-rank state"))),
        }
    }
}

impl Model<Complex64> {
    /// Applies one step of `scheme` to the rank-1 mode `x_m v_kᵀ` and returns
    /// the measured multiplier `⟨U₀, U₁⟩/⟨U₀, U₀⟩` together with the relative
    /// residual `‖U₁ − G·U₀‖/‖U₀‖`, which is small iff the mode is closed.
    pub fn mode_multiplier(&self, scheme: &SchemeSpec, m: usize, k: usize, dt: f64) -> Result<(Complex64, f64)> {
        let n_x = self.grid.n_x;
        let state = match scheme.approach {
            Approach::FullTensor => {
                let x = fourier_mode(m, n_x)?;
                if k >= self.vdisc.size() {
                    return Err(Error::Input(format!("eigenvector index {k} out of range")));
                }
                let v: Matrix<Complex64> = Matrix::column_vector(&self.vdisc.eigenvector(k)).lift();
                State::Full(&x * &v.transpose())
            }
            _ => State::LowRank(mode_state(m, k, n_x, &self.vdisc)?),
        };
        let u0 = state.reconstruct();
        let u1 = self.step(scheme, &state, dt)?.state.reconstruct();
        let g = u0.inner(&u1) / u0.inner(&u0);
        let residual = (&u1 - &u0.scale(g)).frobenius_norm() / u0.frobenius_norm();
        Ok((g, residual))
    }
}

fn check_dt(dt: f64) -> Result<()> {
    if !(dt >= 0.0 && dt.is_finite()) {
        return Err(Error::Input(format!("time step must be finite and nonnegative, got {dt}")));
    }
    Ok(())
}

fn advance<T: Scalar>(
    y: &Matrix<T>,
    h: f64,
    rule: Rule,
    f: impl Fn(&Matrix<T>) -> Matrix<T>,
    implicit: Option<&Implicit<'_, T>>,
) -> Result<Matrix<T>> {
    match rule {
        Rule::Euler => Ok(y + &f(y).scale_real(h)),
        Rule::SspRk2 => {
            let y1 = y + &f(y).scale_real(h);
            let y2 = &y1 + &f(&y1).scale_real(h);
            Ok((y + &y2).scale_real(0.5))
        }
        Rule::Theta(theta) => {
            let rhs = if theta < 1.0 {
                y + &f(y).scale_real((1.0 - theta) * h)
            } else {
                y.clone()
            };
            if theta == 0.0 {
                return Ok(rhs);
            }
            let implicit = implicit.ok_or_else(|| Error::Input("implicit substep without operator".into()))?;
            theta_solve(&rhs, theta * h, implicit)
        }
    }
}

/// Solves `Y − τ·scale·L·Y·R = B` by diagonalizing `R = RΛRᵀ`: each column
/// `j` of `Y·R` solves `(I − τ·scale·λ_j·L)·ŷ_j = (B·R)_j`.
fn theta_solve<T: Scalar>(rhs: &Matrix<T>, tau: f64, op: &Implicit<'_, T>) -> Result<Matrix<T>> {
    let r: Matrix<T> = op.right.eigenvectors.lift();
    let rhs_hat = rhs * &r;
    let n = op.left.rows();
    let mut out = rhs_hat.clone();
    for j in 0..rhs_hat.cols() {
        let c = tau * op.scale * op.right.eigenvalues[j];
        if c == 0.0 {
            continue;
        }
        let system = Matrix::from_fn(n, n, |i, k| {
            let id = if i == k { T::one() } else { T::zero() };
            id - op.left[(i, k)] * T::from_real(c)
        });
        let col = solve_dense(&system, &Matrix::column_vector(&rhs_hat.column(j)))?;
        out.set_column(j, col.as_slice());
    }
    Ok(&out * &r.transpose())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::discretize::{build_modal, build_nodal, mode_coords, uniform_midpoints};
    use crate::integrators::state::random_lowrank;

    fn hyp_model<T: Scalar>(n_x: usize) -> Model<T> {
        let vd = build_nodal(|v| v, &uniform_midpoints(4)).unwrap();
        Model::new(Equation::Hyperbolic, vd, XGrid::periodic(n_x).unwrap()).unwrap()
    }

    fn par_model<T: Scalar>(n_x: usize) -> Model<T> {
        let vd = build_modal(|v| v * v, 4, 8).unwrap();
        Model::new(Equation::Parabolic, vd, XGrid::periodic(n_x).unwrap()).unwrap()
    }

    #[test]
    fn zero_step_is_identity() {
        let st = random_lowrank(12, 4, 2, 1).unwrap();
        for name in ["hyp-dtp-lie-fe", "hyp-ptd-strang-rk2"] {
            let s: SchemeSpec = name.parse().unwrap();
            let out = hyp_model::<f64>(12).step(&s, &State::LowRank(st.clone()), 0.0).unwrap();
            assert_eq!(out.state, State::LowRank(st.clone()));
        }
        let s: SchemeSpec = "par-strang-cn".parse().unwrap();
        let out = par_model::<f64>(12).step(&s, &State::LowRank(st.clone()), 0.0).unwrap();
        assert_eq!(out.state.reconstruct(), st.reconstruct());
    }

    #[test]
    fn full_hyperbolic_mode_multiplier() {
        let model = hyp_model::<Complex64>(16);
        let s: SchemeSpec = "hyp-full-fe".parse().unwrap();
        let dt = 0.7 * model.grid().dx / model.vdisc().lambda_max_abs();
        for m in 0..16 {
            for k in 0..4 {
                let (g, res) = model.mode_multiplier(&s, m, k, dt).unwrap();
                let c = mode_coords(m, 16).unwrap();
                let nu = model.vdisc().spectrum.eigenvalues[k] * dt / model.grid().dx;
                let expect = Complex64::new(1.0 - nu.abs() * c.y, -nu * c.z);
                assert!((g - expect).norm() < 1e-12 && res < 1e-12);
            }
        }
    }

    #[test]
    fn dtp_lie_mode_multiplier() {
        let model = hyp_model::<Complex64>(8);
        let s: SchemeSpec = "hyp-dtp-lie-fe".parse().unwrap();
        let dt = 0.5 * model.grid().dx / model.vdisc().lambda_max_abs();
        let (m, k) = (3, 0);
        let (g, res) = model.mode_multiplier(&s, m, k, dt).unwrap();
        let c = mode_coords(m, 8).unwrap();
        let nu = model.vdisc().spectrum.eigenvalues[k] * dt / model.grid().dx;
        let p1 = Complex64::new(1.0 - nu.abs() * c.y, -nu * c.z);
        let expect = p1 * p1 * (Complex64::new(2.0, 0.0) - p1);
        assert!((g - expect).norm() < 1e-12, "{g} vs {expect}");
        assert!(res < 1e-12);
    }

    #[test]
    fn parabolic_steps_keep_orthonormality() {
        let model = par_model::<f64>(16);
        let st = State::LowRank(random_lowrank(16, 4, 3, 5).unwrap());
        let dt = 0.3 * model.grid().dx.powi(2) / model.vdisc().lambda_max();
        for name in ["par-dtp-lie-theta1", "par-ptd-lie-theta0.5", "par-hybrid", "par-strang-cn"] {
            let s: SchemeSpec = name.parse().unwrap();
            let out = model.step(&s, &st, dt).unwrap();
            assert!(out.state.ortho_residual() < 1e-12, "{name}");
            assert!(out.frobenius_after <= out.frobenius_before, "{name}");
        }
    }

    #[test]
    fn theta_solve_matches_direct_solve() {
        let model = par_model::<f64>(6);
        let u = random_lowrank(6, 4, 4, 2).unwrap().reconstruct();
        let dt = 0.01;
        let u1 = model.full_step(&u, Substep::BackwardEuler, dt).unwrap();
        // u1 − dt·Q(u1) = u
        let back = &u1 - &model.field(&u1).scale_real(dt);
        assert!((&back - &u).frobenius_norm() < 1e-12 * u.frobenius_norm());
    }

    #[test]
    fn scheme_model_mismatch() {
        let model = hyp_model::<f64>(8);
        let st = State::LowRank(random_lowrank(8, 4, 1, 0).unwrap());
        assert!(model.step(&"par-hybrid".parse().unwrap(), &st, 0.1).is_err());
        assert!(model.step(&"hyp-full-fe".parse().unwrap(), &st, 0.1).is_err());
        assert!(model.step(&"hyp-dtp-lie-fe".parse().unwrap(), &st, -1.0).is_err());
    }
}
