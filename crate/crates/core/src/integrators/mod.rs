//! Full-tensor reference schemes and the projector-splitting integrator in
//! factored form.

mod model;
mod scheme;
mod state;

pub use model::Model;
pub use scheme::{Approach, Equation, SchemeSpec, Splitting, Substep};
pub use state::{init_lowrank, mode_state, random_lowrank, LowRankState, State, StepReport, ORTHO_TOL};
