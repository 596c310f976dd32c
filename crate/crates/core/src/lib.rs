//! Low-rank time integrators for linear advection and diffusion in a
//! position/velocity split form, with the closed-form amplification factors
//! used to check them.

pub mod amplification;
pub mod discretize;
pub mod error;
pub mod harness;
pub mod integrators;
pub mod matcore;

pub use error::{Error, Result};
