//! Ground states and best constants for a family of weighted fourth-order
//! minimization problems on R^n.
//!
//! The library evaluates the closed-form constants of the problem exactly,
//! reduces the radial quotients to autonomous 1D problems through the
//! log-radial change of variables, minimizes them with a preconditioned
//! descent on the unit L^q sphere, cross-validates against explicit
//! extremal functions by high-accuracy radial quadrature, classifies
//! symmetry breaking pointwise in parameter space, and follows the
//! coupling-to-infinity continuation down to the lower-order ground state.

pub mod asymptotics;
pub mod constants;
pub mod emden_fowler;
pub mod error;
pub mod exact;
pub mod gamma;
mod linalg;
pub mod params;
pub mod quadrature;
pub mod solvers;
pub mod symmetry;

pub use error::{Error, Result};
pub use params::ProblemParams;
