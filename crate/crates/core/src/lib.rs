//! Classical and discrete Euler-Lagrange equations for `n` identical particles
//! with quadratic interactions, solved through quadratic and transcendental
//! eigenvalue problems.

pub mod celsolve;
pub mod cli;
pub mod convergence;
pub mod delsolve;
pub mod error;
pub mod model;
pub mod numkernel;
pub mod pencil;
pub mod periodic;
pub mod scaleop;

pub use error::{Error, Result};
