//! Numerical toolkit for the restriction-extension operator on block-radial
//! functions, its dyadic pieces and the limiting absorption resolvent.

pub mod cli;
pub mod dyadic;
pub mod error;
pub mod harness;
pub mod kernels;
pub mod lap;
pub mod oscint;
pub mod profile;
pub mod quadrature;
pub mod specfun;
pub mod transform;

pub use error::{Error, Result};
