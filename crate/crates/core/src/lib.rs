//! Random means of distributions under random discrete distributions of the
//! Poisson-Dirichlet family: exchangeable partition probabilities, exact moment
//! formulas, Monte Carlo samplers and a registry of distributional checks.

pub mod discrete;
pub mod error;
pub mod numeric;
pub mod partition;
pub mod pmean;
pub mod quadrature;
pub mod sampling;
pub mod shape;
pub mod specialfn;
pub mod verify;

pub use error::{Error, Result};
