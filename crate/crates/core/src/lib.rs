//! Numerical analysis of symmetric first-order differential systems
//! `J f' + B f = λ H f`.

pub mod criteria;
pub mod deficiency;
pub mod error;
pub mod expr;
pub mod fixtures;
pub mod gauge;
pub mod gram;
pub mod growth;
pub mod linalg;
pub mod matrix;
pub mod ode;
pub mod propagator;
pub mod quad;
pub mod report;
pub mod system;

pub use error::{HamsysError, Result};
