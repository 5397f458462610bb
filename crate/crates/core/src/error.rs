//! Error type shared by all solver modules.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// A constructor or operation received an argument outside its contract.
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// An evaluation point fell outside the domain of the mesh or field.
    #[error("coordinate {value} outside domain [{lo}, {hi}]")]
    OutOfDomain { value: f64, lo: f64, hi: f64 },

    /// The source term must be nonnegative; it was sampled below zero.
    #[error("source term is negative at r = {r}: f(r) = {value}")]
    NegativeSource { r: f64, value: f64 },

    /// The concave branch only exists in even dimensions.
    #[error("concave branch requires an even dimension, got n = {0}")]
    UnsupportedBranch(u32),

    /// A lagged-coefficient field went negative where it must stay nonnegative.
    #[error("nonnegativity violated at r = {r}: value = {value}")]
    PositivityViolation { r: f64, value: f64 },

    /// Banded elimination hit a zero pivot.
    #[error("singular system: zero pivot at dof {0}")]
    SingularSystem(usize),

    /// The linearized operator for a Newton step could not be factored.
    #[error("singular Jacobian: zero pivot at dof {0}; fall back to a fixed-point step")]
    SingularJacobian(usize),
}

pub type Result<T> = std::result::Result<T, Error>;
