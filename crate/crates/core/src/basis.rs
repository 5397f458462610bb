//! Hermite cubic shape functions on the reference element [0, 1].
//!
//! Ordering: value at the left node, derivative at the left node, value at
//! the right node, derivative at the right node. Derivatives returned here
//! are with respect to the reference coordinate; callers apply the chain
//! rule scaling by the element length.

use crate::error::{Error, Result};

/// Shape values at `xi`.
pub fn shape_values(xi: f64) -> [f64; 4] {
    let x2 = xi * xi;
    let x3 = x2 * xi;
    [
        1.0 - 3.0 * x2 + 2.0 * x3,
        xi - 2.0 * x2 + x3,
        3.0 * x2 - 2.0 * x3,
        x3 - x2,
    ]
}

/// First derivatives d/dxi at `xi`.
pub fn shape_derivs(xi: f64) -> [f64; 4] {
    let x2 = xi * xi;
    [
        -6.0 * xi + 6.0 * x2,
        1.0 - 4.0 * xi + 3.0 * x2,
        6.0 * xi - 6.0 * x2,
        3.0 * x2 - 2.0 * xi,
    ]
}

/// Second derivatives d2/dxi2 at `xi`.
pub fn shape_second_derivs(xi: f64) -> [f64; 4] {
    [
        -6.0 + 12.0 * xi,
        -4.0 + 6.0 * xi,
        6.0 - 12.0 * xi,
        6.0 * xi - 2.0,
    ]
}

/// The four shapes or their reference derivatives of the requested order.
pub fn shape_eval(xi: f64, order: u32) -> Result<[f64; 4]> {
    match order {
        0 => Ok(shape_values(xi)),
        1 => Ok(shape_derivs(xi)),
        2 => Ok(shape_second_derivs(xi)),
        _ => Err(Error::InvalidArgument(format!(
            "derivative order must be 0, 1 or 2, got {order}"
        ))),
    }
}
