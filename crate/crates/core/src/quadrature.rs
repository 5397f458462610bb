//! Gauss-Legendre quadrature on [-1, 1] with affine mapping helpers.

use crate::error::{Error, Result};

/// Gauss-Legendre rule: `m` interior abscissae in (-1, 1) with positive
/// weights summing to 2; exact for polynomials of degree <= 2m - 1.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadratureRule {
    points: Vec<f64>,
    weights: Vec<f64>,
}

impl QuadratureRule {
    /// Build the m-point rule. Nodes are the roots of the degree-m Legendre
    /// polynomial, found by Newton iteration from the Chebyshev-like guess.
    pub fn gauss_legendre(m: usize) -> Result<Self> {
        if m < 1 || m > 16 {
            return Err(Error::InvalidArgument(format!(
                "quadrature point count must be in 1..=16, got {m}"
            )));
        }
        let mut points = vec![0.0; m];
        let mut weights = vec![0.0; m];
        let half = m.div_ceil(2);
        for i in 0..half {
            let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (m as f64 + 0.5)).cos();
            // Newton on P_m(x) = 0
            for _ in 0..100 {
                let (p, dp) = legendre_with_deriv(m, x);
                let dx = p / dp;
                x -= dx;
                if dx.abs() < 1e-15 {
                    break;
                }
            }
            let (_, dp) = legendre_with_deriv(m, x);
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            points[i] = -x.abs();
            weights[i] = w;
            points[m - 1 - i] = x.abs();
            weights[m - 1 - i] = w;
        }
        if m % 2 == 1 {
            points[m / 2] = 0.0;
        }
        Ok(Self { points, weights })
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn points(&self) -> &[f64] {
        &self.points
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Quadrature points mapped to [0, 1] with weights summing to 1.
    pub fn unit_interval(&self) -> Vec<(f64, f64)> {
        self.points
            .iter()
            .zip(&self.weights)
            .map(|(&x, &w)| (0.5 * (x + 1.0), 0.5 * w))
            .collect()
    }

    /// Integral of `g` over [a, b] by the mapped rule.
    pub fn integrate<F: FnMut(f64) -> f64>(&self, a: f64, b: f64, mut g: F) -> f64 {
        let mid = 0.5 * (a + b);
        let half = 0.5 * (b - a);
        let mut acc = 0.0;
        for (&x, &w) in self.points.iter().zip(&self.weights) {
            acc += w * g(mid + half * x);
        }
        acc * half
    }
}

/// (P_m(x), P_m'(x)) by the three-term recurrence.
fn legendre_with_deriv(m: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 2..=m {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let dp = (m as f64) * (x * p1 - p0) / (x * x - 1.0);
    (p1, dp)
}
