//! C1 piecewise-cubic fields over a radial mesh.

use std::sync::Arc;

use crate::basis;
use crate::error::Result;
use crate::mesh::RadialMesh;

/// Hermite cubic coefficient vector: (value, derivative) per node. The
/// represented function is C1 across element boundaries by construction.
#[derive(Debug, Clone)]
pub struct HermiteField {
    mesh: Arc<RadialMesh>,
    coeffs: Vec<f64>,
}

impl HermiteField {
    pub fn zero(mesh: Arc<RadialMesh>) -> Self {
        let coeffs = vec![0.0; 2 * mesh.num_nodes()];
        Self { mesh, coeffs }
    }

    pub fn from_coeffs(mesh: Arc<RadialMesh>, coeffs: Vec<f64>) -> Self {
        assert_eq!(coeffs.len(), 2 * mesh.num_nodes());
        Self { mesh, coeffs }
    }

    /// Nodal interpolant of a function with known derivative.
    pub fn interpolate<F, G>(mesh: Arc<RadialMesh>, f: F, df: G) -> Self
    where
        F: Fn(f64) -> f64,
        G: Fn(f64) -> f64,
    {
        let mut coeffs = Vec::with_capacity(2 * mesh.num_nodes());
        for &r in mesh.nodes() {
            coeffs.push(f(r));
            coeffs.push(df(r));
        }
        Self { mesh, coeffs }
    }

    pub fn mesh(&self) -> &Arc<RadialMesh> {
        &self.mesh
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn coeffs_mut(&mut self) -> &mut [f64] {
        &mut self.coeffs
    }

    pub fn node_value(&self, i: usize) -> f64 {
        self.coeffs[2 * i]
    }

    pub fn node_deriv(&self, i: usize) -> f64 {
        self.coeffs[2 * i + 1]
    }

    /// Local coefficients of element `e` in reference order.
    fn local(&self, e: usize) -> [f64; 4] {
        [
            self.coeffs[2 * e],
            self.coeffs[2 * e + 1],
            self.coeffs[2 * e + 2],
            self.coeffs[2 * e + 3],
        ]
    }

    /// Value at reference coordinate `xi` of element `e`.
    pub fn eval_local(&self, e: usize, xi: f64) -> f64 {
        let h = self.mesh.element_len(e);
        let c = self.local(e);
        let n = basis::shape_values(xi);
        c[0] * n[0] + c[1] * h * n[1] + c[2] * n[2] + c[3] * h * n[3]
    }

    /// d/dr at reference coordinate `xi` of element `e`.
    pub fn eval_deriv_local(&self, e: usize, xi: f64) -> f64 {
        let h = self.mesh.element_len(e);
        let c = self.local(e);
        let d = basis::shape_derivs(xi);
        (c[0] * d[0] + c[2] * d[2]) / h + c[1] * d[1] + c[3] * d[3]
    }

    /// d2/dr2 at reference coordinate `xi` of element `e`.
    pub fn eval_deriv2_local(&self, e: usize, xi: f64) -> f64 {
        let h = self.mesh.element_len(e);
        let c = self.local(e);
        let d = basis::shape_second_derivs(xi);
        (c[0] * d[0] + c[2] * d[2]) / (h * h) + (c[1] * d[1] + c[3] * d[3]) / h
    }

    fn locate(&self, r: f64) -> Result<(usize, f64)> {
        let e = self.mesh.locate(r)?;
        let (a, _) = self.mesh.element(e);
        let xi = (r - a) / self.mesh.element_len(e);
        Ok((e, xi))
    }

    pub fn eval(&self, r: f64) -> Result<f64> {
        let (e, xi) = self.locate(r)?;
        Ok(self.eval_local(e, xi))
    }

    pub fn eval_deriv(&self, r: f64) -> Result<f64> {
        let (e, xi) = self.locate(r)?;
        Ok(self.eval_deriv_local(e, xi))
    }

    pub fn eval_deriv2(&self, r: f64) -> Result<f64> {
        let (e, xi) = self.locate(r)?;
        Ok(self.eval_deriv2_local(e, xi))
    }

    pub fn min_node_value(&self) -> f64 {
        self.coeffs
            .iter()
            .step_by(2)
            .fold(f64::INFINITY, |m, &v| m.min(v))
    }

    pub fn max_abs_node_value(&self) -> f64 {
        self.coeffs
            .iter()
            .step_by(2)
            .fold(0.0_f64, |m, &v| m.max(v.abs()))
    }

    /// Sup-norm distance of coefficient vectors, with derivative dofs scaled
    /// by the adjacent element length so both dof families are commensurable.
    pub fn scaled_update_norm(&self, other: &HermiteField) -> f64 {
        let mesh = &self.mesh;
        let last = mesh.num_elements() - 1;
        let mut norm = 0.0_f64;
        for i in 0..mesh.num_nodes() {
            let h = if i == 0 {
                mesh.element_len(0)
            } else {
                mesh.element_len((i - 1).min(last))
            };
            let dv = (self.coeffs[2 * i] - other.coeffs[2 * i]).abs();
            let dd = (self.coeffs[2 * i + 1] - other.coeffs[2 * i + 1]).abs() * h;
            norm = norm.max(dv).max(dd);
        }
        norm
    }

    /// Coefficient-wise self + t * (other - self).
    pub fn blended_toward(&self, other: &HermiteField, t: f64) -> HermiteField {
        let coeffs = self
            .coeffs
            .iter()
            .zip(&other.coeffs)
            .map(|(&a, &b)| a + t * (b - a))
            .collect();
        HermiteField {
            mesh: Arc::clone(&self.mesh),
            coeffs,
        }
    }

    /// Coefficient-wise negation.
    pub fn negated(&self) -> HermiteField {
        HermiteField {
            mesh: Arc::clone(&self.mesh),
            coeffs: self.coeffs.iter().map(|&c| -c).collect(),
        }
    }
}
