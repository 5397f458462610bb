//! Weak-form assembly of the linearized fixed-point system over the Hermite
//! space, essential constraints at the origin, and the banded solve.
//!
//! The bilinear form for one lagged-coefficient step reads, for trial psi and
//! test chi vanishing (value and slope) at the origin:
//!
//!   eps * int psi_r chi_r + eps (n-1) * int (1/r) psi_r chi
//!     + int weight(psi_k, r) psi chi  =  int L_f chi + eps^2 R^{n-1} chi(R)
//!
//! where the boundary term imposes the slope condition at R weakly. All
//! integrals use interior Gauss points only, so r = 0 is never sampled.

use crate::banded::{relative_residual, BandedMatrix};
use crate::basis;
use crate::error::{Error, Result};
use crate::field::HermiteField;
use crate::problem::{CumulativeSource, ProblemSpec};
use crate::quadrature::QuadratureRule;

/// Reaction coefficient of the linearized operator, evaluated through the
/// overflow-safe ratio (psi / r^n): equals psi^{n-1} / (n r^{n(n-1)}).
pub fn singular_weight(psi_val: f64, r: f64, n: u32) -> Result<f64> {
    if !(r > 0.0) {
        return Err(Error::OutOfDomain {
            value: r,
            lo: f64::MIN_POSITIVE,
            hi: f64::INFINITY,
        });
    }
    let ratio = psi_val / r.powi(n as i32);
    Ok(ratio.powi(n as i32 - 1) / n as f64)
}

/// Assembled linear system plus the essential-constraint list.
#[derive(Debug, Clone)]
pub struct BandedSystem {
    pub matrix: BandedMatrix,
    pub rhs: Vec<f64>,
    pub constraints: Vec<(usize, f64)>,
}

impl BandedSystem {
    /// Symmetric-elimination style application: constrained columns move to
    /// the right-hand side, constrained rows become identity-with-value.
    pub fn apply_constraints(&mut self) {
        for &(dof, value) in &self.constraints {
            let n = self.matrix.size();
            let kl = self.matrix.lower_bandwidth();
            let ku = self.matrix.upper_bandwidth();
            let lo = dof.saturating_sub(ku);
            let hi = (dof + kl + 1).min(n);
            for i in lo..hi {
                if i != dof && self.matrix.in_band(i, dof) {
                    self.rhs[i] -= self.matrix.get(i, dof) * value;
                    self.matrix.set(i, dof, 0.0);
                }
            }
            let (jlo, jhi) = self.matrix.row_range(dof);
            for j in jlo..jhi {
                self.matrix.set(dof, j, 0.0);
            }
            self.matrix.set(dof, dof, 1.0);
            self.rhs[dof] = value;
        }
    }

    /// Direct banded solve; returns the solution and the relative residual
    /// max|Ax - b| / max|b|.
    pub fn solve(&self) -> Result<(Vec<f64>, f64)> {
        let x = self.matrix.lu()?.solve(&self.rhs);
        let res = relative_residual(&self.matrix, &x, &self.rhs);
        Ok((x, res))
    }
}

/// Dof bookkeeping: two dofs per node, (value, slope); element e couples the
/// dofs of nodes e and e+1.
pub fn element_dofs(e: usize) -> [usize; 4] {
    [2 * e, 2 * e + 1, 2 * e + 2, 2 * e + 3]
}

/// Reaction weight sampled at a quadrature point from the lagged iterate.
/// Values below -1e-9 of the nodal scale violate the nonnegativity
/// precondition; interpolation undershoots smaller than that are clamped to
/// zero (the iterate-level gate in the solver is tighter).
fn lagged_weight(psi_k: &HermiteField, e: usize, xi: f64, r: f64, n: u32, scale: f64) -> Result<f64> {
    let v = psi_k.eval_local(e, xi);
    if v < -1e-9 * scale {
        return Err(Error::PositivityViolation { r, value: v });
    }
    singular_weight(v.max(0.0), r, n)
}

/// Assemble the lagged-coefficient system for one fixed-point step.
pub fn assemble_picard(
    spec: &ProblemSpec,
    lf: &CumulativeSource,
    psi_k: &HermiteField,
    rule: &QuadratureRule,
) -> Result<BandedSystem> {
    let mesh = psi_k.mesh();
    let n = spec.dim();
    let eps = spec.epsilon();
    if !(eps > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "perturbation parameter must be positive, got {eps}"
        )));
    }
    let num_dofs = 2 * mesh.num_nodes();
    let mut matrix = BandedMatrix::new(num_dofs, 3, 3);
    let mut rhs = vec![0.0; num_dofs];
    let unit = rule.unit_interval();
    let scale = psi_k.max_abs_node_value().max(f64::MIN_POSITIVE);

    for e in 0..mesh.num_elements() {
        let (xa, _) = mesh.element(e);
        let h = mesh.element_len(e);
        let dofs = element_dofs(e);
        let dof_scale = [1.0, h, 1.0, h];
        let mut local = [[0.0_f64; 4]; 4];
        let mut local_rhs = [0.0_f64; 4];
        for &(xi, wq) in &unit {
            let r = xa + h * xi;
            let shp = basis::shape_values(xi);
            let dshp = basis::shape_derivs(xi);
            let weight = lagged_weight(psi_k, e, xi, r, n, scale)?;
            let lf_val = lf.eval(r)?;
            let factor = wq * h;
            for i in 0..4 {
                let chi = dof_scale[i] * shp[i];
                let chi_r = dof_scale[i] * dshp[i] / h;
                local_rhs[i] += factor * lf_val * chi;
                for j in 0..4 {
                    let psi = dof_scale[j] * shp[j];
                    let psi_r = dof_scale[j] * dshp[j] / h;
                    local[i][j] += factor
                        * (eps * psi_r * chi_r
                            + eps * (n as f64 - 1.0) / r * psi_r * chi
                            + weight * psi * chi);
                }
            }
        }
        for i in 0..4 {
            rhs[dofs[i]] += local_rhs[i];
            for j in 0..4 {
                matrix.add(dofs[i], dofs[j], local[i][j]);
            }
        }
    }

    // natural slope condition at R enters through the boundary term
    let last_value_dof = num_dofs - 2;
    rhs[last_value_dof] += eps * eps * mesh.radius().powi(n as i32 - 1);

    Ok(BandedSystem {
        matrix,
        rhs,
        constraints: vec![(0, 0.0), (1, 0.0)],
    })
}

/// Assemble the Newton correction system at `psi`: the matrix is the
/// Jacobian of the discrete residual (reaction weight n times the lagged
/// one), the right-hand side is minus the residual itself, so the solved
/// correction is added to `psi`.
pub fn assemble_newton(
    spec: &ProblemSpec,
    lf: &CumulativeSource,
    psi: &HermiteField,
    rule: &QuadratureRule,
) -> Result<BandedSystem> {
    let mesh = psi.mesh();
    let n = spec.dim();
    let eps = spec.epsilon();
    let num_dofs = 2 * mesh.num_nodes();
    let mut matrix = BandedMatrix::new(num_dofs, 3, 3);
    let mut rhs = vec![0.0; num_dofs];
    let unit = rule.unit_interval();
    let scale = psi.max_abs_node_value().max(f64::MIN_POSITIVE);

    for e in 0..mesh.num_elements() {
        let (xa, _) = mesh.element(e);
        let h = mesh.element_len(e);
        let dofs = element_dofs(e);
        let dof_scale = [1.0, h, 1.0, h];
        let mut local = [[0.0_f64; 4]; 4];
        let mut local_rhs = [0.0_f64; 4];
        for &(xi, wq) in &unit {
            let r = xa + h * xi;
            let shp = basis::shape_values(xi);
            let dshp = basis::shape_derivs(xi);
            let weight = lagged_weight(psi, e, xi, r, n, scale)?;
            let psi_val = psi.eval_local(e, xi).max(0.0);
            let psi_r = psi.eval_deriv_local(e, xi);
            let lf_val = lf.eval(r)?;
            let factor = wq * h;
            for i in 0..4 {
                let chi = dof_scale[i] * shp[i];
                let chi_r = dof_scale[i] * dshp[i] / h;
                // minus the residual of the current iterate
                local_rhs[i] -= factor
                    * (eps * psi_r * chi_r
                        + eps * (n as f64 - 1.0) / r * psi_r * chi
                        + weight * psi_val * chi
                        - lf_val * chi);
                for j in 0..4 {
                    let trial = dof_scale[j] * shp[j];
                    let trial_r = dof_scale[j] * dshp[j] / h;
                    local[i][j] += factor
                        * (eps * trial_r * chi_r
                            + eps * (n as f64 - 1.0) / r * trial_r * chi
                            + n as f64 * weight * trial * chi);
                }
            }
        }
        for i in 0..4 {
            rhs[dofs[i]] += local_rhs[i];
            for j in 0..4 {
                matrix.add(dofs[i], dofs[j], local[i][j]);
            }
        }
    }

    let last_value_dof = num_dofs - 2;
    rhs[last_value_dof] += eps * eps * mesh.radius().powi(n as i32 - 1);

    Ok(BandedSystem {
        matrix,
        rhs,
        constraints: vec![(0, 0.0), (1, 0.0)],
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::RadialMesh;
    use crate::problem::SourceFn;
    use approx::assert_abs_diff_eq;
    use std::sync::Arc;

    fn rule() -> QuadratureRule {
        QuadratureRule::gauss_legendre(5).unwrap()
    }

    #[test]
    fn weight_with_monomial_profile() {
        // psi = r^n makes the ratio one: weight = 1/n
        for n in [2_u32, 3, 4] {
            for r in [0.1_f64, 0.5, 2.0] {
                let w = singular_weight(r.powi(n as i32), r, n).unwrap();
                assert_abs_diff_eq!(w, 1.0 / n as f64, epsilon = 1e-14);
            }
        }
    }

    #[test]
    fn weight_zero_psi_and_domain_error() {
        assert_eq!(singular_weight(0.0, 0.3, 4).unwrap(), 0.0);
        assert!(singular_weight(1.0, 0.0, 2).is_err());
        assert!(singular_weight(1.0, -0.5, 2).is_err());
    }

    #[test]
    fn weight_matches_direct_algebraic_form() {
        // n = 2, psi = 0.02, r = 0.1: (0.02 / 0.01) / 2 = 1.0
        let w = singular_weight(0.02, 0.1, 2).unwrap();
        assert_abs_diff_eq!(w, 1.0, epsilon = 1e-12);
        // direct form psi^{n-1} / (n r^{n(n-1)}) must agree
        for (psi, r, n) in [(0.3, 0.4, 3_u32), (1.7, 0.9, 4), (0.02, 0.1, 2)] {
            let a = singular_weight(psi, r, n).unwrap();
            let b = psi.powi(n as i32 - 1) / (n as f64 * r.powi((n * (n - 1)) as i32));
            assert!((a - b).abs() <= 1e-12 * b.abs().max(1.0));
        }
    }

    fn spec(n: u32, eps: f64, f: impl Fn(f64) -> f64 + Send + Sync + 'static) -> ProblemSpec {
        ProblemSpec::new(n, 1.0, 0.0, eps, SourceFn::new(f)).unwrap()
    }

    #[test]
    fn one_element_zero_source_recovers_slope_condition() {
        let spec = spec(2, 1.0, |_| 0.0);
        let mesh = Arc::new(RadialMesh::uniform(1.0, 1).unwrap());
        let lf = CumulativeSource::new(Arc::clone(&mesh), 2, spec.source().clone(), rule()).unwrap();
        let psi0 = HermiteField::zero(Arc::clone(&mesh));
        let mut sys = assemble_picard(&spec, &lf, &psi0, &rule()).unwrap();
        sys.apply_constraints();
        let (x, res) = sys.solve().unwrap();
        assert!(res <= 1e-12);
        let w = HermiteField::from_coeffs(mesh, x);
        assert_eq!(w.eval(0.0).unwrap(), 0.0);
        assert_eq!(w.eval_deriv(0.0).unwrap(), 0.0);
        // natural condition: w_r(R) = eps R^{n-1} = 1 up to discretization
        assert_abs_diff_eq!(w.eval_deriv(1.0).unwrap(), 1.0, epsilon = 1e-10);
    }

    #[test]
    fn constraints_make_identity_rows() {
        let spec = spec(2, 0.5, |_| 1.0);
        let mesh = Arc::new(RadialMesh::uniform(1.0, 3).unwrap());
        let lf = CumulativeSource::new(Arc::clone(&mesh), 2, spec.source().clone(), rule()).unwrap();
        let psi0 = HermiteField::interpolate(Arc::clone(&mesh), |r| 0.25 * r * r, |r| 0.5 * r);
        let mut sys = assemble_picard(&spec, &lf, &psi0, &rule()).unwrap();
        sys.apply_constraints();
        for dof in [0usize, 1] {
            let (lo, hi) = sys.matrix.row_range(dof);
            for j in lo..hi {
                let expect = if j == dof { 1.0 } else { 0.0 };
                assert_eq!(sys.matrix.get(dof, j), expect);
            }
            assert_eq!(sys.rhs[dof], 0.0);
        }
        let (x, _) = sys.solve().unwrap();
        assert_eq!(x[0], 0.0);
        assert_eq!(x[1], 0.0);
    }

    #[test]
    fn prescribed_value_is_bit_exact_after_solve() {
        let spec = spec(3, 1.0, |_| 1.0);
        let mesh = Arc::new(RadialMesh::uniform(1.0, 2).unwrap());
        let lf = CumulativeSource::new(Arc::clone(&mesh), 3, spec.source().clone(), rule()).unwrap();
        let psi0 = HermiteField::zero(Arc::clone(&mesh));
        let mut sys = assemble_picard(&spec, &lf, &psi0, &rule()).unwrap();
        let c = 0.731;
        sys.constraints.push((3, c));
        sys.apply_constraints();
        let (x, _) = sys.solve().unwrap();
        assert_eq!(x[3], c);
    }

    #[test]
    fn empty_constraint_list_leaves_system_unchanged() {
        let spec = spec(2, 1.0, |_| 1.0);
        let mesh = Arc::new(RadialMesh::uniform(1.0, 2).unwrap());
        let lf = CumulativeSource::new(Arc::clone(&mesh), 2, spec.source().clone(), rule()).unwrap();
        let psi0 = HermiteField::zero(Arc::clone(&mesh));
        let mut sys = assemble_picard(&spec, &lf, &psi0, &rule()).unwrap();
        sys.constraints.clear();
        let before = sys.clone();
        sys.apply_constraints();
        assert_eq!(sys.rhs, before.rhs);
        for i in 0..sys.matrix.size() {
            let (lo, hi) = sys.matrix.row_range(i);
            for j in lo..hi {
                assert_eq!(sys.matrix.get(i, j), before.matrix.get(i, j));
            }
        }
    }

    #[test]
    fn load_vector_scales_with_source() {
        // doubling f doubles L_f and hence the interior load entries
        let mesh = Arc::new(RadialMesh::uniform(1.0, 3).unwrap());
        let psi0 = HermiteField::interpolate(Arc::clone(&mesh), |r| r * r, |r| 2.0 * r);
        let spec1 = spec(2, 1.0, |_| 1.5);
        let spec2 = spec(2, 1.0, |_| 3.0);
        let lf1 = CumulativeSource::new(Arc::clone(&mesh), 2, spec1.source().clone(), rule()).unwrap();
        let lf2 = CumulativeSource::new(Arc::clone(&mesh), 2, spec2.source().clone(), rule()).unwrap();
        let s1 = assemble_picard(&spec1, &lf1, &psi0, &rule()).unwrap();
        let s2 = assemble_picard(&spec2, &lf2, &psi0, &rule()).unwrap();
        let eps_term = 1.0; // eps^2 R^{n-1} lands on the last value dof
        let last = s1.rhs.len() - 2;
        for i in 0..s1.rhs.len() {
            let (a, b) = if i == last {
                (s1.rhs[i] - eps_term, s2.rhs[i] - eps_term)
            } else {
                (s1.rhs[i], s2.rhs[i])
            };
            assert!((2.0 * a - b).abs() <= 1e-12 * b.abs().max(1e-30), "dof {i}");
        }
    }

    #[test]
    fn assembled_matrix_is_not_symmetric() {
        // the 1/r convection term breaks symmetry for every n >= 2
        let spec = spec(2, 1.0, |_| 1.0);
        let mesh = Arc::new(RadialMesh::uniform(1.0, 2).unwrap());
        let lf = CumulativeSource::new(Arc::clone(&mesh), 2, spec.source().clone(), rule()).unwrap();
        let psi0 = HermiteField::zero(Arc::clone(&mesh));
        let sys = assemble_picard(&spec, &lf, &psi0, &rule()).unwrap();
        let mut asym = 0.0_f64;
        for i in 0..sys.matrix.size() {
            let (lo, hi) = sys.matrix.row_range(i);
            for j in lo..hi {
                asym = asym.max((sys.matrix.get(i, j) - sys.matrix.get(j, i)).abs());
            }
        }
        assert!(asym > 1e-3, "expected nonsymmetric assembly, skew {asym}");
    }

    #[test]
    fn negative_lagged_iterate_rejected() {
        let spec = spec(2, 1.0, |_| 1.0);
        let mesh = Arc::new(RadialMesh::uniform(1.0, 2).unwrap());
        let lf = CumulativeSource::new(Arc::clone(&mesh), 2, spec.source().clone(), rule()).unwrap();
        let psi = HermiteField::interpolate(Arc::clone(&mesh), |r| -r, |_| -1.0);
        let res = assemble_picard(&spec, &lf, &psi, &rule());
        assert!(matches!(res, Err(Error::PositivityViolation { .. })));
    }
}
