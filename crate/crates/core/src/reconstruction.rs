//! Recovery of the solution profile u and its derivatives from the discrete
//! w field, plus the concave-branch solve.
//!
//! u(r) = g(R) - integral over (r, R) of s^{1-n} w(s) ds; the integrand is
//! evaluated through s * (w(s)/s^n), which stays bounded because w vanishes
//! like r^n at the origin.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::field::HermiteField;
use crate::mesh::RadialMesh;
use crate::problem::{ProblemSpec, RadialSolution};
use crate::quadrature::QuadratureRule;
use crate::solver::{solve, SolveConfig, SolveReport};

/// Reconstructed solution: owns the w field and cached per-element suffix
/// integrals so u can be evaluated anywhere. Evaluators are pure and
/// thread-safe.
#[derive(Debug, Clone)]
pub struct SolutionField {
    w: HermiteField,
    dim: u32,
    boundary_value: f64,
    epsilon: f64,
    rule: QuadratureRule,
    /// integral of s^{1-n} w(s) from node i to R
    tail: Vec<f64>,
}

impl SolutionField {
    pub fn w(&self) -> &HermiteField {
        &self.w
    }

    pub fn mesh(&self) -> &Arc<RadialMesh> {
        self.w.mesh()
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn boundary_value(&self) -> f64 {
        self.boundary_value
    }

    /// Sign-flipped copy: represents -u with boundary value -g(R).
    pub fn negated(&self) -> SolutionField {
        SolutionField {
            w: self.w.negated(),
            dim: self.dim,
            boundary_value: -self.boundary_value,
            epsilon: self.epsilon,
            rule: self.rule.clone(),
            tail: self.tail.iter().map(|&t| -t).collect(),
        }
    }

    fn integrand(&self, e: usize, s: f64) -> f64 {
        let (a, _) = self.mesh().element(e);
        let h = self.mesh().element_len(e);
        let xi = (s - a) / h;
        let w = self.w.eval_local(e, xi);
        s * (w / s.powi(self.dim as i32))
    }

    /// u_r(r1)/r1 from the first nodal value of w: the symmetry limit of
    /// both u_rr(0) and u_r(r)/r near the origin.
    fn slope_ratio_at_first_node(&self) -> f64 {
        let r1 = self.mesh().nodes()[1];
        self.w.node_value(1) / r1.powi(self.dim as i32)
    }

    /// Rows (r, u, u_r, u_rr, laplacian) on a uniform grid of `count` points
    /// including both endpoints.
    pub fn sample(&self, count: usize) -> Vec<[f64; 5]> {
        let count = count.max(2);
        let radius = self.mesh().radius();
        (0..count)
            .map(|i| {
                let r = radius * i as f64 / (count - 1) as f64;
                [r, self.u(r), self.u_r(r), self.u_rr(r), self.laplacian(r)]
            })
            .collect()
    }
}

impl RadialSolution for SolutionField {
    fn dim(&self) -> u32 {
        self.dim
    }

    fn u(&self, r: f64) -> f64 {
        let mesh = self.mesh();
        if r >= mesh.radius() {
            return self.boundary_value; // no quadrature applied at r = R
        }
        let e = mesh.locate(r).expect("r validated by caller");
        let (_, b) = mesh.element(e);
        let partial = self.rule.integrate(r, b, |s| self.integrand(e, s));
        self.boundary_value - (partial + self.tail[e + 1])
    }

    fn u_r(&self, r: f64) -> f64 {
        if r == 0.0 {
            return 0.0;
        }
        // below the first node the r^{1-n} weight amplifies sub-resolution
        // interpolation noise (w carries no information there beyond its
        // vanishing order), so slopes follow the symmetric limit profile
        // pinned to the first nodal value
        let r1 = self.mesh().nodes()[1];
        if r < r1 {
            return r * self.slope_ratio_at_first_node();
        }
        let w = self.w.eval(r).expect("r validated by caller");
        r * (w / r.powi(self.dim as i32))
    }

    fn u_rr(&self, r: f64) -> f64 {
        if r == 0.0 {
            return self.laplacian(0.0) / self.dim as f64;
        }
        let r1 = self.mesh().nodes()[1];
        let slope_over_r = if r < r1 {
            self.slope_ratio_at_first_node()
        } else {
            self.u_r(r) / r
        };
        self.laplacian(r) - (self.dim as f64 - 1.0) * slope_over_r
    }

    fn laplacian(&self, r: f64) -> f64 {
        let r1 = self.mesh().nodes()[1];
        if r == 0.0 {
            return self.dim as f64 * self.slope_ratio_at_first_node();
        }
        if r < r1 {
            // linear blend between the symmetry limit and the nodal value,
            // both backed by resolved degrees of freedom
            let at_zero = self.dim as f64 * self.slope_ratio_at_first_node();
            let at_node = self.w.node_deriv(1) / r1.powi(self.dim as i32 - 1);
            return at_zero + (at_node - at_zero) * (r / r1);
        }
        let dw = self.w.eval_deriv(r).expect("r validated by caller");
        r * (dw / r.powi(self.dim as i32))
    }
}

/// Evaluate (u, u_r, u_rr, laplacian) at one radius with a domain check.
pub fn eval_derivatives(sf: &SolutionField, r: f64) -> Result<(f64, f64, f64, f64)> {
    let radius = sf.mesh().radius();
    if !(0.0..=radius).contains(&r) {
        return Err(Error::OutOfDomain {
            value: r,
            lo: 0.0,
            hi: radius,
        });
    }
    Ok((sf.u(r), sf.u_r(r), sf.u_rr(r), sf.laplacian(r)))
}

/// Build the solution profile from a computed w field.
pub fn reconstruct(w: HermiteField, spec: &ProblemSpec) -> SolutionField {
    let rule = QuadratureRule::gauss_legendre(5).expect("valid point count");
    let mesh = Arc::clone(w.mesh());
    let dim = spec.dim();
    // suffix integrals accumulated from R down to 0
    let mut tail = vec![0.0; mesh.num_nodes()];
    let mut acc = 0.0;
    for e in (0..mesh.num_elements()).rev() {
        let (a, b) = mesh.element(e);
        let h = b - a;
        acc += rule.integrate(a, b, |s| {
            let xi = (s - a) / h;
            s * (w.eval_local(e, xi) / s.powi(dim as i32))
        });
        tail[e] = acc;
    }
    SolutionField {
        w,
        dim,
        boundary_value: spec.boundary_value(),
        epsilon: spec.epsilon(),
        rule,
        tail,
    }
}

/// Solve the perturbed problem and reconstruct in one call.
pub fn solve_convex(
    spec: &ProblemSpec,
    mesh: Arc<RadialMesh>,
    cfg: &SolveConfig,
) -> Result<(SolutionField, SolveReport)> {
    let (w, report) = solve(spec, mesh, cfg)?;
    Ok((reconstruct(w, spec), report))
}

/// Concave-branch solve: flip the boundary data, solve the standard
/// problem, and negate. Only even dimensions admit a concave solution.
pub fn solve_concave(
    spec: &ProblemSpec,
    mesh: Arc<RadialMesh>,
    cfg: &SolveConfig,
) -> Result<(SolutionField, SolveReport)> {
    if spec.dim() % 2 != 0 {
        return Err(Error::UnsupportedBranch(spec.dim()));
    }
    let flipped = spec
        .with_boundary_value(-spec.boundary_value())
        .with_epsilon(spec.epsilon().abs());
    let (hat, report) = solve_convex(&flipped, mesh, cfg)?;
    Ok((hat.negated(), report))
}
