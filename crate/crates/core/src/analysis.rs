//! Error norms, convergence-rate fitting, convexity diagnostics, and
//! boundedness probes for sweeps over the perturbation parameter.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::mesh::RadialMesh;
use crate::problem::RadialSolution;
use crate::quadrature::QuadratureRule;
use crate::reconstruction::SolutionField;

/// Weighted norms of the difference between two radial solutions.
#[derive(Debug, Clone, Serialize)]
pub struct ErrorReport {
    /// (int r^{n-1} |u - v|^2)^{1/2}
    pub l2: f64,
    /// (int r^{n-1} |u_r - v_r|^2)^{1/2}
    pub h1_weighted: f64,
    /// (int theta |u_r - v_r|^2)^{1/2} with the slope-sum weight
    pub h1_theta: f64,
    /// (int r^{n-1} |lap u - lap v|^2)^{1/2}
    pub laplacian_l2: f64,
    /// sup |u - v| on the reported interval
    pub sup_interior: f64,
    /// interval used for the sup norm
    pub sup_range: (f64, f64),
}

/// Slope-sum weight sum_{j=0}^{n-1} (u_r)^j (v_r)^{n-1-j}; equals the
/// divided difference of x -> x^n between the two slopes whenever they
/// differ, and n s^{n-1} when both equal s.
pub struct ThetaWeight<'a> {
    exact: &'a dyn RadialSolution,
    approx: &'a dyn RadialSolution,
    dim: u32,
}

impl<'a> ThetaWeight<'a> {
    pub fn new(exact: &'a dyn RadialSolution, approx: &'a dyn RadialSolution) -> Self {
        Self {
            exact,
            approx,
            dim: exact.dim(),
        }
    }

    pub fn eval(&self, r: f64) -> f64 {
        let a = self.exact.u_r(r);
        let b = self.approx.u_r(r);
        theta_sum(a, b, self.dim)
    }
}

/// The sum form evaluated directly from the two slopes.
pub fn theta_sum(a: f64, b: f64, n: u32) -> f64 {
    (0..n).map(|j| a.powi(j as i32) * b.powi((n - 1 - j) as i32)).sum()
}

/// All five error norms by composite Gauss quadrature over `mesh`, with the
/// sup norm sampled on `sup_range` (ten points per element plus endpoints).
pub fn compute_errors(
    exact: &dyn RadialSolution,
    approx: &dyn RadialSolution,
    mesh: &RadialMesh,
    rule: &QuadratureRule,
    sup_range: (f64, f64),
) -> ErrorReport {
    assert_eq!(exact.dim(), approx.dim(), "dimension mismatch");
    let n = exact.dim();
    let pow = n as i32 - 1;
    let mut l2 = 0.0;
    let mut h1 = 0.0;
    let mut h1t = 0.0;
    let mut lap = 0.0;
    for e in 0..mesh.num_elements() {
        let (a, b) = mesh.element(e);
        l2 += rule.integrate(a, b, |r| {
            let d = exact.u(r) - approx.u(r);
            r.powi(pow) * d * d
        });
        h1 += rule.integrate(a, b, |r| {
            let d = exact.u_r(r) - approx.u_r(r);
            r.powi(pow) * d * d
        });
        h1t += rule.integrate(a, b, |r| {
            let d = exact.u_r(r) - approx.u_r(r);
            theta_sum(exact.u_r(r), approx.u_r(r), n) * d * d
        });
        lap += rule.integrate(a, b, |r| {
            let d = exact.laplacian(r) - approx.laplacian(r);
            r.powi(pow) * d * d
        });
    }
    let (lo, hi) = sup_range;
    let samples = 10 * mesh.num_elements();
    let mut sup = 0.0_f64;
    for i in 0..=samples {
        let r = lo + (hi - lo) * i as f64 / samples as f64;
        sup = sup.max((exact.u(r) - approx.u(r)).abs());
    }
    ErrorReport {
        l2: l2.max(0.0).sqrt(),
        h1_weighted: h1.max(0.0).sqrt(),
        h1_theta: h1t.max(0.0).sqrt(),
        laplacian_l2: lap.max(0.0).sqrt(),
        sup_interior: sup,
        sup_range,
    }
}

/// Least-squares fit of log(error) against log(eps).
#[derive(Debug, Clone, Serialize)]
pub struct RateFit {
    pub slope: f64,
    pub intercept: f64,
    /// root-mean-square residual of the fit in log space
    pub residual: f64,
    pub points: usize,
}

/// Fit requires at least three strictly positive (eps, error) pairs.
pub fn fit_rate(points: &[(f64, f64)]) -> Result<RateFit> {
    if points.len() < 3 {
        return Err(Error::InvalidArgument(format!(
            "rate fit needs at least 3 points, got {}",
            points.len()
        )));
    }
    if points.iter().any(|&(e, v)| !(e > 0.0) || !(v > 0.0)) {
        return Err(Error::InvalidArgument(
            "rate fit requires positive abscissae and errors".into(),
        ));
    }
    let m = points.len() as f64;
    let (mut sx, mut sy) = (0.0, 0.0);
    for &(e, v) in points {
        sx += e.ln();
        sy += v.ln();
    }
    let (xbar, ybar) = (sx / m, sy / m);
    let mut sxx = 0.0;
    let mut sxy = 0.0;
    for &(e, v) in points {
        let dx = e.ln() - xbar;
        sxx += dx * dx;
        sxy += dx * (v.ln() - ybar);
    }
    let slope = sxy / sxx;
    let intercept = ybar - slope * xbar;
    let mut ss = 0.0;
    for &(e, v) in points {
        let d = v.ln() - (intercept + slope * e.ln());
        ss += d * d;
    }
    Ok(RateFit {
        slope,
        intercept,
        residual: (ss / m).sqrt(),
        points: points.len(),
    })
}

/// Convexity diagnostics of a reconstructed solution.
#[derive(Debug, Clone, Serialize)]
pub struct ConvexityReport {
    /// min of the laplacian over the sample grid on (0, R]
    pub min_laplacian: f64,
    /// min of u_rr over the sample grid on (0, R]
    pub min_u_rr: f64,
    /// distance from R to the outermost sign change of u_rr (0 if convex)
    pub layer_width: f64,
    /// laplacian at the boundary (should sit near eps)
    pub boundary_laplacian: f64,
    pub samples: usize,
}

/// Sample-based convexity report; `samples` points uniformly on (0, R].
/// The layer width is measured to the outermost sign change of u_rr on the
/// grid (midpoint of the bracketing pair), 0 when no sign change occurs.
pub fn convexity_report(sf: &SolutionField, samples: usize) -> ConvexityReport {
    let radius = sf.mesh().radius();
    let samples = samples.max(10);
    let mut min_lap = f64::INFINITY;
    let mut min_urr = f64::INFINITY;
    let mut outermost_change: Option<f64> = None;
    let mut prev: Option<(f64, f64)> = None;
    for i in 1..=samples {
        let r = radius * i as f64 / samples as f64;
        let lap = sf.laplacian(r);
        let urr = sf.u_rr(r);
        min_lap = min_lap.min(lap);
        min_urr = min_urr.min(urr);
        if let Some((rp, up)) = prev {
            if (up < 0.0) != (urr < 0.0) {
                outermost_change = Some(0.5 * (rp + r));
            }
        }
        prev = Some((r, urr));
    }
    ConvexityReport {
        min_laplacian: min_lap,
        min_u_rr: min_urr,
        layer_width: outermost_change.map_or(0.0, |r| radius - r),
        boundary_laplacian: sf.laplacian(radius),
        samples,
    }
}

/// Sample count that keeps at least ten samples inside an O(eps) layer.
pub fn layer_resolving_samples(sf: &SolutionField, eps: f64) -> usize {
    let base = 10 * sf.mesh().num_elements();
    let wanted = (10.0 * sf.mesh().radius() / eps).ceil() as usize;
    base.max(wanted).min(4_000_000)
}

/// Numerically computed left-hand sides of the uniform a priori bounds.
#[derive(Debug, Clone, Serialize)]
pub struct EstimateProbes {
    pub epsilon: f64,
    /// sup |u| + int |u_r|^n dr (uniformly bounded)
    pub uniform_probe: f64,
    /// sup |u| + sup |u_r| + sup |w| (uniformly bounded)
    pub gradient_probe: f64,
    /// int |w_r|^2 dr + int r^{2(n-1)} |lap|^2 dr (scales like 1/eps)
    pub energy_probe: f64,
}

/// Evaluate the probes on the solver mesh.
pub fn estimate_probe(sf: &SolutionField, rule: &QuadratureRule) -> EstimateProbes {
    let mesh = sf.mesh().clone();
    let n = sf.dim();
    let mut int_ur_n = 0.0;
    let mut int_wr_sq = 0.0;
    let mut int_rlap_sq = 0.0;
    let mut sup_u = 0.0_f64;
    let mut sup_ur = 0.0_f64;
    let mut sup_w = 0.0_f64;
    for e in 0..mesh.num_elements() {
        let (a, b) = mesh.element(e);
        int_ur_n += rule.integrate(a, b, |r| sf.u_r(r).abs().powi(n as i32));
        int_wr_sq += rule.integrate(a, b, |r| {
            let wr = sf.w().eval_deriv(r).unwrap_or(0.0);
            wr * wr
        });
        int_rlap_sq += rule.integrate(a, b, |r| {
            let lap = sf.laplacian(r);
            r.powi(2 * (n as i32 - 1)) * lap * lap
        });
        for k in 0..=10 {
            let r = a + (b - a) * k as f64 / 10.0;
            sup_u = sup_u.max(sf.u(r).abs());
            sup_ur = sup_ur.max(sf.u_r(r).abs());
            sup_w = sup_w.max(sf.w().eval(r).unwrap_or(0.0).abs());
        }
    }
    EstimateProbes {
        epsilon: sf.epsilon(),
        uniform_probe: sup_u + int_ur_n,
        gradient_probe: sup_u + sup_ur + sup_w,
        energy_probe: int_wr_sq + int_rlap_sq,
    }
}
