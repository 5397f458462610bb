//! Fixed-point solution of the reduced second-order problem for
//! w = r^{n-1} u_r, with optional Newton acceleration.
//!
//! Each step freezes the reaction weight at the previous iterate and solves
//! the resulting linear problem; iterates stay nonnegative, which is what
//! makes the linearized operator coercive.

use std::sync::Arc;

use serde::Serialize;

use crate::assembly::{assemble_newton, assemble_picard};
use crate::error::{Error, Result};
use crate::field::HermiteField;
use crate::mesh::RadialMesh;
use crate::problem::{CumulativeSource, ProblemSpec};
use crate::quadrature::QuadratureRule;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Scheme {
    Picard,
    Newton,
    PicardThenNewton,
}

impl std::str::FromStr for Scheme {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "picard" => Ok(Scheme::Picard),
            "newton" => Ok(Scheme::Newton),
            "picard-then-newton" => Ok(Scheme::PicardThenNewton),
            other => Err(format!(
                "unknown scheme '{other}' (expected picard, newton or picard-then-newton)"
            )),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct SolveConfig {
    /// sup-norm tolerance on the (length-scaled) coefficient update
    pub tol: f64,
    pub max_iter: usize,
    pub scheme: Scheme,
    /// step fraction in (0, 1]; halved automatically (at most 4 times)
    /// whenever the update norm fails to decrease
    pub damping: f64,
    /// relative nonnegativity tolerance on nodal values
    pub neg_clip: f64,
    /// Gauss points per element
    pub quad_points: usize,
    /// stream per-iteration records to stderr
    pub verbose: bool,
}

impl Default for SolveConfig {
    fn default() -> Self {
        Self {
            tol: 1e-10,
            max_iter: 100,
            scheme: Scheme::Picard,
            damping: 1.0,
            neg_clip: 1e-10,
            quad_points: 5,
            verbose: false,
        }
    }
}

impl SolveConfig {
    fn validate(&self) -> Result<()> {
        if !(self.tol > 0.0) {
            return Err(Error::InvalidArgument("tol must be positive".into()));
        }
        if self.max_iter == 0 {
            return Err(Error::InvalidArgument("max_iter must be at least 1".into()));
        }
        if !(self.damping > 0.0 && self.damping <= 1.0) {
            return Err(Error::InvalidArgument(
                "damping must lie in (0, 1]".into(),
            ));
        }
        Ok(())
    }
}

/// Iteration diagnostics for one solve.
#[derive(Debug, Clone, Serialize)]
pub struct SolveReport {
    pub iterations: usize,
    pub converged: bool,
    /// scaled sup norm of each applied update
    pub update_norms: Vec<f64>,
    /// final strong residual, max over quadrature points
    pub residual: f64,
    /// minimum nodal value of the final iterate
    pub min_nodal: f64,
    /// most negative (min nodal / max abs nodal) seen along the iteration
    pub worst_relative_min: f64,
    /// largest relative residual reported by the banded solves
    pub linear_residual: f64,
}

/// Nodal interpolant of (eps/n) r^n: satisfies both origin conditions and
/// the slope condition at R exactly.
pub fn initial_iterate(spec: &ProblemSpec, mesh: Arc<RadialMesh>) -> HermiteField {
    let n = spec.dim() as f64;
    let eps = spec.epsilon();
    HermiteField::interpolate(
        mesh,
        move |r| eps / n * r.powf(n),
        move |r| eps * r.powf(n - 1.0),
    )
}

/// Max over quadrature points of the pointwise equation defect
/// |-eps (psi_rr - (n-1) psi_r / r) + (1/n)(psi/r^n)^{n-1} psi - L_f|.
pub fn strong_residual(
    spec: &ProblemSpec,
    lf: &CumulativeSource,
    psi: &HermiteField,
    rule: &QuadratureRule,
) -> f64 {
    let mesh = psi.mesh();
    let n = spec.dim();
    let eps = spec.epsilon();
    let unit = rule.unit_interval();
    let mut worst = 0.0_f64;
    for e in 0..mesh.num_elements() {
        let (xa, _) = mesh.element(e);
        let h = mesh.element_len(e);
        for &(xi, _) in &unit {
            let r = xa + h * xi;
            let v = psi.eval_local(e, xi);
            let dv = psi.eval_deriv_local(e, xi);
            let d2v = psi.eval_deriv2_local(e, xi);
            let ratio = v / r.powi(n as i32);
            let reaction = ratio.powi(n as i32 - 1) * v / n as f64;
            let lf_val = lf.eval(r).unwrap_or(0.0);
            let defect = -eps * (d2v - (n as f64 - 1.0) * dv / r) + reaction - lf_val;
            worst = worst.max(defect.abs());
        }
    }
    worst
}

/// Single Newton correction from `psi`; quadratically convergent near the
/// fixed point. A zero pivot in the Jacobian surfaces as
/// [`Error::SingularJacobian`] so drivers can fall back to a fixed-point step.
pub fn newton_step(
    spec: &ProblemSpec,
    lf: &CumulativeSource,
    psi: &HermiteField,
    rule: &QuadratureRule,
) -> Result<HermiteField> {
    let mut sys = assemble_newton(spec, lf, psi, rule)?;
    sys.apply_constraints();
    let (delta, _) = sys.solve().map_err(|e| match e {
        Error::SingularSystem(k) => Error::SingularJacobian(k),
        other => other,
    })?;
    let coeffs = psi
        .coeffs()
        .iter()
        .zip(&delta)
        .map(|(&a, &d)| a + d)
        .collect();
    Ok(HermiteField::from_coeffs(Arc::clone(psi.mesh()), coeffs))
}

/// Solve the reduced problem on `mesh` starting from the standard initial
/// iterate.
pub fn solve(
    spec: &ProblemSpec,
    mesh: Arc<RadialMesh>,
    cfg: &SolveConfig,
) -> Result<(HermiteField, SolveReport)> {
    let start = initial_iterate(spec, Arc::clone(&mesh));
    solve_from(spec, start, cfg)
}

/// Solve starting from a caller-supplied nonnegative iterate.
pub fn solve_from(
    spec: &ProblemSpec,
    start: HermiteField,
    cfg: &SolveConfig,
) -> Result<(HermiteField, SolveReport)> {
    cfg.validate()?;
    if !(spec.epsilon() > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "perturbed solve requires a positive perturbation parameter, got {}",
            spec.epsilon()
        )));
    }
    let mesh = Arc::clone(start.mesh());
    let rule = QuadratureRule::gauss_legendre(cfg.quad_points)?;
    let lf = CumulativeSource::new(
        Arc::clone(&mesh),
        spec.dim(),
        spec.source().clone(),
        rule.clone(),
    )?;

    let mut psi = start;
    let mut damping = cfg.damping;
    let mut halvings = 0;
    let mut prev_norm = f64::INFINITY;
    let mut update_norms = Vec::new();
    let mut worst_relative_min = f64::INFINITY;
    let mut linear_residual = 0.0_f64;
    let mut converged = false;

    // Newton takes over once the fixed-point sweep has localized the
    // solution; at small eps the fixed-point map contracts like 1 - O(eps),
    // so the handover happens after a fixed number of sweeps at the latest.
    let field_scale = |f: &HermiteField| f.max_abs_node_value().max(1.0);
    let switch_tol = |f: &HermiteField| (1e-2 * field_scale(f)).max(10.0 * cfg.tol);

    for iter in 1..=cfg.max_iter {
        let mut use_newton = match cfg.scheme {
            Scheme::Picard => false,
            Scheme::Newton => true,
            Scheme::PicardThenNewton => {
                iter > 20 || (prev_norm.is_finite() && prev_norm <= switch_tol(&psi))
            }
        };

        let mut step_residual = 0.0;
        let mut candidate = None;
        if use_newton {
            match newton_step(spec, &lf, &psi, &rule) {
                Ok(next) => {
                    // reject a diverging correction and fall back for this step
                    let norm = next.scaled_update_norm(&psi);
                    if norm <= prev_norm.max(switch_tol(&psi)) {
                        candidate = Some(next);
                    }
                }
                Err(Error::SingularJacobian(_)) => {}
                Err(other) => return Err(other),
            }
            if candidate.is_none() {
                use_newton = false;
            }
        }
        let candidate = match candidate {
            Some(c) => c,
            None => {
                let (c, res) = picard_step(spec, &lf, &psi, &rule)?;
                step_residual = res;
                linear_residual = linear_residual.max(res);
                c
            }
        };

        let next = if use_newton {
            candidate
        } else {
            psi.blended_toward(&candidate, damping)
        };
        let norm = next.scaled_update_norm(&psi);
        update_norms.push(norm);

        let min_nodal = next.min_node_value();
        let max_abs = next.max_abs_node_value().max(f64::MIN_POSITIVE);
        worst_relative_min = worst_relative_min.min(min_nodal / max_abs);
        if min_nodal < -cfg.neg_clip * max_abs {
            let idx = (0..next.mesh().num_nodes())
                .min_by(|&a, &b| next.node_value(a).total_cmp(&next.node_value(b)))
                .unwrap();
            return Err(Error::PositivityViolation {
                r: next.mesh().nodes()[idx],
                value: min_nodal,
            });
        }

        if cfg.verbose {
            eprintln!(
                "{{\"iter\":{iter},\"update_norm\":{norm:e},\"residual\":{step_residual:e},\"damping\":{damping},\"newton\":{use_newton}}}"
            );
        }

        psi = next;
        if norm <= cfg.tol {
            converged = true;
        } else if !use_newton && norm >= prev_norm * (1.0 - 1e-12) && halvings < 4 {
            damping *= 0.5;
            halvings += 1;
        }
        prev_norm = norm;
        if converged {
            break;
        }
    }

    let residual = strong_residual(spec, &lf, &psi, &rule);
    let report = SolveReport {
        iterations: update_norms.len(),
        converged,
        update_norms,
        residual,
        min_nodal: psi.min_node_value(),
        worst_relative_min,
        linear_residual,
    };
    Ok((psi, report))
}

fn picard_step(
    spec: &ProblemSpec,
    lf: &CumulativeSource,
    psi: &HermiteField,
    rule: &QuadratureRule,
) -> Result<(HermiteField, f64)> {
    let mut sys = assemble_picard(spec, lf, psi, rule)?;
    sys.apply_constraints();
    let (x, res) = sys.solve()?;
    Ok((HermiteField::from_coeffs(Arc::clone(psi.mesh()), x), res))
}

/// Solve with warm starts down a ladder of decades in the perturbation
/// parameter. The fixed point at each value is unique, so continuation only
/// changes how the iteration gets there, never what it converges to. Useful
/// for very small parameters where the cold-start transient is violent.
pub fn solve_continued(
    spec: &ProblemSpec,
    mesh: Arc<RadialMesh>,
    cfg: &SolveConfig,
) -> Result<(HermiteField, SolveReport)> {
    let target = spec.epsilon();
    if !(target > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "perturbed solve requires a positive perturbation parameter, got {target}"
        )));
    }
    let mut stages = Vec::new();
    let mut e = 1e-1;
    while e > target * 3.0 {
        stages.push(e);
        e *= 0.1;
    }
    let stage_cfg = SolveConfig {
        tol: (cfg.tol * 1e3).clamp(cfg.tol, 1e-6),
        ..cfg.clone()
    };
    let first_spec = spec.with_epsilon(*stages.first().unwrap_or(&target));
    let mut field = initial_iterate(&first_spec, Arc::clone(&mesh));
    let mut iterations = 0;
    let mut update_norms = Vec::new();
    let mut worst_relative_min = f64::INFINITY;
    let mut linear_residual = 0.0_f64;
    for &stage_eps in &stages {
        let (next, report) = solve_from(&spec.with_epsilon(stage_eps), field, &stage_cfg)?;
        iterations += report.iterations;
        update_norms.extend(report.update_norms);
        worst_relative_min = worst_relative_min.min(report.worst_relative_min);
        linear_residual = linear_residual.max(report.linear_residual);
        field = next;
    }
    let (w, last) = solve_from(spec, field, cfg)?;
    Ok((
        w,
        SolveReport {
            iterations: iterations + last.iterations,
            converged: last.converged,
            update_norms: {
                update_norms.extend(last.update_norms);
                update_norms
            },
            residual: last.residual,
            min_nodal: last.min_nodal,
            worst_relative_min: worst_relative_min.min(last.worst_relative_min),
            linear_residual: linear_residual.max(last.linear_residual),
        },
    ))
}
