//! Problem data: the source term, its cumulative integral, and the exact
//! convex/concave solutions used as oracles.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::mesh::RadialMesh;
use crate::quadrature::QuadratureRule;

/// Radial source term f(r), shareable across threads.
#[derive(Clone)]
pub struct SourceFn(Arc<dyn Fn(f64) -> f64 + Send + Sync>);

impl SourceFn {
    pub fn new<F: Fn(f64) -> f64 + Send + Sync + 'static>(f: F) -> Self {
        Self(Arc::new(f))
    }

    /// Piecewise-linear interpolant of (r, f) samples; constant extrapolation
    /// outside the sampled range.
    pub fn from_samples(samples: Vec<(f64, f64)>) -> Result<Self> {
        if samples.len() < 2 {
            return Err(Error::InvalidArgument(
                "need at least two source samples".into(),
            ));
        }
        if samples.windows(2).any(|p| !(p[1].0 > p[0].0)) {
            return Err(Error::InvalidArgument(
                "source sample abscissae must be strictly increasing".into(),
            ));
        }
        Ok(Self::new(move |r| {
            let k = samples.partition_point(|&(x, _)| x <= r);
            if k == 0 {
                return samples[0].1;
            }
            if k == samples.len() {
                return samples[samples.len() - 1].1;
            }
            let (x0, y0) = samples[k - 1];
            let (x1, y1) = samples[k];
            y0 + (y1 - y0) * (r - x0) / (x1 - x0)
        }))
    }

    pub fn eval(&self, r: f64) -> f64 {
        (self.0)(r)
    }
}

impl std::fmt::Debug for SourceFn {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str("SourceFn")
    }
}

/// Full specification of the perturbed Dirichlet problem on [0, R].
#[derive(Debug, Clone)]
pub struct ProblemSpec {
    dim: u32,
    radius: f64,
    boundary_value: f64,
    epsilon: f64,
    source: SourceFn,
}

impl ProblemSpec {
    pub fn new(
        dim: u32,
        radius: f64,
        boundary_value: f64,
        epsilon: f64,
        source: SourceFn,
    ) -> Result<Self> {
        if dim < 2 {
            return Err(Error::InvalidArgument(format!(
                "dimension must be at least 2, got {dim}"
            )));
        }
        if !(radius > 0.0) || !radius.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "radius must be positive, got {radius}"
            )));
        }
        Ok(Self {
            dim,
            radius,
            boundary_value,
            epsilon,
            source,
        })
    }

    pub fn dim(&self) -> u32 {
        self.dim
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    pub fn boundary_value(&self) -> f64 {
        self.boundary_value
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn source(&self) -> &SourceFn {
        &self.source
    }

    pub fn with_epsilon(&self, epsilon: f64) -> Self {
        Self {
            epsilon,
            ..self.clone()
        }
    }

    pub fn with_boundary_value(&self, boundary_value: f64) -> Self {
        Self {
            boundary_value,
            ..self.clone()
        }
    }
}

/// Common evaluator surface for exact, closed-form and discrete solutions.
pub trait RadialSolution {
    fn dim(&self) -> u32;
    fn u(&self, r: f64) -> f64;
    fn u_r(&self, r: f64) -> f64;
    fn u_rr(&self, r: f64) -> f64;

    /// u_rr + (n-1) u_r / r, with the symmetry limit n * u_rr(0) at the origin.
    fn laplacian(&self, r: f64) -> f64 {
        if r == 0.0 {
            self.dim() as f64 * self.u_rr(0.0)
        } else {
            self.u_rr(r) + (self.dim() as f64 - 1.0) * self.u_r(r) / r
        }
    }
}

/// Cumulative weighted source: the integral of t^{n-1} f(t) from 0 to r,
/// realized as per-element Gauss contributions with prefix sums at the
/// nodes. Monotone nondecreasing for f >= 0.
#[derive(Debug, Clone)]
pub struct CumulativeSource {
    mesh: Arc<RadialMesh>,
    rule: QuadratureRule,
    dim: u32,
    source: SourceFn,
    prefix: Vec<f64>,
}

impl CumulativeSource {
    /// Validates f >= 0 at every quadrature point while accumulating.
    pub fn new(
        mesh: Arc<RadialMesh>,
        dim: u32,
        source: SourceFn,
        rule: QuadratureRule,
    ) -> Result<Self> {
        let pow = dim as i32 - 1;
        let mut prefix = Vec::with_capacity(mesh.num_nodes());
        prefix.push(0.0);
        let mut acc = 0.0;
        for e in 0..mesh.num_elements() {
            let (a, b) = mesh.element(e);
            let mut bad: Option<(f64, f64)> = None;
            acc += rule.integrate(a, b, |t| {
                let f = source.eval(t);
                if f < 0.0 && bad.is_none() {
                    bad = Some((t, f));
                }
                t.powi(pow) * f
            });
            if let Some((r, value)) = bad {
                return Err(Error::NegativeSource { r, value });
            }
            prefix.push(acc);
        }
        Ok(Self {
            mesh,
            rule,
            dim,
            source,
            prefix,
        })
    }

    pub fn mesh(&self) -> &Arc<RadialMesh> {
        &self.mesh
    }

    pub fn dim(&self) -> u32 {
        self.dim
    }

    pub fn source(&self) -> &SourceFn {
        &self.source
    }

    /// Value of the cumulative integral at `r`: nodal prefix sum plus a
    /// partial-element Gauss contribution.
    pub fn eval(&self, r: f64) -> Result<f64> {
        let e = self.mesh.locate(r)?;
        let (a, _) = self.mesh.element(e);
        let pow = self.dim as i32 - 1;
        let partial = self
            .rule
            .integrate(a, r, |t| t.powi(pow) * self.source.eval(t));
        Ok(self.prefix[e] + partial)
    }

    /// Total integral over [0, R]; the sup of the cumulative function.
    pub fn total(&self) -> f64 {
        *self.prefix.last().unwrap()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Branch {
    Convex,
    Concave,
}

/// Closed-form solution of the unperturbed problem realized by quadrature:
/// u(r) = g(R) -/+ integral over (r, R) of (n L_f(s))^{1/n} ds, with the
/// convex branch taking the minus sign (slope +(n L_f)^{1/n} >= 0).
#[derive(Debug, Clone)]
pub struct ExactSolution {
    branch: Branch,
    dim: u32,
    boundary_value: f64,
    src: CumulativeSource,
    /// suffix sums of the slope integral at the nodes
    tail: Vec<f64>,
}

impl ExactSolution {
    /// `resolution` controls the quadrature mesh used to realize the
    /// integrals; the concave branch exists only for even n.
    pub fn new(spec: &ProblemSpec, branch: Branch, resolution: usize) -> Result<Self> {
        if branch == Branch::Concave && spec.dim() % 2 != 0 {
            return Err(Error::UnsupportedBranch(spec.dim()));
        }
        let mesh = Arc::new(RadialMesh::uniform(spec.radius(), resolution.max(1))?);
        let rule = QuadratureRule::gauss_legendre(5)?;
        let src = CumulativeSource::new(
            Arc::clone(&mesh),
            spec.dim(),
            spec.source().clone(),
            rule.clone(),
        )?;
        let n = spec.dim() as f64;
        let mut tail = vec![0.0; mesh.num_nodes()];
        for e in (0..mesh.num_elements()).rev() {
            let (a, b) = mesh.element(e);
            let inc = rule.integrate(a, b, |s| {
                (n * src.eval(s).unwrap_or(0.0)).powf(1.0 / n)
            });
            tail[e] = tail[e + 1] + inc;
        }
        Ok(Self {
            branch,
            dim: spec.dim(),
            boundary_value: spec.boundary_value(),
            src,
            tail,
        })
    }

    pub fn branch(&self) -> Branch {
        self.branch
    }

    fn sign(&self) -> f64 {
        match self.branch {
            Branch::Convex => 1.0,
            Branch::Concave => -1.0,
        }
    }

    /// L_f evaluated through the cached prefix sums.
    pub fn cumulative(&self) -> &CumulativeSource {
        &self.src
    }
}

impl RadialSolution for ExactSolution {
    fn dim(&self) -> u32 {
        self.dim
    }

    fn u(&self, r: f64) -> f64 {
        if r >= self.src.mesh().radius() {
            return self.boundary_value;
        }
        let mesh = self.src.mesh();
        let e = mesh.locate(r).expect("r validated above");
        let (_, b) = mesh.element(e);
        let n = self.dim as f64;
        let rule = QuadratureRule::gauss_legendre(5).unwrap();
        let partial = rule.integrate(r, b, |s| {
            (n * self.src.eval(s).unwrap_or(0.0)).powf(1.0 / n)
        });
        self.boundary_value - self.sign() * (partial + self.tail[e + 1])
    }

    fn u_r(&self, r: f64) -> f64 {
        let n = self.dim as f64;
        let lf = self.src.eval(r).unwrap_or(0.0);
        self.sign() * (n * lf).powf(1.0 / n)
    }

    fn u_rr(&self, r: f64) -> f64 {
        let n = self.dim as f64;
        let lf = self.src.eval(r).unwrap_or(0.0);
        let f = self.src.source().eval(r);
        let q = n * lf;
        // q ~ f(r) r^n / n near a degenerate point; the raw power form is
        // stable until q underflows, after which the limit value applies
        if q < 1e-300 {
            return self.sign() * f.max(0.0).powf(1.0 / n);
        }
        self.sign() * q.powf(1.0 / n - 1.0) * r.powi(self.dim as i32 - 1) * f
    }
}

/// Solution given by closed-form callables (registered benchmark data).
#[derive(Clone)]
pub struct AnalyticSolution {
    dim: u32,
    u: Arc<dyn Fn(f64) -> f64 + Send + Sync>,
    u_r: Arc<dyn Fn(f64) -> f64 + Send + Sync>,
    u_rr: Arc<dyn Fn(f64) -> f64 + Send + Sync>,
}

impl AnalyticSolution {
    pub fn new<F, G, H>(dim: u32, u: F, u_r: G, u_rr: H) -> Self
    where
        F: Fn(f64) -> f64 + Send + Sync + 'static,
        G: Fn(f64) -> f64 + Send + Sync + 'static,
        H: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        Self {
            dim,
            u: Arc::new(u),
            u_r: Arc::new(u_r),
            u_rr: Arc::new(u_rr),
        }
    }
}

impl std::fmt::Debug for AnalyticSolution {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "AnalyticSolution(dim = {})", self.dim)
    }
}

impl RadialSolution for AnalyticSolution {
    fn dim(&self) -> u32 {
        self.dim
    }

    fn u(&self, r: f64) -> f64 {
        (self.u)(r)
    }

    fn u_r(&self, r: f64) -> f64 {
        (self.u_r)(r)
    }

    fn u_rr(&self, r: f64) -> f64 {
        (self.u_rr)(r)
    }
}

/// Max residual of the radial determinant identity
/// u_rr (u_r / r)^{n-1} = f over a uniform grid of `samples` points on (0, R].
pub fn validate_manufactured(
    spec: &ProblemSpec,
    exact: &dyn RadialSolution,
    samples: usize,
) -> f64 {
    let n = spec.dim();
    let mut worst = 0.0_f64;
    for i in 1..=samples {
        let r = spec.radius() * i as f64 / samples as f64;
        let det = exact.u_rr(r) * (exact.u_r(r) / r).powi(n as i32 - 1);
        worst = worst.max((det - spec.source().eval(r)).abs());
    }
    worst
}

/// A named benchmark problem: source, defaults, and the closed-form convex
/// solution when one is registered.
#[derive(Debug, Clone)]
pub struct Benchmark {
    pub name: &'static str,
    pub dim: u32,
    pub radius: f64,
    pub boundary_value: f64,
    pub source: SourceFn,
    pub exact: Option<AnalyticSolution>,
}

impl Benchmark {
    pub fn spec(&self, epsilon: f64) -> ProblemSpec {
        ProblemSpec::new(
            self.dim,
            self.radius,
            self.boundary_value,
            epsilon,
            self.source.clone(),
        )
        .expect("benchmark data is valid")
    }
}

pub const BENCHMARK_NAMES: [&str; 3] = ["paper-sec7", "constant-f", "zero-f"];

/// Look up a benchmark by name for dimension `n`.
pub fn benchmark(name: &str, n: u32) -> Option<Benchmark> {
    match name {
        "paper-sec7" => {
            let nf = n as f64;
            let source = SourceFn::new(move |r| (1.0 + r * r) * (nf * r * r / 2.0).exp());
            let exact = AnalyticSolution::new(
                n,
                |r| (r * r / 2.0).exp(),
                |r| r * (r * r / 2.0).exp(),
                |r| (1.0 + r * r) * (r * r / 2.0).exp(),
            );
            Some(Benchmark {
                name: "paper-sec7",
                dim: n,
                radius: 1.0,
                boundary_value: 0.5_f64.exp(),
                source,
                exact: Some(exact),
            })
        }
        "constant-f" => {
            let nf = n as f64;
            let root = 2.0_f64.powf(1.0 / nf);
            let exact = AnalyticSolution::new(
                n,
                move |r| -root * (1.0 - r * r) / 2.0,
                move |r| root * r,
                move |_| root,
            );
            Some(Benchmark {
                name: "constant-f",
                dim: n,
                radius: 1.0,
                boundary_value: 0.0,
                source: SourceFn::new(|_| 2.0),
                exact: Some(exact),
            })
        }
        "zero-f" => {
            let exact = AnalyticSolution::new(n, |_| 1.0, |_| 0.0, |_| 0.0);
            Some(Benchmark {
                name: "zero-f",
                dim: n,
                radius: 1.0,
                boundary_value: 1.0,
                source: SourceFn::new(|_| 0.0),
                exact: Some(exact),
            })
        }
        _ => None,
    }
}
