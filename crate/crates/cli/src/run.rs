//! Command implementations and the shared problem-resolution layer.

use std::path::PathBuf;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::{Arc, Mutex};

use serde::Serialize;

use vamoma::{
    benchmark, compute_errors, convexity_report, fit_rate, reconstruct, solve_concave,
    solve_continued, validate_manufactured, AnalyticSolution, Branch, ConvexityReport,
    ErrorReport, ExactSolution, ProblemSpec, QuadratureRule, RadialMesh, RadialSolution, RateFit,
    Scheme, SolutionField, SolveConfig, SolveReport, SourceFn, BENCHMARK_NAMES,
};

use crate::config::{parse_list_f64, parse_list_usize, Cli, Command, CommonArgs, FileConfig};
use crate::output::{write_json, write_table, TableFormat};

#[derive(Debug)]
pub enum CliError {
    /// invalid configuration: exit code 1
    Config(String),
    /// a solve failed numerically: exit code 2
    Numerical(String),
}

impl From<vamoma::Error> for CliError {
    fn from(e: vamoma::Error) -> Self {
        match e {
            vamoma::Error::InvalidArgument(_)
            | vamoma::Error::OutOfDomain { .. }
            | vamoma::Error::UnsupportedBranch(_)
            | vamoma::Error::NegativeSource { .. } => CliError::Config(e.to_string()),
            other => CliError::Numerical(other.to_string()),
        }
    }
}

pub fn dispatch(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Solve(args) => cmd_solve(args),
        Command::Sweep(args) => cmd_sweep(args),
        Command::Concave(args) => cmd_concave(args),
        Command::Exact(args) => cmd_exact(args),
    }
}

/// Everything a run needs after the flag/config/benchmark layering.
struct Resolved {
    dim: u32,
    radius: f64,
    boundary_value: f64,
    eps_list: Vec<f64>,
    elements_list: Vec<usize>,
    source: SourceFn,
    exact: Option<AnalyticSolution>,
    benchmark_name: Option<String>,
    solve_cfg: SolveConfig,
    continuation: bool,
    samples: Option<usize>,
    out: PathBuf,
    format: TableFormat,
}

impl Resolved {
    fn from_args(args: &CommonArgs) -> Result<Self, CliError> {
        let file = FileConfig::load(args.config.as_ref())?;

        let benchmark_name: Option<String> = args
            .benchmark
            .clone()
            .or_else(|| file.get("benchmark").map(str::to_string));
        let dim: u32 = args
            .n
            .or(file.parse("n")?)
            .ok_or_else(|| CliError::Config("missing dimension: pass --n".into()))?;

        let bench = match &benchmark_name {
            Some(name) => Some(benchmark(name, dim).ok_or_else(|| {
                CliError::Config(format!(
                    "unknown benchmark '{name}'; available: {}",
                    BENCHMARK_NAMES.join(", ")
                ))
            })?),
            None => None,
        };

        let f_samples: Option<PathBuf> = args
            .f_samples
            .clone()
            .or_else(|| file.get("f_samples").map(PathBuf::from));
        let source = match (&f_samples, &bench) {
            (Some(path), _) => load_sampled_source(path)?,
            (None, Some(b)) => b.source.clone(),
            (None, None) => {
                return Err(CliError::Config(
                    "no source term: pass --benchmark or --f-samples".into(),
                ))
            }
        };
        // a sampled source overrides the benchmark's closed-form solution
        let exact = if f_samples.is_none() {
            bench.as_ref().and_then(|b| b.exact.clone())
        } else {
            None
        };

        let radius = args
            .radius
            .or(file.parse("radius")?)
            .or_else(|| bench.as_ref().map(|b| b.radius))
            .unwrap_or(1.0);
        let boundary_value = args
            .boundary_value
            .or(file.parse("gR")?)
            .or_else(|| bench.as_ref().map(|b| b.boundary_value))
            .unwrap_or(0.0);

        let eps_raw = args
            .eps
            .clone()
            .or_else(|| file.get("eps").map(str::to_string))
            .ok_or_else(|| CliError::Config("missing perturbation parameter: pass --eps".into()))?;
        let eps_list = parse_list_f64(&eps_raw)?;
        if eps_list.is_empty() || eps_list.iter().any(|&e| !(e > 0.0)) {
            return Err(CliError::Config("eps values must be positive".into()));
        }

        let elements_raw = args
            .elements
            .clone()
            .or_else(|| file.get("elements").map(str::to_string))
            .unwrap_or_else(|| "250".to_string());
        let elements_list = parse_list_usize(&elements_raw)?;
        if elements_list.is_empty() || elements_list.contains(&0) {
            return Err(CliError::Config("element counts must be positive".into()));
        }

        let scheme_raw = args
            .scheme
            .clone()
            .or_else(|| file.get("scheme").map(str::to_string));
        let scheme = match scheme_raw.as_deref() {
            None => Scheme::PicardThenNewton,
            Some(raw) => raw.parse::<Scheme>().map_err(CliError::Config)?,
        };
        let solve_cfg = SolveConfig {
            tol: args.tol.or(file.parse("tol")?).unwrap_or(1e-10),
            max_iter: args.max_iter.or(file.parse("max_iter")?).unwrap_or(500),
            scheme,
            damping: args.damping.or(file.parse("damping")?).unwrap_or(1.0),
            quad_points: args.quad.or(file.parse("quad")?).unwrap_or(5),
            verbose: args.verbose,
            ..SolveConfig::default()
        };

        Ok(Self {
            dim,
            radius,
            boundary_value,
            eps_list,
            elements_list,
            source,
            exact,
            benchmark_name,
            solve_cfg,
            continuation: args.continuation || file.get("continuation") == Some("true"),
            samples: match args.samples {
                Some(s) => Some(s),
                None => file.parse("samples")?,
            },
            out: args
                .out
                .clone()
                .or_else(|| file.get("out").map(PathBuf::from))
                .unwrap_or_else(|| PathBuf::from(".")),
            format: TableFormat::from_flag(
                args.format.as_deref().or_else(|| file.get("format")),
            )?,
        })
    }

    fn spec(&self, eps: f64) -> Result<ProblemSpec, CliError> {
        Ok(ProblemSpec::new(
            self.dim,
            self.radius,
            self.boundary_value,
            eps,
            self.source.clone(),
        )?)
    }

    fn single_eps(&self) -> Result<f64, CliError> {
        if self.eps_list.len() != 1 {
            return Err(CliError::Config(format!(
                "this command expects a single eps, got {}",
                self.eps_list.len()
            )));
        }
        Ok(self.eps_list[0])
    }

    fn single_elements(&self) -> Result<usize, CliError> {
        if self.elements_list.len() != 1 {
            return Err(CliError::Config(format!(
                "this command expects a single element count, got {}",
                self.elements_list.len()
            )));
        }
        Ok(self.elements_list[0])
    }

    fn run_solve(
        &self,
        spec: &ProblemSpec,
        elements: usize,
    ) -> Result<(SolutionField, SolveReport), CliError> {
        let mesh = Arc::new(RadialMesh::uniform(self.radius, elements)?);
        let (w, report) = if self.continuation {
            solve_continued(spec, mesh, &self.solve_cfg)?
        } else {
            vamoma::solve(spec, mesh, &self.solve_cfg)?
        };
        Ok((reconstruct(w, spec), report))
    }

}

fn load_sampled_source(path: &PathBuf) -> Result<SourceFn, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
    let mut samples = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let mut parts = line.split(',');
        let (Some(a), Some(b)) = (parts.next(), parts.next()) else {
            return Err(CliError::Config(format!(
                "{}:{}: expected 'r,f'",
                path.display(),
                lineno + 1
            )));
        };
        if lineno == 0 && a.trim().parse::<f64>().is_err() {
            continue; // header row
        }
        let r: f64 = a.trim().parse().map_err(|_| {
            CliError::Config(format!("{}:{}: bad radius '{a}'", path.display(), lineno + 1))
        })?;
        let f: f64 = b.trim().parse().map_err(|_| {
            CliError::Config(format!("{}:{}: bad value '{b}'", path.display(), lineno + 1))
        })?;
        samples.push((r, f));
    }
    Ok(SourceFn::from_samples(samples)?)
}

#[derive(Serialize)]
struct RunHeader<'a> {
    n: u32,
    radius: f64,
    #[serde(rename = "gR")]
    boundary_value: f64,
    epsilon: f64,
    elements: usize,
    h: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    benchmark: Option<&'a str>,
}

#[derive(Serialize)]
struct SolveArtifact<'a> {
    #[serde(flatten)]
    header: RunHeader<'a>,
    solve: &'a SolveReport,
    #[serde(skip_serializing_if = "Option::is_none")]
    oracle_l2_error: Option<f64>,
}

const SOLUTION_HEADER: [&str; 5] = ["r", "u", "u_r", "u_rr", "laplacian"];

fn write_solution_artifacts(
    resolved: &Resolved,
    sf: &SolutionField,
    report: &SolveReport,
    elements: usize,
    eps: f64,
    oracle_l2_error: Option<f64>,
) -> Result<(), CliError> {
    let samples = resolved.samples.unwrap_or(10 * elements + 1);
    let rows: Vec<Vec<f64>> = sf.sample(samples).into_iter().map(|r| r.to_vec()).collect();
    write_table(&resolved.out, "solution", resolved.format, &SOLUTION_HEADER, &rows)?;
    let artifact = SolveArtifact {
        header: RunHeader {
            n: resolved.dim,
            radius: resolved.radius,
            boundary_value: resolved.boundary_value,
            epsilon: eps,
            elements,
            h: resolved.radius / elements as f64,
            benchmark: resolved.benchmark_name.as_deref(),
        },
        solve: report,
        oracle_l2_error,
    };
    write_json(&resolved.out, "report.json", &artifact)?;
    let convexity: ConvexityReport = convexity_report(sf, 10 * elements);
    write_json(&resolved.out, "convexity.json", &convexity)?;
    Ok(())
}

fn cmd_solve(args: CommonArgs) -> Result<(), CliError> {
    let resolved = Resolved::from_args(&args)?;
    let eps = resolved.single_eps()?;
    let elements = resolved.single_elements()?;
    let spec = resolved.spec(eps)?;
    let (sf, report) = resolved.run_solve(&spec, elements)?;
    write_solution_artifacts(&resolved, &sf, &report, elements, eps, None)?;
    if !report.converged {
        return Err(CliError::Numerical(format!(
            "solve did not converge within {} iterations (last update {:.3e})",
            report.iterations,
            report.update_norms.last().copied().unwrap_or(f64::NAN)
        )));
    }
    Ok(())
}

fn cmd_concave(args: CommonArgs) -> Result<(), CliError> {
    let resolved = Resolved::from_args(&args)?;
    if resolved.dim % 2 != 0 {
        return Err(CliError::Config(format!(
            "no concave solution exists in odd dimensions (n = {}): every eigenvalue of the \
             Hessian of a concave function is nonpositive, so its determinant cannot match a \
             positive source",
            resolved.dim
        )));
    }
    let eps = resolved.single_eps()?;
    let elements = resolved.single_elements()?;
    let spec = resolved.spec(eps)?;
    let mesh = Arc::new(RadialMesh::uniform(resolved.radius, elements)?);
    let (sf, report) = solve_concave(&spec, mesh, &resolved.solve_cfg)?;
    // comparison against the concave closed-form branch
    let oracle = ExactSolution::new(&spec, Branch::Concave, 2048)?;
    let rule = QuadratureRule::gauss_legendre(resolved.solve_cfg.quad_points)?;
    let h = resolved.radius / elements as f64;
    let errs = compute_errors(&oracle, &sf, sf.mesh(), &rule, (h, resolved.radius));
    write_solution_artifacts(&resolved, &sf, &report, elements, eps, Some(errs.l2))?;
    if !report.converged {
        return Err(CliError::Numerical("concave solve did not converge".into()));
    }
    Ok(())
}

fn cmd_exact(args: crate::config::ExactArgs) -> Result<(), CliError> {
    let resolved = Resolved::from_args(&args.common)?;
    let branch = match args.branch.as_deref() {
        None | Some("convex") => Branch::Convex,
        Some("concave") => Branch::Concave,
        Some(other) => {
            return Err(CliError::Config(format!(
                "unknown branch '{other}' (expected convex or concave)"
            )))
        }
    };
    let eps = resolved.eps_list[0];
    let spec = resolved.spec(eps)?;
    let exact = ExactSolution::new(&spec, branch, 2048)?;
    let samples = resolved.samples.unwrap_or(1001);
    let rows: Vec<Vec<f64>> = (0..samples.max(2))
        .map(|i| {
            let r = resolved.radius * i as f64 / (samples.max(2) - 1) as f64;
            vec![r, exact.u(r), exact.u_r(r), exact.u_rr(r), exact.laplacian(r)]
        })
        .collect();
    write_table(&resolved.out, "solution", resolved.format, &SOLUTION_HEADER, &rows)?;
    let residual = resolved
        .exact
        .as_ref()
        .map(|analytic| validate_manufactured(&spec, analytic, 1000));
    #[derive(Serialize)]
    struct ExactArtifact<'a> {
        n: u32,
        radius: f64,
        #[serde(rename = "gR")]
        boundary_value: f64,
        branch: &'a str,
        #[serde(skip_serializing_if = "Option::is_none")]
        benchmark: Option<&'a str>,
        #[serde(skip_serializing_if = "Option::is_none")]
        manufactured_residual: Option<f64>,
    }
    write_json(
        &resolved.out,
        "report.json",
        &ExactArtifact {
            n: resolved.dim,
            radius: resolved.radius,
            boundary_value: resolved.boundary_value,
            branch: match branch {
                Branch::Convex => "convex",
                Branch::Concave => "concave",
            },
            benchmark: resolved.benchmark_name.as_deref(),
            manufactured_residual: residual,
        },
    )?;
    Ok(())
}

#[derive(Debug, Clone, Serialize)]
struct SweepRow {
    epsilon: f64,
    h: f64,
    l2: f64,
    h1_weighted: f64,
    h1_theta: f64,
    laplacian_l2: f64,
    sup_interior: f64,
    iterations: usize,
    converged: bool,
}

#[derive(Serialize)]
struct SweepSummary {
    mode: &'static str,
    rows: Vec<SweepRow>,
    fits: SweepFits,
    dropped: Vec<f64>,
}

#[derive(Serialize)]
struct SweepFits {
    l2: RateFit,
    h1_weighted: RateFit,
    h1_theta: RateFit,
    laplacian_l2: RateFit,
    sup_interior: RateFit,
}

fn cmd_sweep(args: crate::config::SweepArgs) -> Result<(), CliError> {
    let resolved = Resolved::from_args(&args.common)?;
    let jobs = args
        .jobs
        .or_else(|| {
            std::env::var("VAMOMA_JOBS")
                .ok()
                .and_then(|v| v.parse().ok())
        })
        .unwrap_or_else(|| {
            std::thread::available_parallelism()
                .map(|n| n.get())
                .unwrap_or(1)
        })
        .max(1);

    let (points, mode): (Vec<(f64, usize)>, &'static str) = if args.h_sweep {
        let eps = resolved.single_eps()?;
        if resolved.elements_list.len() < 3 {
            return Err(CliError::Config(
                "h-sweep needs at least 3 element counts".into(),
            ));
        }
        (
            resolved.elements_list.iter().map(|&m| (eps, m)).collect(),
            "h",
        )
    } else {
        let elements = resolved.single_elements()?;
        if resolved.eps_list.len() < 3 {
            return Err(CliError::Config("sweep needs at least 3 eps values".into()));
        }
        if resolved.eps_list.windows(2).any(|w| w[1] >= w[0]) {
            return Err(CliError::Config(
                "eps list must be strictly decreasing".into(),
            ));
        }
        (
            resolved.eps_list.iter().map(|&e| (e, elements)).collect(),
            "eps",
        )
    };

    // the error reference: closed form (or quadrature realization) for the
    // eps sweep, a fine solve of the same problem for the h sweep
    let reference: Box<dyn RadialSolution + Send + Sync> = if args.h_sweep {
        let eps = resolved.single_eps()?;
        let spec = resolved.spec(eps)?;
        let ref_elements = args.reference_elements.unwrap_or(1024);
        let mesh = Arc::new(RadialMesh::uniform(resolved.radius, ref_elements)?);
        let (w, report) = if resolved.continuation {
            solve_continued(&spec, mesh, &resolved.solve_cfg)?
        } else {
            vamoma::solve(&spec, mesh, &resolved.solve_cfg)?
        };
        if !report.converged {
            return Err(CliError::Numerical(
                "reference solve did not converge".into(),
            ));
        }
        Box::new(reconstruct(w, &spec))
    } else if let Some(exact) = &resolved.exact {
        Box::new(exact.clone())
    } else {
        let spec = resolved.spec(resolved.eps_list[0])?;
        Box::new(ExactSolution::new(&spec, Branch::Convex, 4096)?)
    };

    // deterministic result order regardless of completion order
    let results: Mutex<Vec<Option<Result<SweepRow, CliError>>>> =
        Mutex::new((0..points.len()).map(|_| None).collect());
    let cursor = AtomicUsize::new(0);
    let reference = &reference;
    let resolved_ref = &resolved;
    let points_ref = &points;
    std::thread::scope(|scope| {
        for _ in 0..jobs.min(points.len()) {
            scope.spawn(|| loop {
                let i = cursor.fetch_add(1, Ordering::SeqCst);
                if i >= points_ref.len() {
                    break;
                }
                let (eps, elements) = points_ref[i];
                let row = solve_row(resolved_ref, reference.as_ref(), eps, elements);
                results.lock().unwrap()[i] = Some(row);
            });
        }
    });
    let rows: Vec<SweepRow> = results
        .into_inner()
        .unwrap()
        .into_iter()
        .map(|r| r.expect("worker filled every slot"))
        .collect::<Result<_, _>>()?;

    let table: Vec<Vec<f64>> = rows
        .iter()
        .map(|r| {
            vec![
                r.epsilon,
                r.h,
                r.l2,
                r.h1_weighted,
                r.h1_theta,
                r.laplacian_l2,
                r.sup_interior,
                r.iterations as f64,
                if r.converged { 1.0 } else { 0.0 },
            ]
        })
        .collect();
    write_table(
        &resolved.out,
        "rates",
        resolved.format,
        &[
            "epsilon",
            "h",
            "l2",
            "h1_weighted",
            "h1_theta",
            "laplacian_l2",
            "sup_interior",
            "iterations",
            "converged",
        ],
        &table,
    )?;

    // non-converged rows are flagged and excluded from the fits
    let good: Vec<&SweepRow> = rows.iter().filter(|r| r.converged).collect();
    let dropped: Vec<f64> = rows
        .iter()
        .filter(|r| !r.converged)
        .map(|r| r.epsilon)
        .collect();
    if good.len() < 3 {
        return Err(CliError::Numerical(format!(
            "only {} converged sweep points; at least 3 needed for a fit",
            good.len()
        )));
    }
    let abscissa = |r: &SweepRow| if mode == "h" { r.h } else { r.epsilon };
    let fit_of = |sel: fn(&SweepRow) -> f64| -> Result<RateFit, CliError> {
        let pts: Vec<(f64, f64)> = good
            .iter()
            .map(|r| (abscissa(r), sel(r).max(1e-300)))
            .collect();
        Ok(fit_rate(&pts)?)
    };
    let summary = SweepSummary {
        mode,
        rows: rows.clone(),
        fits: SweepFits {
            l2: fit_of(|r| r.l2)?,
            h1_weighted: fit_of(|r| r.h1_weighted)?,
            h1_theta: fit_of(|r| r.h1_theta)?,
            laplacian_l2: fit_of(|r| r.laplacian_l2)?,
            sup_interior: fit_of(|r| r.sup_interior)?,
        },
        dropped,
    };
    write_json(&resolved.out, "rates_summary.json", &summary)?;
    Ok(())
}

fn solve_row(
    resolved: &Resolved,
    reference: &(dyn RadialSolution + Send + Sync),
    eps: f64,
    elements: usize,
) -> Result<SweepRow, CliError> {
    let spec = resolved.spec(eps)?;
    let (sf, report) = resolved.run_solve(&spec, elements)?;
    let h = resolved.radius / elements as f64;
    let rule = QuadratureRule::gauss_legendre(resolved.solve_cfg.quad_points)?;
    let errs: ErrorReport = compute_errors(reference, &sf, sf.mesh(), &rule, (h, resolved.radius));
    Ok(SweepRow {
        epsilon: eps,
        h,
        l2: errs.l2,
        h1_weighted: errs.h1_weighted,
        h1_theta: errs.h1_theta,
        laplacian_l2: errs.laplacian_l2,
        sup_interior: errs.sup_interior,
        iterations: report.iterations,
        converged: report.converged,
    })
}
