//! Banded assembly and solve checked entrywise and solution-wise against
//! the independent dense oracle on small meshes.

mod support;

use std::sync::Arc;

use rand::rngs::StdRng;
use rand::{RngExt, SeedableRng};
use vamoma::{
    assemble_picard, CumulativeSource, HermiteField, ProblemSpec, QuadratureRule, RadialMesh,
    SourceFn,
};

fn rule() -> QuadratureRule {
    QuadratureRule::gauss_legendre(5).unwrap()
}

fn compare_instance(spec: &ProblemSpec, elements: usize, psi_shape: (f64, f64), tol: f64) {
    let mesh = Arc::new(RadialMesh::uniform(spec.radius(), elements).unwrap());
    let lf = CumulativeSource::new(
        Arc::clone(&mesh),
        spec.dim(),
        spec.source().clone(),
        rule(),
    )
    .unwrap();
    let n = spec.dim() as f64;
    let eps = spec.epsilon();
    // a nonnegative cubic lagged iterate vanishing to second order at 0;
    // cubics are represented exactly, so no interpolation undershoot
    let (alpha, beta) = psi_shape;
    let psi = HermiteField::interpolate(
        Arc::clone(&mesh),
        move |r| alpha * eps / n * (r * r + beta * r * r * r),
        move |r| alpha * eps / n * (2.0 * r + 3.0 * beta * r * r),
    );

    let mut sys = assemble_picard(spec, &lf, &psi, &rule()).unwrap();
    let (mut dense, mut dense_rhs) = support::dense_assemble(spec, &lf, &psi, &rule());

    sys.apply_constraints();
    support::dense_apply_constraints(&mut dense, &mut dense_rhs, &[(0, 0.0), (1, 0.0)]);

    let num_dofs = dense_rhs.len();
    let scale = dense
        .iter()
        .flatten()
        .fold(0.0_f64, |m, &v| m.max(v.abs()))
        .max(1.0);
    for i in 0..num_dofs {
        for j in 0..num_dofs {
            let banded = sys.matrix.get(i, j);
            assert!(
                (banded - dense[i][j]).abs() <= tol * scale,
                "entry ({i},{j}): banded {banded} vs dense {}",
                dense[i][j]
            );
        }
        assert!(
            (sys.rhs[i] - dense_rhs[i]).abs() <= tol * scale,
            "rhs {i}: {} vs {}",
            sys.rhs[i],
            dense_rhs[i]
        );
    }

    let (x, residual) = sys.solve().unwrap();
    assert!(residual <= 1e-10, "banded solve residual {residual}");
    let y = support::dense_solve(dense, dense_rhs);
    let xscale = y.iter().fold(0.0_f64, |m, &v| m.max(v.abs())).max(1e-30);
    for i in 0..num_dofs {
        assert!(
            (x[i] - y[i]).abs() <= tol * xscale,
            "solution dof {i}: banded {} vs dense {}",
            x[i],
            y[i]
        );
    }
}

#[test]
fn two_element_assembly_matches_dense_oracle() {
    let spec = ProblemSpec::new(2, 1.0, 0.0, 0.5, SourceFn::new(|r| 1.0 + r)).unwrap();
    compare_instance(&spec, 2, (1.0, 0.5), 1e-12);
}

#[test]
fn small_meshes_match_for_randomized_instances() {
    let mut rng = StdRng::seed_from_u64(20260808);
    for trial in 0..20 {
        let n = *[2u32, 3, 4].get(rng.random_range(0..3)).unwrap();
        let eps = 10f64.powf(rng.random_range(-2.0..0.0));
        let radius = rng.random_range(0.5..1.5);
        let elements = rng.random_range(1..=4usize);
        let (a, b, c) = (
            rng.random_range(0.5..2.0),
            rng.random_range(0.0..1.0),
            rng.random_range(0.0..1.0),
        );
        let source = SourceFn::new(move |r| a + b * r + c * r * r);
        let spec = ProblemSpec::new(n, radius, 0.0, eps, source).unwrap();
        let shape = (rng.random_range(0.5..2.0), rng.random_range(0.0..1.0));
        eprintln!(
            "trial {trial}: n={n} eps={eps:.3e} R={radius:.3} elements={elements} shape={shape:.3?}"
        );
        compare_instance(&spec, elements, shape, 1e-10);
    }
}
