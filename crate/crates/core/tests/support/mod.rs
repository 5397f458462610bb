//! Independent dense-assembly / dense-LU oracle.
//!
//! Everything here is written against the weak form directly: its own shape
//! function algebra (factored forms), gather-style integration per basis
//! pair, a dense constraint application, and a dense partially pivoted LU.
//! It shares only the quadrature points and the cumulative-source values
//! with the library, so it independently checks the banded assembly path,
//! the dof scatter, the constraint handling, and the banded solver.

use vamoma::{CumulativeSource, HermiteField, ProblemSpec, QuadratureRule};

/// Reference shapes in factored form, scaled for global dof `kind`
/// (0 = value, 1 = slope) at the `side` of the element (0 = left, 1 = right).
fn shape(kind: usize, side: usize, xi: f64, h: f64) -> f64 {
    match (side, kind) {
        (0, 0) => (1.0 + 2.0 * xi) * (1.0 - xi) * (1.0 - xi),
        (0, 1) => h * xi * (1.0 - xi) * (1.0 - xi),
        (1, 0) => xi * xi * (3.0 - 2.0 * xi),
        (1, 1) => h * xi * xi * (xi - 1.0),
        _ => unreachable!(),
    }
}

/// d/dr of the same shapes (reference derivative over h).
fn shape_deriv(kind: usize, side: usize, xi: f64, h: f64) -> f64 {
    let d_dxi = match (side, kind) {
        (0, 0) => -6.0 * xi * (1.0 - xi),
        (0, 1) => h * (1.0 - xi) * (1.0 - 3.0 * xi),
        (1, 0) => 6.0 * xi * (1.0 - xi),
        (1, 1) => h * xi * (3.0 * xi - 2.0),
        _ => unreachable!(),
    };
    d_dxi / h
}

/// Global basis function `dof` evaluated at (element, xi).
fn global_shape(dof: usize, e: usize, xi: f64, h: f64) -> f64 {
    let node = dof / 2;
    let kind = dof % 2;
    if node == e {
        shape(kind, 0, xi, h)
    } else if node == e + 1 {
        shape(kind, 1, xi, h)
    } else {
        0.0
    }
}

fn global_shape_deriv(dof: usize, e: usize, xi: f64, h: f64) -> f64 {
    let node = dof / 2;
    let kind = dof % 2;
    if node == e {
        shape_deriv(kind, 0, xi, h)
    } else if node == e + 1 {
        shape_deriv(kind, 1, xi, h)
    } else {
        0.0
    }
}

/// Lagged iterate evaluated through the oracle's own shape algebra; the
/// slope shapes already carry the element-length scaling.
fn psi_at(psi: &HermiteField, e: usize, xi: f64, h: f64) -> f64 {
    let c = psi.coeffs();
    let base = 2 * e;
    c[base] * shape(0, 0, xi, h)
        + c[base + 1] * shape(1, 0, xi, h)
        + c[base + 2] * shape(0, 1, xi, h)
        + c[base + 3] * shape(1, 1, xi, h)
}

/// Dense assembly of the lagged-coefficient weak form by direct integration
/// of every basis-pair product over the shared support.
pub fn dense_assemble(
    spec: &ProblemSpec,
    lf: &CumulativeSource,
    psi: &HermiteField,
    rule: &QuadratureRule,
) -> (Vec<Vec<f64>>, Vec<f64>) {
    let mesh = psi.mesh();
    let n = spec.dim();
    let nf = n as f64;
    let eps = spec.epsilon();
    let num_dofs = 2 * mesh.num_nodes();
    let unit: Vec<(f64, f64)> = rule
        .points()
        .iter()
        .zip(rule.weights())
        .map(|(&x, &w)| (0.5 * (x + 1.0), 0.5 * w))
        .collect();

    let mut a = vec![vec![0.0; num_dofs]; num_dofs];
    let mut b = vec![0.0; num_dofs];
    for i in 0..num_dofs {
        for j in 0..num_dofs {
            let mut acc = 0.0;
            for e in 0..mesh.num_elements() {
                let (xa, _) = mesh.element(e);
                let h = mesh.element_len(e);
                for &(xi, wq) in &unit {
                    let chi = global_shape(i, e, xi, h);
                    let trial = global_shape(j, e, xi, h);
                    let chi_r = global_shape_deriv(i, e, xi, h);
                    let trial_r = global_shape_deriv(j, e, xi, h);
                    if chi == 0.0 && chi_r == 0.0 {
                        continue;
                    }
                    let r = xa + h * xi;
                    let p = psi_at(psi, e, xi, h).max(0.0);
                    // direct algebraic form of the reaction weight
                    let weight = p.powi(n as i32 - 1) / (nf * r.powi((n * (n - 1)) as i32));
                    acc += wq
                        * h
                        * (eps * trial_r * chi_r
                            + eps * (nf - 1.0) / r * trial_r * chi
                            + weight * trial * chi);
                }
            }
            a[i][j] = acc;
        }
        let mut load = 0.0;
        for e in 0..mesh.num_elements() {
            let (xa, _) = mesh.element(e);
            let h = mesh.element_len(e);
            for &(xi, wq) in &unit {
                let chi = global_shape(i, e, xi, h);
                if chi != 0.0 {
                    let r = xa + h * xi;
                    load += wq * h * lf.eval(r).unwrap() * chi;
                }
            }
        }
        b[i] = load;
    }
    // natural boundary contribution on the value dof at R
    b[num_dofs - 2] += eps * eps * mesh.radius().powi(n as i32 - 1);
    (a, b)
}

/// Move prescribed columns to the right-hand side and pin the rows.
pub fn dense_apply_constraints(
    a: &mut [Vec<f64>],
    b: &mut [f64],
    constraints: &[(usize, f64)],
) {
    let n = b.len();
    for &(dof, value) in constraints {
        for i in 0..n {
            if i != dof {
                b[i] -= a[i][dof] * value;
                a[i][dof] = 0.0;
            }
        }
        for j in 0..n {
            a[dof][j] = 0.0;
        }
        a[dof][dof] = 1.0;
        b[dof] = value;
    }
}

/// Dense LU with partial pivoting.
pub fn dense_solve(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Vec<f64> {
    let n = b.len();
    for k in 0..n {
        let p = (k..n)
            .max_by(|&i, &j| a[i][k].abs().total_cmp(&a[j][k].abs()))
            .unwrap();
        assert!(a[p][k].abs() > 0.0, "oracle hit a singular pivot at {k}");
        a.swap(k, p);
        b.swap(k, p);
        for i in (k + 1)..n {
            let m = a[i][k] / a[k][k];
            if m != 0.0 {
                for j in k..n {
                    a[i][j] -= m * a[k][j];
                }
                b[i] -= m * b[k];
            }
        }
    }
    let mut x = vec![0.0; n];
    for k in (0..n).rev() {
        let mut acc = b[k];
        for j in (k + 1)..n {
            acc -= a[k][j] * x[j];
        }
        x[k] = acc / a[k][k];
    }
    x
}
