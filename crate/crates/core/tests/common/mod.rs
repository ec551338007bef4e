#![allow(dead_code)]

use couette::fem1d::TridiagonalSystem;
use couette::{Grid, Parameters, State};
use nalgebra::Matrix2;
use proptest::prelude::*;

/// Gaussian elimination with partial pivoting on a dense copy.
pub fn dense_solve(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Vec<f64> {
    let n = b.len();
    for col in 0..n {
        let pivot = (col..n)
            .max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))
            .unwrap();
        a.swap(col, pivot);
        b.swap(col, pivot);
        let pivot_row = a[col].clone();
        for row in col + 1..n {
            let m = a[row][col] / pivot_row[col];
            for (x, &v) in a[row][col..].iter_mut().zip(&pivot_row[col..]) {
                *x -= m * v;
            }
            b[row] -= m * b[col];
        }
    }
    let mut x = vec![0.0; n];
    for i in (0..n).rev() {
        let s: f64 = (i + 1..n).map(|k| a[i][k] * x[k]).sum();
        x[i] = (b[i] - s) / a[i][i];
    }
    x
}

pub fn to_dense(sys: &TridiagonalSystem) -> Vec<Vec<f64>> {
    let n = sys.diag.len();
    let mut a = vec![vec![0.0; n]; n];
    for i in 0..n {
        a[i][i] = sys.diag[i];
        if i + 1 < n {
            a[i][i + 1] = sys.upper[i];
            a[i + 1][i] = sys.lower[i + 1];
        }
    }
    a
}

fn rhs(p: &Parameters, a: f64, tau: f64, f: f64) -> [f64; 2] {
    [
        (p.g_mod * a - f * tau) / p.lambda,
        (p.xi * tau.abs() - 1.0) * f * f - p.nu * f * f * f,
    ]
}

/// Uniform equilibrium from `(xi tau - 1) tau = nu G a`.
pub fn uniform_equilibrium(p: &Parameters, a: f64) -> (f64, f64) {
    let tau = (1.0 + (1.0 + 4.0 * p.xi * p.nu * p.g_mod * a).sqrt()) / (2.0 * p.xi);
    (tau, p.g_mod * a / tau)
}

/// Decay rate of the uniform system near equilibrium: minus the largest real
/// part of the eigenvalues of a finite-difference Jacobian.
pub fn eigen_decay_rate(p: &Parameters, a: f64) -> (f64, bool) {
    let (tau, f) = uniform_equilibrium(p, a);
    let d = 1e-6;
    let dtau = (rhs(p, a, tau + d, f), rhs(p, a, tau - d, f));
    let df = (rhs(p, a, tau, f + d), rhs(p, a, tau, f - d));
    let j = Matrix2::new(
        (dtau.0[0] - dtau.1[0]) / (2.0 * d),
        (df.0[0] - df.1[0]) / (2.0 * d),
        (dtau.0[1] - dtau.1[1]) / (2.0 * d),
        (df.0[1] - df.1[1]) / (2.0 * d),
    );
    let eig = j.complex_eigenvalues();
    let rate = -eig.iter().map(|z| z.re).fold(f64::NEG_INFINITY, f64::max);
    let complex = eig.iter().any(|z| z.im.abs() > 1e-9);
    (rate, complex)
}

pub fn constant_state(grid: &Grid, a: f64, tau0: f64, f0: f64) -> State {
    State {
        t: 0.0,
        u: grid.nodes().map(|y| a * y).collect(),
        tau: vec![tau0; grid.n_cells()],
        f: vec![f0; grid.n_cells()],
    }
}

pub fn arb_params() -> impl Strategy<Value = Parameters> {
    (
        1e-3..0.1f64,
        0.2..5.0f64,
        0.1..2.0f64,
        0.2..5.0f64,
        0.2..5.0f64,
        0.2..5.0f64,
    )
        .prop_map(|(rho, eta, lambda, g_mod, xi, nu)| Parameters {
            rho,
            eta,
            lambda,
            g_mod,
            xi,
            nu,
        })
}

/// Random state with `u(0) = u(1) = 0`; about a third of the cells are solid.
pub fn arb_homogeneous_state() -> impl Strategy<Value = State> {
    (4usize..40).prop_flat_map(|n| {
        (
            prop::collection::vec(-0.05..0.05f64, n - 1),
            prop::collection::vec(-1.0..1.0f64, n),
            prop::collection::vec(prop_oneof![1 => Just(0.0), 2 => 0.0..2.0f64], n),
        )
            .prop_map(|(interior, tau, f)| {
                let mut u = vec![0.0];
                u.extend(interior);
                u.push(0.0);
                State { t: 0.0, u, tau, f }
            })
    })
}
