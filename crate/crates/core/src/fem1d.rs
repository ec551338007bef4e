//! P1/P0 finite-element operators on a uniform grid.
//!
//! Velocity lives on nodes (continuous piecewise-linear), stress and
//! fluidity on cells (piecewise-constant). Dirichlet nodes are eliminated,
//! so every tridiagonal system here has `n_cells - 1` unknowns.

use crate::error::{Error, Result};
use crate::grid::Grid;
use crate::params::Parameters;

/// Tridiagonal matrix stored by diagonals.
///
/// Row `i` reads `lower[i] x[i-1] + diag[i] x[i] + upper[i] x[i+1]`;
/// `lower[0]` and `upper[n-1]` are ignored.
#[derive(Debug, Clone, PartialEq)]
pub struct TridiagonalSystem {
    pub lower: Vec<f64>,
    pub diag: Vec<f64>,
    pub upper: Vec<f64>,
}

impl TridiagonalSystem {
    pub fn len(&self) -> usize {
        self.diag.len()
    }

    pub fn is_empty(&self) -> bool {
        self.diag.is_empty()
    }

    pub fn is_diagonally_dominant(&self) -> bool {
        let n = self.len();
        (0..n).all(|i| {
            let off = if i > 0 { self.lower[i].abs() } else { 0.0 }
                + if i + 1 < n { self.upper[i].abs() } else { 0.0 };
            self.diag[i].abs() > off
        })
    }

    /// Matrix-vector product.
    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        let n = self.len();
        (0..n)
            .map(|i| {
                let mut acc = self.diag[i] * x[i];
                if i > 0 {
                    acc += self.lower[i] * x[i - 1];
                }
                if i + 1 < n {
                    acc += self.upper[i] * x[i + 1];
                }
                acc
            })
            .collect()
    }
}

/// The interior block of `(rho/dt) M + eta K`.
///
/// `M` is the consistent P1 mass matrix (row stencil `h/6 [1, 4, 1]`) and `K`
/// the stiffness matrix (`1/h [-1, 2, -1]`). The couplings to the two
/// Dirichlet nodes equal the off-diagonal value and are handled by the caller.
pub fn assemble_momentum_operator(
    p: &Parameters,
    grid: &Grid,
    dt: f64,
) -> Result<TridiagonalSystem> {
    if !(dt.is_finite() && dt > 0.0) {
        return Err(Error::validation("dt must be positive"));
    }
    let (diag, off) = momentum_stencil(p.rho, p.eta, grid.h(), dt);
    let n = grid.n_interior();
    Ok(TridiagonalSystem {
        lower: vec![off; n],
        diag: vec![diag; n],
        upper: vec![off; n],
    })
}

/// `(diagonal, off-diagonal)` entries of `(rho/dt) M + eta K`.
pub(crate) fn momentum_stencil(rho: f64, eta: f64, h: f64, dt: f64) -> (f64, f64) {
    let m = rho / dt;
    (m * 4.0 * h / 6.0 + eta * 2.0 / h, m * h / 6.0 - eta / h)
}

/// Consistent mass matrix applied to nodal values, returned at interior nodes.
pub fn apply_mass_interior(u: &[f64], h: f64, out: &mut [f64]) {
    let n = u.len() - 2;
    debug_assert_eq!(out.len(), n);
    let c = h / 6.0;
    for i in 0..n {
        out[i] = c * (u[i] + 4.0 * u[i + 1] + u[i + 2]);
    }
}

/// Thomas algorithm. O(n), no pivoting.
pub fn solve_tridiagonal(sys: &TridiagonalSystem, rhs: &[f64]) -> Result<Vec<f64>> {
    let mut x = vec![0.0; sys.len()];
    let mut scratch = vec![0.0; sys.len()];
    solve_tridiagonal_into(sys, rhs, &mut x, &mut scratch)?;
    Ok(x)
}

/// Allocation-free form of [`solve_tridiagonal`]; `scratch` must have the
/// system length.
pub fn solve_tridiagonal_into(
    sys: &TridiagonalSystem,
    rhs: &[f64],
    x: &mut [f64],
    scratch: &mut [f64],
) -> Result<()> {
    let n = sys.len();
    if rhs.len() != n || x.len() != n || scratch.len() != n {
        return Err(Error::Numeric(format!(
            "tridiagonal length mismatch: system {n}, rhs {}",
            rhs.len()
        )));
    }
    if n == 0 {
        return Ok(());
    }
    let mut pivot = sys.diag[0];
    if pivot == 0.0 {
        return Err(Error::Numeric("zero pivot in row 0".into()));
    }
    x[0] = rhs[0] / pivot;
    for i in 1..n {
        scratch[i] = sys.upper[i - 1] / pivot;
        pivot = sys.diag[i] - sys.lower[i] * scratch[i];
        if pivot == 0.0 {
            return Err(Error::Numeric(format!("zero pivot in row {i}")));
        }
        x[i] = (rhs[i] - sys.lower[i] * x[i - 1]) / pivot;
    }
    for i in (0..n - 1).rev() {
        x[i] -= scratch[i + 1] * x[i + 1];
    }
    Ok(())
}

/// Cellwise derivative of a P1 field.
pub fn gradient_p1_to_p0(u: &[f64], grid: &Grid) -> Vec<f64> {
    let mut d = vec![0.0; grid.n_cells()];
    gradient_into(u, grid.h(), &mut d);
    d
}

pub(crate) fn gradient_into(u: &[f64], h: f64, out: &mut [f64]) {
    let inv_h = 1.0 / h;
    for (j, d) in out.iter_mut().enumerate() {
        *d = (u[j + 1] - u[j]) * inv_h;
    }
}

/// Weak-form load of `d tau / dy` against the interior hat functions:
/// `-int tau phi_i' = tau[i] - tau[i-1]`, indexed from the first interior node.
pub fn stress_divergence_rhs(tau: &[f64], grid: &Grid) -> Vec<f64> {
    debug_assert_eq!(tau.len(), grid.n_cells());
    tau.windows(2).map(|w| w[1] - w[0]).collect()
}
