//! Discrete fields and initial-condition presets.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::Grid;
use crate::params::BoundaryCondition;

/// Velocity at the nodes (P1), stress and fluidity per cell (P0).
#[derive(Debug, Clone, PartialEq)]
pub struct State {
    pub t: f64,
    pub u: Vec<f64>,
    pub tau: Vec<f64>,
    pub f: Vec<f64>,
}

impl State {
    pub fn zeros(grid: &Grid) -> Self {
        State {
            t: 0.0,
            u: vec![0.0; grid.n_nodes()],
            tau: vec![0.0; grid.n_cells()],
            f: vec![0.0; grid.n_cells()],
        }
    }

    pub fn n_cells(&self) -> usize {
        self.tau.len()
    }

    /// Checks array shapes, boundary values and `f >= 0`.
    pub fn check(&self, grid: &Grid, bc: &BoundaryCondition) -> Result<()> {
        if self.u.len() != grid.n_nodes()
            || self.tau.len() != grid.n_cells()
            || self.f.len() != grid.n_cells()
        {
            return Err(Error::validation("state arrays do not match the grid"));
        }
        if self.u[0] != 0.0 || self.u[grid.n_cells()] != bc.a {
            return Err(Error::validation("velocity boundary values do not match"));
        }
        if let Some(j) = self.f.iter().position(|&v| !(v >= 0.0)) {
            return Err(Error::validation(format!(
                "fluidity must be non-negative (cell {j})"
            )));
        }
        Ok(())
    }
}

/// Initial data families.
///
/// Every family yields a non-negative fluidity. The sine presets accept
/// optional amplitude overrides; omitted amplitudes take the values listed
/// on each variant.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum InitialConditionSpec {
    /// `u0 = 0.002 sin(2 pi y)`, `tau0 = tau_mean + 0.5 sin(2 pi y)`,
    /// `f0 = 0.25 (1 - cos(2 pi y))` (peak 0.5). `tau_mean` defaults to 0.
    HomogeneousSine {
        #[serde(default)]
        u_amplitude: Option<f64>,
        #[serde(default)]
        tau_amplitude: Option<f64>,
        #[serde(default)]
        f_amplitude: Option<f64>,
        #[serde(default)]
        tau_mean: Option<f64>,
    },
    /// Same velocity and stress as `HomogeneousSine`, fluidity
    /// `0.5 sin(pi y / beta)` on `[0, beta)` and zero beyond.
    BetaSupport {
        beta: f64,
        #[serde(default)]
        u_amplitude: Option<f64>,
        #[serde(default)]
        tau_amplitude: Option<f64>,
        #[serde(default)]
        f_amplitude: Option<f64>,
        #[serde(default)]
        tau_mean: Option<f64>,
    },
    /// `u0 = a sin^2(pi y / 2)`, `tau0 = 0.5 + 0.25 sin(2 pi y)`,
    /// `f0 = 0.5 + 0.25 sin(2 pi y)`. Requires `a > 0`.
    NonhomogeneousSine {
        #[serde(default)]
        tau_amplitude: Option<f64>,
        #[serde(default)]
        f_amplitude: Option<f64>,
    },
    /// Linear velocity with uniform stress and fluidity.
    Constant { u_slope: f64, tau0: f64, f0: f64 },
    /// `f0 = 0`, `u0 = 0.002 sin(2 pi y)`, `tau0 = tau_mean + 0.5 sin(2 pi y)`
    /// with `tau_mean` defaulting to 0.25.
    ZeroFluidity {
        #[serde(default)]
        u_amplitude: Option<f64>,
        #[serde(default)]
        tau_amplitude: Option<f64>,
        #[serde(default)]
        tau_mean: Option<f64>,
    },
}

impl Default for InitialConditionSpec {
    fn default() -> Self {
        InitialConditionSpec::HomogeneousSine {
            u_amplitude: None,
            tau_amplitude: None,
            f_amplitude: None,
            tau_mean: None,
        }
    }
}

impl InitialConditionSpec {
    pub fn homogeneous_sine() -> Self {
        Self::default()
    }

    pub fn beta_support(beta: f64) -> Self {
        InitialConditionSpec::BetaSupport {
            beta,
            u_amplitude: None,
            tau_amplitude: None,
            f_amplitude: None,
            tau_mean: None,
        }
    }

    /// Sets the mean initial stress of the sine families; other kinds are
    /// returned unchanged.
    pub fn with_tau_mean(mut self, mean: f64) -> Self {
        match &mut self {
            InitialConditionSpec::HomogeneousSine { tau_mean, .. }
            | InitialConditionSpec::BetaSupport { tau_mean, .. }
            | InitialConditionSpec::ZeroFluidity { tau_mean, .. } => *tau_mean = Some(mean),
            _ => {}
        }
        self
    }

    pub fn nonhomogeneous_sine() -> Self {
        InitialConditionSpec::NonhomogeneousSine {
            tau_amplitude: None,
            f_amplitude: None,
        }
    }

    pub fn zero_fluidity() -> Self {
        InitialConditionSpec::ZeroFluidity {
            u_amplitude: None,
            tau_amplitude: None,
            tau_mean: None,
        }
    }

    pub fn constant(u_slope: f64, tau0: f64, f0: f64) -> Self {
        InitialConditionSpec::Constant { u_slope, tau0, f0 }
    }

    /// Checks the spec against the boundary condition it will be used with.
    pub fn validate(&self, bc: &BoundaryCondition) -> Result<()> {
        let finite = |name: &str, v: Option<f64>| -> Result<()> {
            match v {
                Some(x) if !x.is_finite() => {
                    Err(Error::validation(format!("{name} must be finite")))
                }
                _ => Ok(()),
            }
        };
        match *self {
            InitialConditionSpec::HomogeneousSine {
                u_amplitude,
                tau_amplitude,
                f_amplitude,
                tau_mean,
            } => {
                finite("u_amplitude", u_amplitude)?;
                finite("tau_amplitude", tau_amplitude)?;
                finite("tau_mean", tau_mean)?;
                non_negative_amplitude(f_amplitude)
            }
            InitialConditionSpec::BetaSupport {
                beta,
                u_amplitude,
                tau_amplitude,
                f_amplitude,
                tau_mean,
            } => {
                finite("tau_mean", tau_mean)?;
                if !(beta > 0.0 && beta <= 1.0) {
                    return Err(Error::validation("beta must lie in (0, 1]"));
                }
                finite("u_amplitude", u_amplitude)?;
                finite("tau_amplitude", tau_amplitude)?;
                non_negative_amplitude(f_amplitude)
            }
            InitialConditionSpec::NonhomogeneousSine {
                tau_amplitude,
                f_amplitude,
            } => {
                if bc.a <= 0.0 {
                    return Err(Error::validation("nonhomogeneous-sine requires a > 0"));
                }
                finite("tau_amplitude", tau_amplitude)?;
                match f_amplitude {
                    Some(v) if !(v.is_finite() && v.abs() <= 0.5) => Err(Error::validation(
                        "f_amplitude must satisfy |f_amplitude| <= 0.5",
                    )),
                    _ => Ok(()),
                }
            }
            InitialConditionSpec::Constant { u_slope, tau0, f0 } => {
                if !(u_slope.is_finite() && tau0.is_finite()) {
                    return Err(Error::validation("u_slope and tau0 must be finite"));
                }
                if !(f0.is_finite() && f0 >= 0.0) {
                    return Err(Error::validation("f0 must be non-negative"));
                }
                Ok(())
            }
            InitialConditionSpec::ZeroFluidity {
                u_amplitude,
                tau_amplitude,
                tau_mean,
            } => {
                finite("u_amplitude", u_amplitude)?;
                finite("tau_amplitude", tau_amplitude)?;
                finite("tau_mean", tau_mean)
            }
        }
    }
}

fn non_negative_amplitude(v: Option<f64>) -> Result<()> {
    match v {
        Some(x) if !(x.is_finite() && x >= 0.0) => {
            Err(Error::validation("f_amplitude must be non-negative"))
        }
        _ => Ok(()),
    }
}

const U_AMPLITUDE: f64 = 0.002;
const TAU_AMPLITUDE: f64 = 0.5;
const F_PEAK: f64 = 0.5;

/// Samples an initial condition on `grid`: velocity at nodes, stress and
/// fluidity at cell midpoints. Velocity endpoints are set to `0` and `a`.
pub fn build_initial_state(
    spec: &InitialConditionSpec,
    grid: &Grid,
    bc: &BoundaryCondition,
) -> Result<State> {
    spec.validate(bc)?;
    let two_pi = 2.0 * PI;
    let nodal = |profile: &dyn Fn(f64) -> f64| -> Vec<f64> { grid.nodes().map(profile).collect() };
    let cellwise =
        |profile: &dyn Fn(f64) -> f64| -> Vec<f64> { grid.midpoints().map(profile).collect() };

    let (mut u, tau, f) = match *spec {
        InitialConditionSpec::HomogeneousSine {
            u_amplitude,
            tau_amplitude,
            f_amplitude,
            tau_mean,
        } => {
            let au = u_amplitude.unwrap_or(U_AMPLITUDE);
            let at = tau_amplitude.unwrap_or(TAU_AMPLITUDE);
            let af = f_amplitude.unwrap_or(F_PEAK);
            let mean = tau_mean.unwrap_or(0.0);
            (
                nodal(&|y| au * (two_pi * y).sin()),
                cellwise(&|y| mean + at * (two_pi * y).sin()),
                cellwise(&|y| 0.5 * af * (1.0 - (two_pi * y).cos())),
            )
        }
        InitialConditionSpec::BetaSupport {
            beta,
            u_amplitude,
            tau_amplitude,
            f_amplitude,
            tau_mean,
        } => {
            let au = u_amplitude.unwrap_or(U_AMPLITUDE);
            let at = tau_amplitude.unwrap_or(TAU_AMPLITUDE);
            let af = f_amplitude.unwrap_or(F_PEAK);
            let mean = tau_mean.unwrap_or(0.0);
            (
                nodal(&|y| au * (two_pi * y).sin()),
                cellwise(&|y| mean + at * (two_pi * y).sin()),
                cellwise(&|y| {
                    if y < beta {
                        (af * (PI * y / beta).sin()).max(0.0)
                    } else {
                        0.0
                    }
                }),
            )
        }
        InitialConditionSpec::NonhomogeneousSine {
            tau_amplitude,
            f_amplitude,
        } => {
            let a = bc.a;
            let at = tau_amplitude.unwrap_or(0.25);
            let af = f_amplitude.unwrap_or(0.25);
            (
                nodal(&|y| a * (0.5 * PI * y).sin().powi(2)),
                cellwise(&|y| 0.5 + at * (two_pi * y).sin()),
                cellwise(&|y| (0.5 + af * (two_pi * y).sin()).max(0.0)),
            )
        }
        InitialConditionSpec::Constant { u_slope, tau0, f0 } => (
            nodal(&|y| u_slope * y),
            vec![tau0; grid.n_cells()],
            vec![f0; grid.n_cells()],
        ),
        InitialConditionSpec::ZeroFluidity {
            u_amplitude,
            tau_amplitude,
            tau_mean,
        } => {
            let au = u_amplitude.unwrap_or(U_AMPLITUDE);
            let at = tau_amplitude.unwrap_or(TAU_AMPLITUDE);
            let mean = tau_mean.unwrap_or(0.25);
            (
                nodal(&|y| au * (two_pi * y).sin()),
                cellwise(&|y| mean + at * (two_pi * y).sin()),
                vec![0.0; grid.n_cells()],
            )
        }
    };
    let last = u.len() - 1;
    u[0] = 0.0;
    u[last] = bc.a;
    Ok(State { t: 0.0, u, tau, f })
}
