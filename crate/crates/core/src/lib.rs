//! Numerical laboratory for an aging (fluidity-model) fluid in 1D Couette flow.
//!
//! The state is a P1 velocity with P0 stress and fluidity on a uniform grid of
//! `[0, 1]`. [`scheme`] advances it with a semi-implicit splitting,
//! [`equilibria`] gives the closed-form steady states and linearized rates,
//! [`ode`] is the spatially uniform reduction, and [`diagnostics`] measures
//! norms and fits power-law or exponential decay rates.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod config;
pub mod diagnostics;
pub mod equilibria;
pub mod error;
pub mod fem1d;
pub mod grid;
pub mod ode;
pub mod params;
pub mod presets;
pub mod scheme;
pub mod state;

pub use config::{load_config, parse_config, NormMode, RunConfig, Scale};
pub use diagnostics::{DiagnosticsRecord, RateFit, RateModel, Window};
pub use equilibria::{StabilityReport, SteadyState};
pub use error::{Error, Result};
pub use grid::Grid;
pub use ode::OdeState;
pub use params::{validate_parameters, BoundaryCondition, Parameters};
pub use scheme::{run, RunOutput, StepReport, Stepper};
pub use state::{build_initial_state, InitialConditionSpec, State};
