//! Physical coefficients and boundary data.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// The six positive coefficients of the fluidity model.
///
/// `g_mod` is the elastic modulus `G`; `xi` weights stress-driven
/// rejuvenation and `nu` the cubic aging term.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Parameters {
    pub rho: f64,
    pub eta: f64,
    pub lambda: f64,
    pub g_mod: f64,
    pub xi: f64,
    pub nu: f64,
}

impl Default for Parameters {
    /// Low-Reynolds reference set: rho = 0.001, lambda = 0.5, everything else 1.
    fn default() -> Self {
        Parameters {
            rho: 0.001,
            eta: 1.0,
            lambda: 0.5,
            g_mod: 1.0,
            xi: 1.0,
            nu: 1.0,
        }
    }
}

impl Parameters {
    pub fn with_lambda(self, lambda: f64) -> Self {
        Parameters { lambda, ..self }
    }

    pub fn validate(self) -> Result<Self> {
        validate_parameters(self)
    }

    fn fields(&self) -> [(&'static str, f64); 6] {
        [
            ("rho", self.rho),
            ("eta", self.eta),
            ("lambda", self.lambda),
            ("g_mod", self.g_mod),
            ("xi", self.xi),
            ("nu", self.nu),
        ]
    }
}

/// Returns `p` unchanged when every coefficient is finite and strictly positive.
pub fn validate_parameters(p: Parameters) -> Result<Parameters> {
    for (name, value) in p.fields() {
        if !(value.is_finite() && value > 0.0) {
            return Err(Error::validation(format!("{name} must be positive")));
        }
    }
    Ok(p)
}

/// Dirichlet data: `u(t,0) = 0` and `u(t,1) = a`.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct BoundaryCondition {
    pub a: f64,
}

impl BoundaryCondition {
    pub fn new(a: f64) -> Result<Self> {
        if !(a.is_finite() && a >= 0.0) {
            return Err(Error::validation("a must be non-negative"));
        }
        Ok(BoundaryCondition { a })
    }

    pub fn is_homogeneous(&self) -> bool {
        self.a == 0.0
    }
}
