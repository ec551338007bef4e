//! Run configuration: JSON schema, defaults per scale, validation.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::Grid;
use crate::params::{validate_parameters, BoundaryCondition, Parameters};
use crate::state::InitialConditionSpec;

/// Whether diagnostics measure the fields themselves or their distance to
/// the steady state selected by the boundary data.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum NormMode {
    #[default]
    Absolute,
    RelativeToSteady,
}

/// Resolution presets.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Scale {
    /// `N = 200`, `dt = 0.01`, `T = 2000`.
    #[default]
    Desk,
    /// `N = 500` (`h = 0.002`), `dt = 0.005`, `T = 10000`.
    Paper,
}

impl Scale {
    pub fn n_cells(self) -> usize {
        match self {
            Scale::Desk => 200,
            Scale::Paper => 500,
        }
    }

    pub fn dt(self) -> f64 {
        match self {
            Scale::Desk => 0.01,
            Scale::Paper => 0.005,
        }
    }

    pub fn t_end(self) -> f64 {
        match self {
            Scale::Desk => 2000.0,
            Scale::Paper => 10000.0,
        }
    }

    /// Steps between records, one record every 0.1 time units.
    pub fn record_every(self) -> usize {
        match self {
            Scale::Desk => 10,
            Scale::Paper => 20,
        }
    }
}

impl std::str::FromStr for Scale {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "desk" => Ok(Scale::Desk),
            "paper" => Ok(Scale::Paper),
            other => Err(Error::validation(format!("unknown scale `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunConfig {
    pub params: Parameters,
    pub bc: BoundaryCondition,
    pub n_cells: usize,
    pub dt: f64,
    pub t_end: f64,
    pub record_every: usize,
    pub ic: InitialConditionSpec,
    pub norm_mode: NormMode,
    pub output_path: Option<PathBuf>,
}

impl RunConfig {
    pub fn new(scale: Scale) -> Self {
        RunConfig {
            params: Parameters::default(),
            bc: BoundaryCondition::default(),
            n_cells: scale.n_cells(),
            dt: scale.dt(),
            t_end: scale.t_end(),
            record_every: scale.record_every(),
            ic: InitialConditionSpec::default(),
            norm_mode: NormMode::default(),
            output_path: None,
        }
    }

    pub fn grid(&self) -> Result<Grid> {
        Grid::new(self.n_cells)
    }

    /// Number of time steps, `t_end / dt` rounded to the nearest integer.
    pub fn n_steps(&self) -> usize {
        (self.t_end / self.dt).round() as usize
    }

    pub fn validate(&self) -> Result<()> {
        let at = |path: &str, e: Error| Error::Config {
            path: path.into(),
            message: e.to_string(),
        };
        validate_parameters(self.params).map_err(|e| at("params", e))?;
        BoundaryCondition::new(self.bc.a).map_err(|e| at("bc.a", e))?;
        Grid::new(self.n_cells).map_err(|e| at("n_cells", e))?;
        if !(self.dt.is_finite() && self.dt > 0.0) {
            return Err(at("dt", Error::validation("dt must be positive")));
        }
        if !(self.t_end.is_finite() && self.t_end >= 0.0) {
            return Err(at("t_end", Error::validation("t_end must be non-negative")));
        }
        if self.record_every == 0 {
            return Err(at(
                "record_every",
                Error::validation("record_every must be at least 1"),
            ));
        }
        self.ic.validate(&self.bc).map_err(|e| at("ic", e))?;
        Ok(())
    }
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    params: Option<Parameters>,
    bc: Option<BoundaryCondition>,
    n_cells: Option<usize>,
    dt: Option<f64>,
    t_end: Option<f64>,
    record_every: Option<usize>,
    ic: Option<InitialConditionSpec>,
    norm_mode: Option<NormMode>,
    output_path: Option<PathBuf>,
}

/// Parses a JSON run configuration; missing fields take the `scale` defaults.
pub fn parse_config(json: &str, scale: Scale) -> Result<RunConfig> {
    let de = &mut serde_json::Deserializer::from_str(json);
    let raw: RawConfig = serde_path_to_error::deserialize(de).map_err(|e| Error::Config {
        path: e.path().to_string(),
        message: e.inner().to_string(),
    })?;
    let base = RunConfig::new(scale);
    let cfg = RunConfig {
        params: raw.params.unwrap_or(base.params),
        bc: raw.bc.unwrap_or(base.bc),
        n_cells: raw.n_cells.unwrap_or(base.n_cells),
        dt: raw.dt.unwrap_or(base.dt),
        t_end: raw.t_end.unwrap_or(base.t_end),
        record_every: raw.record_every.unwrap_or(base.record_every),
        ic: raw.ic.unwrap_or(base.ic),
        norm_mode: raw.norm_mode.unwrap_or(base.norm_mode),
        output_path: raw.output_path,
    };
    cfg.validate()?;
    Ok(cfg)
}

pub fn load_config(path: &Path, scale: Scale) -> Result<RunConfig> {
    let text = std::fs::read_to_string(path)?;
    parse_config(&text, scale)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_object_gives_desk_defaults() {
        let cfg = parse_config("{}", Scale::Desk).unwrap();
        assert_eq!(cfg, RunConfig::new(Scale::Desk));
        assert_eq!(cfg.params, Parameters::default());
        assert_eq!((cfg.n_cells, cfg.dt, cfg.t_end), (200, 0.01, 2000.0));
    }

    #[test]
    fn paper_scale_defaults() {
        let cfg = parse_config("{}", Scale::Paper).unwrap();
        let g = cfg.grid().unwrap();
        assert!((g.h() - 0.002).abs() < 1e-15);
        assert_eq!(cfg.dt, 0.005);
        assert_eq!(cfg.t_end, 10000.0);
        assert_eq!(cfg.n_steps(), 2_000_000);
    }

    #[test]
    fn negative_dt_names_the_field() {
        let err = parse_config(r#"{"dt": -1}"#, Scale::Desk).unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("dt must be positive"), "{msg}");
        assert!(msg.contains("`dt`"), "{msg}");
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let err = parse_config(r#"{"params": {"rho": 1, "mu": 2}}"#, Scale::Desk).unwrap_err();
        assert!(err.to_string().contains("params"), "{err}");
        assert!(parse_config(r#"{"steps": 3}"#, Scale::Desk).is_err());
    }

    #[test]
    fn partial_params_keep_defaults() {
        let cfg = parse_config(
            r#"{"params": {"lambda": 0.1}, "bc": {"a": 1}, "ic": {"kind": "nonhomogeneous-sine"},
                "norm_mode": "relative-to-steady"}"#,
            Scale::Desk,
        )
        .unwrap();
        assert_eq!(cfg.params.lambda, 0.1);
        assert_eq!(cfg.params.rho, 0.001);
        assert_eq!(cfg.bc.a, 1.0);
        assert_eq!(cfg.norm_mode, NormMode::RelativeToSteady);
    }

    #[test]
    fn invariant_violations() {
        assert!(parse_config(r#"{"params": {"eta": 0}}"#, Scale::Desk).is_err());
        assert!(parse_config(r#"{"record_every": 0}"#, Scale::Desk).is_err());
        assert!(parse_config(r#"{"n_cells": 1}"#, Scale::Desk).is_err());
        assert!(parse_config(r#"{"ic": {"kind": "nonhomogeneous-sine"}}"#, Scale::Desk).is_err());
        assert!(parse_config("{not json", Scale::Desk).is_err());
    }
}
