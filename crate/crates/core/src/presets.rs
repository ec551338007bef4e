//! Experiment matrices for the decay-rate figures, each paired with the
//! rates the theory predicts for it.

use std::fmt;
use std::io::Write;
use std::str::FromStr;
use std::thread;

use serde::Serialize;

use crate::config::{NormMode, RunConfig, Scale};
use crate::diagnostics::{
    column_series, fit, sandwich_check, write_csv, DiagnosticsRecord, FluiditySamples, RateFit,
    RateModel, Window, FLOOR,
};
use crate::equilibria::{linearized_rate, steady_nonhomogeneous};
use crate::error::{Error, Result};
use crate::ode::{ode_run, write_trajectory_csv, OdeState};
use crate::params::{BoundaryCondition, Parameters};
use crate::scheme::run_observed;
use crate::state::InitialConditionSpec;

/// Mean initial stress of the homogeneous presets. A zero mean leaves the
/// slowly decaying mean-stress mode with no amplitude.
pub const HOMOGENEOUS_TAU_MEAN: f64 = 0.25;

/// Log-fit floor for the uniform trajectories: once the perturbation is a few
/// hundred ulps of the state the explicit stress update stalls.
pub const ODE_FLOOR: f64 = 1e-12;

const BETA_SWEEP: [f64; 3] = [0.1, 0.6, 0.9];
const ODE_LAMBDAS: [f64; 2] = [0.5, 0.1];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum PresetName {
    FigBc0,
    FigBeta,
    FigNonhom,
    FigOde,
}

impl PresetName {
    pub const ALL: [PresetName; 4] = [
        PresetName::FigBc0,
        PresetName::FigBeta,
        PresetName::FigNonhom,
        PresetName::FigOde,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            PresetName::FigBc0 => "fig-bc0",
            PresetName::FigBeta => "fig-beta",
            PresetName::FigNonhom => "fig-nonhom",
            PresetName::FigOde => "fig-ode",
        }
    }
}

impl fmt::Display for PresetName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for PresetName {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        PresetName::ALL
            .into_iter()
            .find(|p| p.as_str() == s)
            .ok_or_else(|| {
                Error::validation(format!(
                    "unknown preset `{s}` (expected fig-bc0, fig-beta, fig-nonhom or fig-ode)"
                ))
            })
    }
}

#[derive(Debug, Clone)]
pub enum RunSpec {
    Pde {
        config: RunConfig,
        /// Keep every sampled fluidity field (needed by the sandwich check).
        sample_fluidity: bool,
    },
    Ode {
        params: Parameters,
        a: f64,
        tau0: f64,
        f0: f64,
        dt: f64,
        t_end: f64,
    },
}

#[derive(Debug, Clone)]
pub struct PresetRun {
    pub label: String,
    pub spec: RunSpec,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Expectation {
    /// `|rate - expected| <= tolerance`
    Near { expected: f64, tolerance: f64 },
    /// `|rate - expected| <= tolerance * |expected|`
    Relative { expected: f64, tolerance: f64 },
    /// Positive exponential rate with a log-residual below `max_rms`.
    Decays { max_rms: f64 },
}

impl Expectation {
    pub fn accepts(&self, fit: &RateFit) -> bool {
        match *self {
            Expectation::Near {
                expected,
                tolerance,
            } => (fit.rate - expected).abs() <= tolerance,
            Expectation::Relative {
                expected,
                tolerance,
            } => (fit.rate - expected).abs() <= tolerance * expected.abs(),
            Expectation::Decays { max_rms } => fit.rate > 0.0 && fit.rms_residual < max_rms,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Check {
    Rate {
        run: String,
        quantity: String,
        model: RateModel,
        window: Window,
        floor: f64,
        expectation: Expectation,
    },
    /// The quantity stays within `tolerance` of its first recorded value.
    Conserved {
        run: String,
        quantity: String,
        tolerance: f64,
    },
    Sandwich {
        run: String,
        t0: f64,
        alpha: f64,
    },
}

#[derive(Debug, Clone)]
pub struct Preset {
    pub name: PresetName,
    pub scale: Scale,
    pub runs: Vec<PresetRun>,
    pub checks: Vec<Check>,
}

fn tolerance(scale: Scale, desk: f64) -> f64 {
    match scale {
        Scale::Desk => desk,
        Scale::Paper => 0.5 * desk,
    }
}

fn power_check(run: &str, quantity: &str, window: Window, expected: f64, tol: f64) -> Check {
    Check::Rate {
        run: run.to_string(),
        quantity: quantity.to_string(),
        model: RateModel::PowerLaw,
        window,
        floor: FLOOR,
        expectation: Expectation::Near {
            expected,
            tolerance: tol,
        },
    }
}

fn late_window(config: &RunConfig) -> Result<Window> {
    Window::new(0.1 * config.t_end, config.t_end)
}

fn expand_bc0(scale: Scale) -> Result<Preset> {
    let mut config = RunConfig::new(scale);
    config.ic = InitialConditionSpec::homogeneous_sine().with_tau_mean(HOMOGENEOUS_TAU_MEAN);
    let window = late_window(&config)?;
    // full support: the exponents use beta = 1
    let ratio = 1.0 / config.params.lambda;
    let run = "bc0";
    let checks = vec![
        power_check(run, "l2_tau", window, -ratio, tolerance(scale, 0.2)),
        power_check(run, "linf_f", window, -1.0, tolerance(scale, 0.1)),
        power_check(
            run,
            "h1semi_u+l2_tau_fluct",
            window,
            -1.0 - ratio,
            tolerance(scale, 0.3),
        ),
        power_check(run, "l2_combo", window, -2.0 - ratio, tolerance(scale, 0.5)),
        Check::Sandwich {
            run: run.to_string(),
            t0: 100.0,
            alpha: 0.1,
        },
    ];
    Ok(Preset {
        name: PresetName::FigBc0,
        scale,
        runs: vec![PresetRun {
            label: run.to_string(),
            spec: RunSpec::Pde {
                config,
                sample_fluidity: true,
            },
        }],
        checks,
    })
}

fn expand_beta(scale: Scale) -> Result<Preset> {
    let mut runs = Vec::new();
    let mut checks = Vec::new();
    for beta in BETA_SWEEP {
        let mut config = RunConfig::new(scale);
        config.ic = InitialConditionSpec::beta_support(beta).with_tau_mean(HOMOGENEOUS_TAU_MEAN);
        let label = format!("beta-{beta}");
        checks.push(power_check(
            &label,
            "l2_tau",
            late_window(&config)?,
            -beta / config.params.lambda,
            tolerance(scale, 0.2),
        ));
        runs.push(PresetRun {
            label,
            spec: RunSpec::Pde {
                config,
                sample_fluidity: false,
            },
        });
    }

    // beta = 0: no fluidity anywhere, exponential instead of power-law decay
    let mut config = RunConfig::new(scale);
    config.ic = InitialConditionSpec::zero_fluidity();
    config.t_end = 20.0;
    let label = "zero-fluidity";
    checks.push(Check::Rate {
        run: label.to_string(),
        quantity: "h1semi_u+l2_tau_fluct".to_string(),
        model: RateModel::Exponential,
        window: Window::new(1.0, 10.0)?,
        floor: FLOOR,
        expectation: Expectation::Decays { max_rms: 0.1 },
    });
    checks.push(Check::Conserved {
        run: label.to_string(),
        quantity: "mean_tau".to_string(),
        tolerance: 1e-12,
    });
    runs.push(PresetRun {
        label: label.to_string(),
        spec: RunSpec::Pde {
            config,
            sample_fluidity: false,
        },
    });
    Ok(Preset {
        name: PresetName::FigBeta,
        scale,
        runs,
        checks,
    })
}

fn expand_nonhom(scale: Scale) -> Result<Preset> {
    let mut config = RunConfig::new(scale);
    config.bc = BoundaryCondition::new(1.0)?;
    config.ic = InitialConditionSpec::nonhomogeneous_sine();
    config.norm_mode = NormMode::RelativeToSteady;
    config.t_end = 40.0;
    let run = "nonhom";
    Ok(Preset {
        name: PresetName::FigNonhom,
        scale,
        runs: vec![PresetRun {
            label: run.to_string(),
            spec: RunSpec::Pde {
                config,
                sample_fluidity: false,
            },
        }],
        checks: vec![Check::Rate {
            run: run.to_string(),
            quantity: "h1semi_u+l2_tau_fluct".to_string(),
            model: RateModel::Exponential,
            window: Window::new(5.0, 30.0)?,
            floor: FLOOR,
            expectation: Expectation::Decays { max_rms: 0.15 },
        }],
    })
}

fn expand_ode(scale: Scale) -> Result<Preset> {
    let a = 1.0;
    let mut runs = Vec::new();
    let mut checks = Vec::new();
    for lambda in ODE_LAMBDAS {
        let params = Parameters::default().with_lambda(lambda);
        let label = format!("ode-lambda-{lambda}");
        checks.push(Check::Rate {
            run: label.clone(),
            quantity: "perturbation".to_string(),
            model: RateModel::Exponential,
            window: Window::new(5.0, 40.0)?,
            floor: ODE_FLOOR,
            expectation: Expectation::Relative {
                expected: linearized_rate(&params, a)?.c_r,
                tolerance: 0.05,
            },
        });
        runs.push(PresetRun {
            label,
            spec: RunSpec::Ode {
                params,
                a,
                tau0: 0.5,
                f0: 0.5,
                dt: scale.dt(),
                t_end: 40.0,
            },
        });
    }
    Ok(Preset {
        name: PresetName::FigOde,
        scale,
        runs,
        checks,
    })
}

/// Expands a preset into its runs and checks.
pub fn expand(name: PresetName, scale: Scale) -> Result<Preset> {
    match name {
        PresetName::FigBc0 => expand_bc0(scale),
        PresetName::FigBeta => expand_beta(scale),
        PresetName::FigNonhom => expand_nonhom(scale),
        PresetName::FigOde => expand_ode(scale),
    }
}

#[derive(Debug, Clone)]
pub enum RunData {
    Records(Vec<DiagnosticsRecord>),
    Trajectory {
        states: Vec<OdeState>,
        tau_inf: f64,
        f_inf: f64,
    },
}

#[derive(Debug, Clone)]
pub struct RunResult {
    pub label: String,
    pub data: RunData,
    pub fluidity: Option<FluiditySamples>,
}

impl RunResult {
    /// `(t, value)` series of a record column expression, or of `tau`, `f`
    /// or `perturbation` (`|tau - tau_inf| + |f - f_inf|`) for trajectories.
    pub fn series(&self, quantity: &str) -> Result<Vec<(f64, f64)>> {
        match &self.data {
            RunData::Records(records) => column_series(records, quantity),
            RunData::Trajectory {
                states,
                tau_inf,
                f_inf,
            } => {
                let value: fn(&OdeState, f64, f64) -> f64 = match quantity {
                    "tau" => |s, _, _| s.tau,
                    "f" => |s, _, _| s.f,
                    "perturbation" => |s, ti, fi| (s.tau - ti).abs() + (s.f - fi).abs(),
                    _ => {
                        return Err(Error::validation(format!(
                            "unknown trajectory quantity `{quantity}`"
                        )))
                    }
                };
                Ok(states
                    .iter()
                    .map(|s| (s.t, value(s, *tau_inf, *f_inf)))
                    .collect())
            }
        }
    }

    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        match &self.data {
            RunData::Records(records) => write_csv(records, out),
            RunData::Trajectory { states, .. } => write_trajectory_csv(states, out),
        }
    }
}

fn execute_run(run: &PresetRun) -> Result<RunResult> {
    match &run.spec {
        RunSpec::Pde {
            config,
            sample_fluidity,
        } => {
            let mut samples = sample_fluidity.then(FluiditySamples::default);
            let out = run_observed(config, |state, _| {
                if let Some(s) = samples.as_mut() {
                    s.push(state.t, &state.f);
                }
            })?;
            Ok(RunResult {
                label: run.label.clone(),
                data: RunData::Records(out.records),
                fluidity: samples,
            })
        }
        RunSpec::Ode {
            params,
            a,
            tau0,
            f0,
            dt,
            t_end,
        } => {
            let steady = steady_nonhomogeneous(params, *a)?;
            Ok(RunResult {
                label: run.label.clone(),
                data: RunData::Trajectory {
                    states: ode_run(params, *a, *tau0, *f0, *dt, *t_end)?,
                    tau_inf: steady.tau_inf(),
                    f_inf: steady.f_inf(),
                },
                fluidity: None,
            })
        }
    }
}

/// Runs every member of the preset on its own thread. Results come back in
/// the preset's order; the first failing run's error is returned.
pub fn execute(preset: &Preset) -> Result<Vec<RunResult>> {
    thread::scope(|scope| {
        let handles: Vec<_> = preset
            .runs
            .iter()
            .map(|run| scope.spawn(move || execute_run(run)))
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("preset run panicked"))
            .collect()
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckOutcome {
    pub run: String,
    pub quantity: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub expectation: Option<Expectation>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub fit: Option<RateFit>,
    /// Largest drift for conservation checks, failing cells for the sandwich.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub observed: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tolerance: Option<f64>,
    pub passed: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub message: Option<String>,
}

impl CheckOutcome {
    fn failed(
        run: &str,
        quantity: &str,
        expectation: Option<Expectation>,
        message: String,
    ) -> Self {
        CheckOutcome {
            run: run.to_string(),
            quantity: quantity.to_string(),
            expectation,
            fit: None,
            observed: None,
            tolerance: None,
            passed: false,
            message: Some(message),
        }
    }

    /// One-line human summary.
    pub fn describe(&self) -> String {
        let verdict = if self.passed { "PASS" } else { "FAIL" };
        let body = match (&self.fit, &self.expectation, self.observed) {
            (Some(fit), Some(exp), _) => {
                let target = match exp {
                    Expectation::Near {
                        expected,
                        tolerance,
                    } => format!("expected {expected:.4} +/- {tolerance}"),
                    Expectation::Relative {
                        expected,
                        tolerance,
                    } => format!("expected {expected:.4} within {}%", tolerance * 100.0),
                    Expectation::Decays { max_rms } => format!("rate > 0, rms < {max_rms}"),
                };
                format!(
                    "rate {:.4} (rms {:.4}, {} points), {target}",
                    fit.rate, fit.rms_residual, fit.n_points
                )
            }
            (_, _, Some(v)) => match self.tolerance {
                Some(tol) => format!("max drift {v:.3e}, tolerance {tol:.0e}"),
                None => format!("{v} failing cells"),
            },
            _ => String::new(),
        };
        let mut line = format!("{verdict} {} {}: {body}", self.run, self.quantity);
        if let Some(m) = &self.message {
            line.push_str(&format!(" [{m}]"));
        }
        line
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PresetSummary {
    pub preset: PresetName,
    pub scale: Scale,
    pub checks: Vec<CheckOutcome>,
    pub passed: bool,
}

fn evaluate_check(check: &Check, results: &[RunResult]) -> CheckOutcome {
    let find = |label: &str| results.iter().find(|r| r.label == label);
    match check {
        Check::Rate {
            run,
            quantity,
            model,
            window,
            floor,
            expectation,
        } => {
            let Some(result) = find(run) else {
                return CheckOutcome::failed(
                    run,
                    quantity,
                    Some(*expectation),
                    "missing run".into(),
                );
            };
            let series = match result.series(quantity) {
                Ok(s) => s,
                Err(e) => {
                    return CheckOutcome::failed(run, quantity, Some(*expectation), e.to_string())
                }
            };
            let kept: Vec<(f64, f64)> = series.into_iter().filter(|&(_, v)| v > *floor).collect();
            match fit(&kept, *window, *model) {
                Ok(f) => CheckOutcome {
                    run: run.clone(),
                    quantity: quantity.clone(),
                    expectation: Some(*expectation),
                    fit: Some(f),
                    observed: None,
                    tolerance: None,
                    passed: expectation.accepts(&f),
                    message: None,
                },
                Err(e) => CheckOutcome::failed(run, quantity, Some(*expectation), e.to_string()),
            }
        }
        Check::Conserved {
            run,
            quantity,
            tolerance,
        } => {
            let series = match find(run).map(|r| r.series(quantity)) {
                Some(Ok(s)) => s,
                Some(Err(e)) => return CheckOutcome::failed(run, quantity, None, e.to_string()),
                None => return CheckOutcome::failed(run, quantity, None, "missing run".into()),
            };
            let first = series.first().map_or(0.0, |&(_, v)| v);
            let drift = series
                .iter()
                .map(|&(_, v)| (v - first).abs())
                .fold(0.0, f64::max);
            CheckOutcome {
                run: run.clone(),
                quantity: quantity.clone(),
                expectation: None,
                fit: None,
                observed: Some(drift),
                tolerance: Some(*tolerance),
                passed: drift <= *tolerance,
                message: None,
            }
        }
        Check::Sandwich { run, t0, alpha } => {
            let quantity = format!("fluidity-sandwich(t0={t0}, alpha={alpha})");
            let Some(samples) = find(run).and_then(|r| r.fluidity.as_ref()) else {
                return CheckOutcome::failed(run, &quantity, None, "no fluidity samples".into());
            };
            match sandwich_check(samples, *t0, *alpha) {
                Ok(report) => {
                    let failing = report.per_cell.iter().filter(|&&ok| !ok).count();
                    CheckOutcome {
                        run: run.clone(),
                        quantity,
                        expectation: None,
                        fit: None,
                        observed: Some(failing as f64),
                        tolerance: None,
                        passed: report.all_pass,
                        message: None,
                    }
                }
                Err(e) => CheckOutcome::failed(run, &quantity, None, e.to_string()),
            }
        }
    }
}

/// Compares run results against the preset's expected rates.
pub fn evaluate(preset: &Preset, results: &[RunResult]) -> PresetSummary {
    let checks: Vec<CheckOutcome> = preset
        .checks
        .iter()
        .map(|c| evaluate_check(c, results))
        .collect();
    PresetSummary {
        preset: preset.name,
        scale: preset.scale,
        passed: checks.iter().all(|c| c.passed),
        checks,
    }
}

/// Expands, runs and evaluates a preset.
pub fn run_preset(name: PresetName, scale: Scale) -> Result<(Vec<RunResult>, PresetSummary)> {
    let preset = expand(name, scale)?;
    let results = execute(&preset)?;
    let summary = evaluate(&preset, &results);
    Ok((results, summary))
}
