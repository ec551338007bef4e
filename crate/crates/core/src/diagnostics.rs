//! Norms of the discrete fields, support measure, decay-rate fitting and
//! the fluidity envelope check.

use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use crate::equilibria::SteadyState;
use crate::error::{Error, Result};
use crate::fem1d::gradient_p1_to_p0;
use crate::grid::Grid;
use crate::params::Parameters;
use crate::state::State;

/// Samples below this magnitude are excluded from log fits.
pub const FLOOR: f64 = 1e-14;

/// One time sample of every monitored quantity.
#[allow(non_snake_case)]
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct DiagnosticsRecord {
    pub t: f64,
    pub l2_u: f64,
    /// `||du/dy||_L2`
    pub h1semi_u: f64,
    pub l2_tau: f64,
    pub l2_f: f64,
    pub linf_tau: f64,
    pub linf_f: f64,
    pub mean_tau: f64,
    pub mean_f: f64,
    /// `||tau - mean(tau)||_L2`
    pub l2_tau_fluct: f64,
    /// `||eta du/dy + tau - mean(tau)||_L2`
    pub l2_combo: f64,
    /// `||dU/dy||_L2` for `U = u + (1/eta) int_0^y (tau - mean(tau))`
    pub l2_dUdy: f64,
    /// `G rho ||u||^2 + lambda ||tau||^2`
    pub energy_homogeneous: f64,
}

pub const CSV_HEADER: [&str; 13] = [
    "t",
    "l2_u",
    "h1semi_u",
    "l2_tau",
    "l2_f",
    "linf_tau",
    "linf_f",
    "mean_tau",
    "mean_f",
    "l2_tau_fluct",
    "l2_combo",
    "l2_dUdy",
    "energy_homogeneous",
];

impl DiagnosticsRecord {
    pub fn values(&self) -> [f64; 13] {
        [
            self.t,
            self.l2_u,
            self.h1semi_u,
            self.l2_tau,
            self.l2_f,
            self.linf_tau,
            self.linf_f,
            self.mean_tau,
            self.mean_f,
            self.l2_tau_fluct,
            self.l2_combo,
            self.l2_dUdy,
            self.energy_homogeneous,
        ]
    }

    /// Value of a named column, or a `+`-separated sum of columns such as
    /// `h1semi_u+l2_tau_fluct`.
    pub fn column(&self, expr: &str) -> Result<f64> {
        let values = self.values();
        expr.split('+')
            .map(|name| {
                let name = name.trim();
                CSV_HEADER
                    .iter()
                    .position(|&h| h == name)
                    .map(|i| values[i])
                    .ok_or_else(|| Error::validation(format!("unknown column `{name}`")))
            })
            .sum()
    }
}

/// Time series `(t, value)` of one column expression.
pub fn column_series(records: &[DiagnosticsRecord], expr: &str) -> Result<Vec<(f64, f64)>> {
    records.iter().map(|r| Ok((r.t, r.column(expr)?))).collect()
}

fn l2_cells(values: impl Iterator<Item = f64>, h: f64) -> f64 {
    (h * values.map(|v| v * v).sum::<f64>()).sqrt()
}

fn linf(values: &[f64]) -> f64 {
    values.iter().fold(0.0, |m, v| m.max(v.abs()))
}

/// Measures a state, or its difference from `reference` when one is given.
pub fn record(
    state: &State,
    grid: &Grid,
    p: &Parameters,
    reference: Option<&SteadyState>,
) -> DiagnosticsRecord {
    let h = grid.h();
    let owned;
    let s = match reference {
        Some(ss) => {
            let r = ss.sample(grid);
            owned = State {
                t: state.t,
                u: state.u.iter().zip(&r.u).map(|(a, b)| a - b).collect(),
                tau: state.tau.iter().zip(&r.tau).map(|(a, b)| a - b).collect(),
                f: state.f.iter().zip(&r.f).map(|(a, b)| a - b).collect(),
            };
            &owned
        }
        None => state,
    };

    // exact integral of the squared linear interpolant on each cell
    let l2_u = (h / 3.0
        * s.u
            .windows(2)
            .map(|w| w[0] * w[0] + w[0] * w[1] + w[1] * w[1])
            .sum::<f64>())
    .sqrt();
    let du = gradient_p1_to_p0(&s.u, grid);
    let mean_tau = h * s.tau.iter().sum::<f64>();
    let mean_f = h * s.f.iter().sum::<f64>();
    let l2_tau = l2_cells(s.tau.iter().copied(), h);
    let fluct = || s.tau.iter().map(|&v| v - mean_tau);
    let l2_combo = l2_cells(du.iter().zip(fluct()).map(|(d, fl)| p.eta * d + fl), h);
    let l2_dudy = l2_cells(du.iter().zip(fluct()).map(|(d, fl)| d + fl / p.eta), h);

    DiagnosticsRecord {
        t: state.t,
        l2_u,
        h1semi_u: l2_cells(du.iter().copied(), h),
        l2_tau,
        l2_f: l2_cells(s.f.iter().copied(), h),
        linf_tau: linf(&s.tau),
        linf_f: linf(&s.f),
        mean_tau,
        mean_f,
        l2_tau_fluct: l2_cells(fluct(), h),
        l2_combo,
        l2_dUdy: l2_dudy,
        energy_homogeneous: p.g_mod * p.rho * l2_u * l2_u + p.lambda * l2_tau * l2_tau,
    }
}

/// Measure of the set where the fluidity is positive.
pub fn measure_beta(f0: &[f64], grid: &Grid) -> Result<f64> {
    if f0.iter().any(|&v| !(v >= 0.0)) {
        return Err(Error::Domain("fluidity must be non-negative".into()));
    }
    Ok(grid.h() * f0.iter().filter(|&&v| v > 0.0).count() as f64)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RateModel {
    /// `v ~ C (1 + t)^s`; the fitted rate is `s`.
    PowerLaw,
    /// `v ~ C exp(-r t)`; the fitted rate is `r`.
    Exponential,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Window {
    pub lo: f64,
    pub hi: f64,
}

impl Window {
    pub fn new(lo: f64, hi: f64) -> Result<Self> {
        if !(lo.is_finite() && hi.is_finite() && lo < hi) {
            return Err(Error::validation(format!(
                "window [{lo}, {hi}] must satisfy lo < hi"
            )));
        }
        Ok(Window { lo, hi })
    }

    pub fn contains(&self, t: f64) -> bool {
        t >= self.lo && t <= self.hi
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RateFit {
    pub model: RateModel,
    pub rate: f64,
    /// Log-space intercept: `ln C`.
    pub intercept: f64,
    pub window: Window,
    pub rms_residual: f64,
    pub n_points: usize,
}

/// Drops samples whose value is below [`FLOOR`] (or not finite).
pub fn above_floor(series: &[(f64, f64)]) -> Vec<(f64, f64)> {
    series
        .iter()
        .copied()
        .filter(|&(_, v)| v.is_finite() && v >= FLOOR)
        .collect()
}

fn fit_log_linear(series: &[(f64, f64)], window: Window, model: RateModel) -> Result<RateFit> {
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    for &(t, v) in series.iter().filter(|(t, _)| window.contains(*t)) {
        if !(v > 0.0 && v.is_finite()) {
            return Err(Error::Fit(format!(
                "non-positive value {v} at t = {t}; shrink the window"
            )));
        }
        let x = match model {
            RateModel::PowerLaw => {
                if !(t > 0.0) {
                    return Err(Error::Fit(format!("power-law fit needs t > 0, got {t}")));
                }
                t.ln_1p()
            }
            RateModel::Exponential => t,
        };
        xs.push(x);
        ys.push(v.ln());
    }
    let n = xs.len();
    if n < 5 {
        return Err(Error::Fit(format!(
            "{n} points in [{}, {}]; at least 5 are needed",
            window.lo, window.hi
        )));
    }
    let nf = n as f64;
    let mx = xs.iter().sum::<f64>() / nf;
    let my = ys.iter().sum::<f64>() / nf;
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    if sxx <= 0.0 {
        return Err(Error::Fit("all samples share the same abscissa".into()));
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let rms = (xs
        .iter()
        .zip(&ys)
        .map(|(x, y)| {
            let r = y - (intercept + slope * x);
            r * r
        })
        .sum::<f64>()
        / nf)
        .sqrt();
    let rate = match model {
        RateModel::PowerLaw => slope,
        RateModel::Exponential => -slope,
    };
    Ok(RateFit {
        model,
        rate,
        intercept,
        window,
        rms_residual: rms,
        n_points: n,
    })
}

/// Least-squares slope of `ln v` against `ln(1 + t)`; negative for decay.
pub fn fit_power_law(series: &[(f64, f64)], window: Window) -> Result<RateFit> {
    fit_log_linear(series, window, RateModel::PowerLaw)
}

/// Least-squares slope of `ln v` against `t`, sign-flipped; positive for decay.
pub fn fit_exponential(series: &[(f64, f64)], window: Window) -> Result<RateFit> {
    fit_log_linear(series, window, RateModel::Exponential)
}

pub fn fit(series: &[(f64, f64)], window: Window, model: RateModel) -> Result<RateFit> {
    fit_log_linear(series, window, model)
}

/// Snapshots of the fluidity field, `fields[k]` taken at `times[k]`.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct FluiditySamples {
    pub times: Vec<f64>,
    pub fields: Vec<Vec<f64>>,
}

impl FluiditySamples {
    pub fn push(&mut self, t: f64, f: &[f64]) {
        self.times.push(t);
        self.fields.push(f.to_vec());
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SandwichReport {
    pub t0: f64,
    pub alpha: f64,
    pub per_cell: Vec<bool>,
    pub all_pass: bool,
}

/// Checks `1/(1/f0 + (1+alpha)(t-t0)) <= f(t) <= 1/(1/f0 + (1-alpha)(t-t0))`
/// for every sample after the first one at or past `t0`; cells with zero
/// fluidity at `t0` must stay exactly zero.
pub fn sandwich_check(samples: &FluiditySamples, t0: f64, alpha: f64) -> Result<SandwichReport> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::validation("alpha must lie in (0, 1)"));
    }
    let k0 = samples
        .times
        .iter()
        .position(|&t| t >= t0)
        .ok_or_else(|| Error::validation(format!("t0 = {t0} is past the last sample")))?;
    let t_ref = samples.times[k0];
    let base = &samples.fields[k0];
    let slack = 1e-12;
    let per_cell: Vec<bool> = (0..base.len())
        .map(|j| {
            let f0 = base[j];
            samples.times[k0 + 1..]
                .iter()
                .zip(&samples.fields[k0 + 1..])
                .all(|(&t, field)| {
                    let f = field[j];
                    if f0 == 0.0 {
                        return f == 0.0;
                    }
                    let elapsed = t - t_ref;
                    let lower = 1.0 / (1.0 / f0 + (1.0 + alpha) * elapsed);
                    let upper = 1.0 / (1.0 / f0 + (1.0 - alpha) * elapsed);
                    f >= lower * (1.0 - slack) && f <= upper * (1.0 + slack)
                })
        })
        .collect();
    let all_pass = per_cell.iter().all(|&ok| ok);
    Ok(SandwichReport {
        t0: t_ref,
        alpha,
        per_cell,
        all_pass,
    })
}

/// Writes records as CSV: fixed header, 17 significant digits, LF endings.
pub fn write_csv<W: Write>(records: &[DiagnosticsRecord], mut out: W) -> Result<()> {
    writeln!(out, "{}", CSV_HEADER.join(","))?;
    for r in records {
        let row: Vec<String> = r.values().iter().map(|v| format!("{v:.16e}")).collect();
        writeln!(out, "{}", row.join(","))?;
    }
    Ok(())
}

/// Reads `(t, value)` pairs for a column expression from any CSV with a `t`
/// column; `+` sums several columns.
pub fn read_csv_series<R: Read>(input: R, expr: &str) -> Result<Vec<(f64, f64)>> {
    let mut reader = csv::Reader::from_reader(input);
    let headers = reader.headers()?.clone();
    let index = |name: &str| {
        headers
            .iter()
            .position(|h| h.trim() == name)
            .ok_or_else(|| Error::validation(format!("column `{name}` not found")))
    };
    let t_col = index("t")?;
    let cols: Vec<usize> = expr
        .split('+')
        .map(|c| index(c.trim()))
        .collect::<Result<_>>()?;
    let parse = |s: &str| -> Result<f64> {
        s.trim()
            .parse::<f64>()
            .map_err(|e| Error::validation(format!("bad number `{s}`: {e}")))
    };
    let mut out = Vec::new();
    for row in reader.records() {
        let row = row?;
        let t = parse(&row[t_col])?;
        let v = cols.iter().map(|&c| parse(&row[c])).sum::<Result<f64>>()?;
        out.push((t, v));
    }
    Ok(out)
}
