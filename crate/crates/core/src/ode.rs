//! Spatially uniform reduction: linear velocity `u = a y`, uniform stress
//! and fluidity. The stepper applies exactly the PDE stress and fluidity
//! updates with `du/dy = a`.

use std::io::Write;

use serde::Serialize;

use crate::equilibria::sigma;
use crate::error::{Error, Result};
use crate::params::Parameters;
use crate::scheme::{fluidity_update, stress_update};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct OdeState {
    pub t: f64,
    pub tau: f64,
    pub f: f64,
}

pub fn ode_step(s: OdeState, p: &Parameters, a: f64, dt: f64) -> OdeState {
    let tau = stress_update(s.tau, s.f, a, p, dt);
    OdeState {
        t: s.t + dt,
        tau,
        f: fluidity_update(s.f, tau.abs(), p, dt),
    }
}

fn check_inputs(f0: f64, t_end: f64) -> Result<()> {
    if !(f0.is_finite() && f0 > 0.0) {
        return Err(Error::validation("f0 must be positive"));
    }
    if !(t_end.is_finite() && t_end >= 0.0) {
        return Err(Error::validation("t_end must be non-negative"));
    }
    Ok(())
}

/// Trajectory sampled at every step, starting with the initial state.
pub fn ode_run(
    p: &Parameters,
    a: f64,
    tau0: f64,
    f0: f64,
    dt: f64,
    t_end: f64,
) -> Result<Vec<OdeState>> {
    check_inputs(f0, t_end)?;
    if !(dt.is_finite() && dt > 0.0) {
        return Err(Error::validation("dt must be positive"));
    }
    let n = (t_end / dt).round() as usize;
    let mut out = Vec::with_capacity(n + 1);
    let mut s = OdeState {
        t: 0.0,
        tau: tau0,
        f: f0,
    };
    out.push(s);
    for k in 1..=n {
        s = ode_step(s, p, a, dt);
        s.t = k as f64 * dt;
        if !(s.tau.is_finite() && s.f.is_finite()) {
            return Err(Error::Divergence {
                stage: "ode",
                t: s.t,
            });
        }
        out.push(s);
    }
    Ok(out)
}

/// Writes a trajectory as `t,tau,f` rows with 17 significant digits.
pub fn write_trajectory_csv<W: Write>(trajectory: &[OdeState], mut out: W) -> Result<()> {
    writeln!(out, "t,tau,f")?;
    for s in trajectory {
        writeln!(out, "{:.16e},{:.16e},{:.16e}", s.t, s.tau, s.f)?;
    }
    Ok(())
}

fn rhs(p: &Parameters, a: f64, tau: f64, f: f64) -> (f64, f64) {
    (
        (p.g_mod * a - f * tau) / p.lambda,
        (-1.0 + p.xi * tau.abs()) * f * f - p.nu * f * f * f,
    )
}

fn rk4(p: &Parameters, a: f64, tau0: f64, f0: f64, t_end: f64, n: usize) -> (f64, f64) {
    let h = t_end / n as f64;
    let (mut tau, mut f) = (tau0, f0);
    for _ in 0..n {
        let k1 = rhs(p, a, tau, f);
        let k2 = rhs(p, a, tau + 0.5 * h * k1.0, f + 0.5 * h * k1.1);
        let k3 = rhs(p, a, tau + 0.5 * h * k2.0, f + 0.5 * h * k2.1);
        let k4 = rhs(p, a, tau + h * k3.0, f + h * k3.1);
        tau += h / 6.0 * (k1.0 + 2.0 * k2.0 + 2.0 * k3.0 + k4.0);
        f += h / 6.0 * (k1.1 + 2.0 * k2.1 + 2.0 * k3.1 + k4.1);
    }
    (tau, f)
}

/// Reference solution at `t_end` by classical RK4, halving the step until
/// two successive answers differ by less than `tol` (which may not go
/// below `1e-12`).
pub fn ode_oracle(
    p: &Parameters,
    a: f64,
    tau0: f64,
    f0: f64,
    t_end: f64,
    tol: f64,
) -> Result<OdeState> {
    check_inputs(f0, t_end)?;
    if !(tol >= 1e-12) {
        return Err(Error::validation("tol must be at least 1e-12"));
    }
    if t_end == 0.0 {
        return Ok(OdeState {
            t: 0.0,
            tau: tau0,
            f: f0,
        });
    }
    const MAX_STEPS: usize = 1 << 24;
    let mut n = ((t_end / 0.05).ceil() as usize).max(8);
    let mut prev = rk4(p, a, tau0, f0, t_end, n);
    while n < MAX_STEPS {
        n *= 2;
        let next = rk4(p, a, tau0, f0, t_end, n);
        let diff = (next.0 - prev.0).abs().max((next.1 - prev.1).abs());
        if !diff.is_finite() {
            break;
        }
        if diff < tol {
            return Ok(OdeState {
                t: t_end,
                tau: next.0,
                f: next.1,
            });
        }
        prev = next;
    }
    Err(Error::Numeric(format!(
        "RK4 step halving did not reach tol = {tol} by t = {t_end}"
    )))
}

/// Regions of the `(tau, f)` quarter plane used in the boundedness argument.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Region {
    /// `f <= sigma` and above the nullcline `f = (xi tau - 1)/nu`.
    A1,
    /// `f <= sigma` and below the nullcline.
    A2,
    /// `f > sigma`.
    A3,
}

pub fn classify_region(p: &Parameters, a: f64, tau: f64, f: f64) -> Result<Region> {
    let s = sigma(p, a)?;
    Ok(if f > s {
        Region::A3
    } else if f >= (p.xi * tau - 1.0) / p.nu {
        Region::A1
    } else {
        Region::A2
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::equilibria::{fluidity_floor_m_f, steady_nonhomogeneous};

    fn p() -> Parameters {
        Parameters::default()
    }

    #[test]
    fn steady_state_is_a_fixed_point() {
        let ss = steady_nonhomogeneous(&p(), 1.0).unwrap();
        let s0 = OdeState {
            t: 0.0,
            tau: ss.tau_inf(),
            f: ss.f_inf(),
        };
        let s1 = ode_step(s0, &p(), 1.0, 0.01);
        assert!((s1.tau - s0.tau).abs() < 1e-14);
        assert!((s1.f - s0.f).abs() < 1e-14);
        let traj = ode_run(&p(), 1.0, s0.tau, s0.f, 0.01, 1.0).unwrap();
        assert!(traj.iter().all(|s| (s.tau - s0.tau).abs() < 1e-13));
    }

    #[test]
    fn solid_grows_stress_linearly() {
        let s = ode_step(
            OdeState {
                t: 0.0,
                tau: 0.3,
                f: 0.0,
            },
            &p(),
            1.0,
            0.1,
        );
        assert_eq!(s.f, 0.0);
        assert!((s.tau - (0.3 + 0.1 / 0.5)).abs() < 1e-15);
    }

    #[test]
    fn one_step_by_hand() {
        let s = ode_step(
            OdeState {
                t: 0.0,
                tau: 0.0,
                f: 1.0,
            },
            &p(),
            1.0,
            0.1,
        );
        assert!((s.tau - 0.2).abs() < 1e-15);
        // root of 0.1 X^2 + 1.08 X - 1 = 0
        let expected = (-1.08 + (1.08f64 * 1.08 + 0.4).sqrt()) / 0.2;
        assert!((s.f - expected).abs() < 1e-14);
        assert!((s.f - 0.857_795_138_864_806).abs() < 1e-12);
    }

    #[test]
    fn run_converges_to_oracle() {
        let oracle = ode_oracle(&p(), 1.0, 0.5, 0.5, 10.0, 1e-12).unwrap();
        let traj = ode_run(&p(), 1.0, 0.5, 0.5, 1e-3, 10.0).unwrap();
        let last = traj.last().unwrap();
        assert_eq!(traj.len(), 10_001);
        assert!((last.tau - oracle.tau).abs() < 10.0 * 1e-3);
        assert!((last.f - oracle.f).abs() < 10.0 * 1e-3);
    }

    #[test]
    fn oracle_edge_cases() {
        let s = ode_oracle(&p(), 1.0, 0.2, 0.7, 0.0, 1e-10).unwrap();
        assert_eq!((s.tau, s.f), (0.2, 0.7));
        let ss = steady_nonhomogeneous(&p(), 1.0).unwrap();
        let s = ode_oracle(&p(), 1.0, ss.tau_inf(), ss.f_inf(), 5.0, 1e-12).unwrap();
        assert!((s.tau - ss.tau_inf()).abs() < 1e-12);
        assert!(ode_oracle(&p(), 1.0, 0.2, 0.0, 1.0, 1e-10).is_err());
        assert!(ode_oracle(&p(), 1.0, 0.2, 0.5, 1.0, 1e-14).is_err());
    }

    #[test]
    fn converges_at_reference_parameters() {
        let traj = ode_run(&p(), 1.0, 0.5, 0.5, 1e-3, 40.0).unwrap();
        let last = traj.last().unwrap();
        let ss = steady_nonhomogeneous(&p(), 1.0).unwrap();
        assert!((last.tau - ss.tau_inf()).abs() < 1e-6);
        assert!((last.f - ss.f_inf()).abs() < 1e-6);
    }

    #[test]
    fn trajectory_stays_bounded() {
        let (tau0, f0): (f64, f64) = (0.5, 0.5);
        let m_f = fluidity_floor_m_f(&p(), 1.0, f0).unwrap();
        let bound = tau0.max((p().g_mod * 1.0 + 1.0) / m_f) + 1.0;
        let traj = ode_run(&p(), 1.0, tau0, f0, 1e-3, 40.0).unwrap();
        assert!(traj.iter().all(|s| s.tau <= bound && s.f > 0.0));
    }

    #[test]
    fn rejects_solid_start() {
        assert!(ode_run(&p(), 1.0, 0.5, 0.0, 0.01, 1.0).is_err());
    }

    #[test]
    fn regions() {
        let a = 1.0;
        assert_eq!(classify_region(&p(), a, 0.5, 0.9).unwrap(), Region::A3);
        assert_eq!(classify_region(&p(), a, 0.5, 0.1).unwrap(), Region::A1);
        assert_eq!(classify_region(&p(), a, 3.0, 0.1).unwrap(), Region::A2);
    }
}
