//! Semi-implicit time stepping of the velocity/stress/fluidity system.
//!
//! Each step runs three stages in order:
//!
//! 1. momentum, implicit in `u` with the previous stress as load;
//! 2. stress, explicit per cell using the new velocity gradient;
//! 3. fluidity, implicit per cell via the non-negative root of a quadratic.

use serde::Serialize;

use crate::config::{NormMode, RunConfig};
use crate::diagnostics::{record, DiagnosticsRecord};
use crate::equilibria::{steady_nonhomogeneous, SteadyState};
use crate::error::{Error, Result};
use crate::fem1d::{
    apply_mass_interior, assemble_momentum_operator, gradient_into, solve_tridiagonal_into,
    TridiagonalSystem,
};
use crate::grid::Grid;
use crate::params::{BoundaryCondition, Parameters};
use crate::state::{build_initial_state, State};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct StepReport {
    pub t_new: f64,
    pub max_f: f64,
    pub min_f: f64,
    /// The fluidity update is closed form, so this is always zero.
    pub fluidity_root_iterations: u32,
    pub energy_homogeneous: f64,
}

/// Solves `(f_new - f_old)/dt = (-1 + xi |tau|) f_old f_new - nu f_old f_new^2`
/// for the non-negative `f_new`.
///
/// The quadratic `nu dt f_old X^2 + (1 + dt f_old (1 - xi |tau|)) X - f_old = 0`
/// has roots of opposite sign when `f_old > 0`; zero stays zero.
#[inline]
pub fn fluidity_update(f_old: f64, tau_abs: f64, p: &Parameters, dt: f64) -> f64 {
    if f_old == 0.0 {
        return 0.0;
    }
    let a = p.nu * dt * f_old;
    let b = 1.0 + dt * f_old * (1.0 - p.xi * tau_abs);
    let disc = (b * b + 4.0 * a * f_old).sqrt();
    if b >= 0.0 {
        2.0 * f_old / (b + disc)
    } else {
        (disc - b) / (2.0 * a)
    }
}

#[inline]
pub fn stress_update(tau: f64, f: f64, du_dy: f64, p: &Parameters, dt: f64) -> f64 {
    tau + dt / p.lambda * (p.g_mod * du_dy - f * tau)
}

/// Reusable stepping context: operator, parameters and scratch buffers.
#[derive(Debug, Clone)]
pub struct Stepper {
    params: Parameters,
    bc: BoundaryCondition,
    grid: Grid,
    dt: f64,
    op: TridiagonalSystem,
    rhs: Vec<f64>,
    sol: Vec<f64>,
    scratch: Vec<f64>,
    grad: Vec<f64>,
}

impl Stepper {
    pub fn new(params: Parameters, bc: BoundaryCondition, grid: Grid, dt: f64) -> Result<Self> {
        let op = assemble_momentum_operator(&params, &grid, dt)?;
        Ok(Self::with_operator(params, bc, grid, dt, op))
    }

    /// `op` must have been assembled from the same parameters, grid and `dt`.
    pub fn with_operator(
        params: Parameters,
        bc: BoundaryCondition,
        grid: Grid,
        dt: f64,
        op: TridiagonalSystem,
    ) -> Self {
        let n = grid.n_interior();
        Stepper {
            params,
            bc,
            grid,
            dt,
            op,
            rhs: vec![0.0; n],
            sol: vec![0.0; n],
            scratch: vec![0.0; n],
            grad: vec![0.0; grid.n_cells()],
        }
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    /// Advances `state` by one step in place.
    pub fn advance(&mut self, state: &mut State) -> Result<StepReport> {
        let p = self.params;
        let dt = self.dt;
        let h = self.grid.h();
        let n = self.grid.n_cells();
        let t_new = state.t + dt;

        // (1) momentum
        apply_mass_interior(&state.u, h, &mut self.rhs);
        let mass_scale = p.rho / dt;
        for (i, r) in self.rhs.iter_mut().enumerate() {
            *r = mass_scale * *r + (state.tau[i + 1] - state.tau[i]);
        }
        // coupling to the Dirichlet node u(1) = a
        let last = self.rhs.len() - 1;
        self.rhs[last] -= self.op.upper[last] * self.bc.a;
        solve_tridiagonal_into(&self.op, &self.rhs, &mut self.sol, &mut self.scratch)?;
        if self.sol.iter().any(|v| !v.is_finite()) {
            return Err(Error::Divergence {
                stage: "momentum",
                t: t_new,
            });
        }
        state.u[0] = 0.0;
        state.u[1..n].copy_from_slice(&self.sol);
        state.u[n] = self.bc.a;

        // (2) stress, with the old fluidity
        gradient_into(&state.u, h, &mut self.grad);
        let mut finite = true;
        for j in 0..n {
            let tau = stress_update(state.tau[j], state.f[j], self.grad[j], &p, dt);
            finite &= tau.is_finite();
            state.tau[j] = tau;
        }
        if !finite {
            return Err(Error::Divergence {
                stage: "stress",
                t: t_new,
            });
        }

        // (3) fluidity, with the new stress
        let mut max_f = 0.0f64;
        let mut min_f = f64::INFINITY;
        for j in 0..n {
            let f = fluidity_update(state.f[j], state.tau[j].abs(), &p, dt);
            max_f = max_f.max(f);
            min_f = min_f.min(f);
            state.f[j] = f;
        }
        if !(max_f.is_finite() && min_f.is_finite()) {
            return Err(Error::Divergence {
                stage: "fluidity",
                t: t_new,
            });
        }
        state.t = t_new;

        let l2_u_sq = h / 3.0
            * state
                .u
                .windows(2)
                .map(|w| w[0] * w[0] + w[0] * w[1] + w[1] * w[1])
                .sum::<f64>();
        let l2_tau_sq = h * state.tau.iter().map(|v| v * v).sum::<f64>();
        Ok(StepReport {
            t_new,
            max_f,
            min_f,
            fluidity_root_iterations: 0,
            energy_homogeneous: p.g_mod * p.rho * l2_u_sq + p.lambda * l2_tau_sq,
        })
    }
}

/// One step from `state`, returning the new state.
pub fn step(
    state: &State,
    p: &Parameters,
    bc: &BoundaryCondition,
    grid: &Grid,
    dt: f64,
    op: &TridiagonalSystem,
) -> Result<(State, StepReport)> {
    let mut stepper = Stepper::with_operator(*p, *bc, *grid, dt, op.clone());
    let mut next = state.clone();
    let report = stepper.advance(&mut next)?;
    Ok((next, report))
}

/// Steady state used by relative-to-steady diagnostics: the positive-fluidity
/// state when `a > 0`; otherwise rest with the initial mean stress when the
/// fluid starts fully solid, and the null state when it does not.
pub fn reference_steady_state(
    p: &Parameters,
    bc: &BoundaryCondition,
    initial: &State,
    grid: &Grid,
) -> Result<SteadyState> {
    if bc.a > 0.0 {
        return steady_nonhomogeneous(p, bc.a);
    }
    if initial.f.iter().all(|&v| v == 0.0) {
        let mean = grid.h() * initial.tau.iter().sum::<f64>();
        Ok(SteadyState::homogeneous(mean))
    } else {
        Ok(SteadyState::homogeneous(0.0))
    }
}

#[derive(Debug, Clone)]
pub struct RunOutput {
    pub final_state: State,
    pub records: Vec<DiagnosticsRecord>,
}

/// Integrates `config` from `t = 0` to `t_end`.
pub fn run(config: &RunConfig) -> Result<RunOutput> {
    run_observed(config, |_, _| {})
}

/// Like [`run`], calling `observer` with the state and its record at every
/// sampling instant (including `t = 0`).
pub fn run_observed<F>(config: &RunConfig, observer: F) -> Result<RunOutput>
where
    F: FnMut(&State, &DiagnosticsRecord),
{
    config.validate()?;
    let grid = config.grid()?;
    let initial = build_initial_state(&config.ic, &grid, &config.bc)?;
    run_from_state(config, initial, observer)
}

/// Integrates from an explicit initial state; `config.ic` is ignored.
pub fn run_from_state<F>(config: &RunConfig, initial: State, mut observer: F) -> Result<RunOutput>
where
    F: FnMut(&State, &DiagnosticsRecord),
{
    config.validate()?;
    let grid = config.grid()?;
    initial.check(&grid, &config.bc)?;
    let reference = match config.norm_mode {
        NormMode::Absolute => None,
        NormMode::RelativeToSteady => Some(reference_steady_state(
            &config.params,
            &config.bc,
            &initial,
            &grid,
        )?),
    };
    let mut stepper = Stepper::new(config.params, config.bc, grid, config.dt)?;
    let mut state = initial;
    let t_start = state.t;
    let n_steps = config.n_steps();
    let mut records = Vec::with_capacity(n_steps / config.record_every + 2);

    let mut sample = |state: &State, records: &mut Vec<DiagnosticsRecord>| {
        let rec = record(state, &grid, &config.params, reference.as_ref());
        observer(state, &rec);
        records.push(rec);
    };
    sample(&state, &mut records);
    for k in 1..=n_steps {
        stepper.advance(&mut state)?;
        // avoid accumulating round-off in the clock
        state.t = t_start + k as f64 * config.dt;
        if k % config.record_every == 0 || k == n_steps {
            sample(&state, &mut records);
        }
    }
    Ok(RunOutput {
        final_state: state,
        records,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::Scale;
    use crate::equilibria::steady_nonhomogeneous;
    use crate::state::InitialConditionSpec;

    fn defaults() -> Parameters {
        Parameters::default()
    }

    #[test]
    fn quadratic_root_by_hand() {
        let p = Parameters {
            nu: 1.0,
            xi: 1.0,
            ..defaults()
        };
        // 0.1 X^2 + X - 1 = 0
        let f = fluidity_update(1.0, 1.0, &p, 0.1);
        assert!((f - (-1.0 + 1.4f64.sqrt()) / 0.2).abs() < 1e-15);
        assert!((f - 0.916_079_783).abs() < 1e-8);
    }

    #[test]
    fn quadratic_root_satisfies_implicit_relation() {
        let p = defaults();
        for &(f_old, tau, dt) in &[
            (0.3, 0.0, 0.01),
            (2.0, 50.0, 0.5),
            (1e-9, 3.0, 0.005),
            (4.0, 100.0, 1.0),
        ] {
            let f = fluidity_update(f_old, tau, &p, dt);
            assert!(f > 0.0);
            let lhs = (f - f_old) / dt;
            let rhs = (-1.0 + p.xi * tau) * f_old * f - p.nu * f_old * f * f;
            assert!(
                (lhs - rhs).abs() <= 1e-12 * (1.0 + lhs.abs()),
                "{f_old} {tau} {dt}"
            );
        }
        assert_eq!(fluidity_update(0.0, 10.0, &p, 0.1), 0.0);
    }

    #[test]
    fn rest_state_is_fixed() {
        let g = Grid::new(20).unwrap();
        let p = defaults();
        let bc = BoundaryCondition::default();
        let op = assemble_momentum_operator(&p, &g, 0.01).unwrap();
        let mut s = State::zeros(&g);
        s.tau.fill(0.37);
        let (next, report) = step(&s, &p, &bc, &g, 0.01, &op).unwrap();
        assert!(next.u.iter().all(|&v| v == 0.0));
        assert!(next.tau.iter().all(|&v| v == 0.37));
        assert!(next.f.iter().all(|&v| v == 0.0));
        assert_eq!(report.min_f, 0.0);
        assert_eq!(report.fluidity_root_iterations, 0);
    }

    #[test]
    fn linear_velocity_stays_linear() {
        let g = Grid::new(16).unwrap();
        let p = defaults();
        let bc = BoundaryCondition::new(0.8).unwrap();
        let mut stepper = Stepper::new(p, bc, g, 0.01).unwrap();
        let mut s =
            build_initial_state(&InitialConditionSpec::constant(0.8, 0.3, 0.9), &g, &bc).unwrap();
        for _ in 0..100 {
            stepper.advance(&mut s).unwrap();
        }
        for (i, y) in g.nodes().enumerate() {
            assert!((s.u[i] - 0.8 * y).abs() < 1e-12);
        }
        let (t0, f0) = (s.tau[0], s.f[0]);
        assert!(s.tau.iter().all(|&v| (v - t0).abs() < 1e-12));
        assert!(s.f.iter().all(|&v| (v - f0).abs() < 1e-12));
    }

    #[test]
    fn divergence_names_the_stage() {
        let g = Grid::new(4).unwrap();
        let bc = BoundaryCondition::default();
        let mut stepper = Stepper::new(defaults(), bc, g, 0.01).unwrap();
        let mut s = State::zeros(&g);
        s.tau[1] = f64::INFINITY;
        let err = stepper.advance(&mut s).unwrap_err();
        assert!(
            matches!(
                err,
                Error::Divergence {
                    stage: "momentum",
                    ..
                }
            ),
            "{err}"
        );
    }

    #[test]
    fn zero_duration_run_has_one_record() {
        let mut cfg = RunConfig::new(Scale::Desk);
        cfg.t_end = 0.0;
        let out = run(&cfg).unwrap();
        assert_eq!(out.records.len(), 1);
        assert_eq!(out.records[0].t, 0.0);
    }

    #[test]
    fn steady_state_is_held() {
        let p = defaults();
        let bc = BoundaryCondition::new(1.0).unwrap();
        let ss = steady_nonhomogeneous(&p, 1.0).unwrap();
        let mut cfg = RunConfig::new(Scale::Desk);
        cfg.bc = bc;
        cfg.n_cells = 32;
        cfg.t_end = 10.0;
        cfg.norm_mode = NormMode::RelativeToSteady;
        let g = cfg.grid().unwrap();
        let out = run_from_state(&cfg, ss.sample(&g), |_, _| {}).unwrap();
        let last = out.records.last().unwrap();
        assert!(last.l2_tau < 1e-12 && last.l2_f < 1e-12 && last.l2_u < 1e-12);
    }

    #[test]
    fn reference_selection() {
        let g = Grid::new(10).unwrap();
        let p = defaults();
        let solid = build_initial_state(
            &InitialConditionSpec::zero_fluidity(),
            &g,
            &BoundaryCondition::default(),
        )
        .unwrap();
        let r = reference_steady_state(&p, &BoundaryCondition::default(), &solid, &g).unwrap();
        assert!((r.tau_inf() - 0.25).abs() < 1e-12);
        let fluid = build_initial_state(
            &InitialConditionSpec::homogeneous_sine(),
            &g,
            &BoundaryCondition::default(),
        )
        .unwrap();
        let r = reference_steady_state(&p, &BoundaryCondition::default(), &fluid, &g).unwrap();
        assert_eq!(r.tau_inf(), 0.0);
    }
}
