//! Closed-form steady states and the stability quantities of the reduced
//! (spatially uniform) system.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::grid::Grid;
use crate::params::Parameters;
use crate::state::State;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum SteadyKind {
    /// `(0, c, 0)`, the rest states under `a = 0`.
    Homogeneous { c: f64 },
    /// The unique state with positive fluidity everywhere.
    Nonhomogeneous,
    /// Fluid on `[0, beta_inf)`, solid on `[beta_inf, 1]`.
    Piecewise { beta_inf: f64 },
}

/// Velocity slope, stress and fluidity on one region of a steady state.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RegionState {
    pub u_slope: f64,
    pub tau: f64,
    pub f: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SteadyState {
    #[serde(flatten)]
    pub kind: SteadyKind,
    /// Values on `[0, boundary)`.
    pub fluid: RegionState,
    /// Values on `[boundary, 1]`, present for piecewise states only.
    pub solid: Option<RegionState>,
    pub boundary: f64,
    /// Velocity at `y = 1`.
    pub a: f64,
}

impl SteadyState {
    pub fn homogeneous(c: f64) -> Self {
        SteadyState {
            kind: SteadyKind::Homogeneous { c },
            fluid: RegionState {
                u_slope: 0.0,
                tau: c,
                f: 0.0,
            },
            solid: None,
            boundary: 1.0,
            a: 0.0,
        }
    }

    pub fn tau_inf(&self) -> f64 {
        self.fluid.tau
    }

    pub fn f_inf(&self) -> f64 {
        self.fluid.f
    }

    fn region(&self, y: f64) -> &RegionState {
        match &self.solid {
            Some(solid) if y >= self.boundary => solid,
            _ => &self.fluid,
        }
    }

    pub fn velocity(&self, y: f64) -> f64 {
        match &self.solid {
            Some(solid) if y >= self.boundary => {
                self.fluid.u_slope * self.boundary + solid.u_slope * (y - self.boundary)
            }
            _ => self.fluid.u_slope * y,
        }
    }

    pub fn stress(&self, y: f64) -> f64 {
        self.region(y).tau
    }

    pub fn fluidity(&self, y: f64) -> f64 {
        self.region(y).f
    }

    /// Discrete representation: exact nodal velocity, cellwise midpoint values.
    pub fn sample(&self, grid: &Grid) -> State {
        let mut u: Vec<f64> = grid.nodes().map(|y| self.velocity(y)).collect();
        u[0] = 0.0;
        let last = u.len() - 1;
        u[last] = self.a;
        State {
            t: 0.0,
            u,
            tau: grid.midpoints().map(|y| self.stress(y)).collect(),
            f: grid.midpoints().map(|y| self.fluidity(y)).collect(),
        }
    }
}

fn require_positive_a(a: f64) -> Result<()> {
    if !(a.is_finite() && a > 0.0) {
        return Err(Error::Domain("boundary velocity a must be positive".into()));
    }
    Ok(())
}

/// `sqrt(1 + x) - 1` without cancellation for small `x`.
fn sqrt1p_m1(x: f64) -> f64 {
    x / ((1.0 + x).sqrt() + 1.0)
}

/// Steady stress and fluidity of a region sheared at rate `shear`:
/// the positive root of `(xi tau - 1) tau = nu G shear`.
fn fluid_region(p: &Parameters, shear: f64) -> RegionState {
    let x = 4.0 * p.nu * p.xi * p.g_mod * shear;
    RegionState {
        u_slope: shear,
        tau: ((1.0 + x).sqrt() + 1.0) / (2.0 * p.xi),
        f: sqrt1p_m1(x) / (2.0 * p.nu),
    }
}

/// The steady state with `f > 0` everywhere under `u(1) = a > 0`:
/// linear velocity, uniform stress and fluidity.
pub fn steady_nonhomogeneous(p: &Parameters, a: f64) -> Result<SteadyState> {
    require_positive_a(a)?;
    Ok(SteadyState {
        kind: SteadyKind::Nonhomogeneous,
        fluid: fluid_region(p, a),
        solid: None,
        boundary: 1.0,
        a,
    })
}

/// Steady state whose fluidity is positive on a set of measure `beta_inf`.
///
/// The fluid region is sheared at `a / beta_inf`; in the solid region the
/// velocity is flat and the stress jumps by `eta a / beta_inf` so that
/// `eta u' + tau` stays constant across the interface.
pub fn steady_piecewise(p: &Parameters, a: f64, beta_inf: f64) -> Result<SteadyState> {
    require_positive_a(a)?;
    if !(beta_inf > 0.0 && beta_inf <= 1.0) {
        return Err(Error::Domain("beta_inf must lie in (0, 1]".into()));
    }
    let fluid = fluid_region(p, a / beta_inf);
    if beta_inf == 1.0 {
        return Ok(SteadyState {
            kind: SteadyKind::Piecewise { beta_inf },
            fluid,
            solid: None,
            boundary: 1.0,
            a,
        });
    }
    Ok(SteadyState {
        kind: SteadyKind::Piecewise { beta_inf },
        fluid,
        solid: Some(RegionState {
            u_slope: 0.0,
            tau: p.eta * a / beta_inf + fluid.tau,
            f: 0.0,
        }),
        boundary: beta_inf,
        a,
    })
}

/// Residuals of the stationary equations for one region:
/// `(G u' - f tau, nu f + 1 - xi |tau|)`. The second is skipped (zero) where `f = 0`.
pub fn stationary_residuals(p: &Parameters, region: &RegionState) -> (f64, f64) {
    let stress = p.g_mod * region.u_slope - region.f * region.tau;
    let fluidity = if region.f > 0.0 {
        p.nu * region.f + 1.0 - p.xi * region.tau.abs()
    } else {
        0.0
    };
    (stress, fluidity)
}

/// Threshold separating the regions used in the boundedness argument.
pub fn sigma(p: &Parameters, a: f64) -> Result<f64> {
    let ss = steady_nonhomogeneous(p, a)?;
    let ga = p.g_mod * a;
    let x = 4.0 * p.nu * p.xi * ga;
    let first = 3.0 * ga / (ga * p.nu + 4.0 * ss.tau_inf());
    let second = sqrt1p_m1(x) / (3.0 * p.nu);
    Ok(first.min(second))
}

/// `(lambda xi / (2 G a)) ((nu sigma + 1)/xi + 4/xi)^2`, shared by the
/// Dulac condition and the fluidity floor.
fn stress_excursion_term(p: &Parameters, a: f64, sigma: f64) -> f64 {
    let inner = (p.nu * sigma + 1.0) / p.xi + 4.0 / p.xi;
    p.lambda * p.xi / (2.0 * p.g_mod * a) * inner * inner
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DulacCondition {
    pub lhs: f64,
    pub holds: bool,
}

/// Parameter inequality excluding periodic orbits of the reduced system.
/// Sufficient for convergence, not necessary.
pub fn dulac_condition(p: &Parameters, a: f64) -> Result<DulacCondition> {
    let s = sigma(p, a)?;
    let lhs = -1.0 / p.lambda - 2.0
        + 2.0 * p.xi * (1.0 + p.g_mod * a) * (1.0 / s + stress_excursion_term(p, a, s));
    Ok(DulacCondition {
        lhs,
        holds: lhs < 0.0,
    })
}

/// Lower bound on the reduced-system fluidity started from `f0 > 0`.
pub fn fluidity_floor_m_f(p: &Parameters, a: f64, f0: f64) -> Result<f64> {
    if !(f0.is_finite() && f0 > 0.0) {
        return Err(Error::Domain("f0 must be positive".into()));
    }
    let s = sigma(p, a)?;
    Ok(1.0 / ((1.0 / f0).max(1.0 / s) + stress_excursion_term(p, a, s)))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum EigenClass {
    ComplexPair,
    RealNegativePair,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct StabilityReport {
    pub delta: f64,
    pub c_r: f64,
    pub eigen_class: EigenClass,
    pub sigma: f64,
    pub dulac_lhs: f64,
    pub dulac_holds: bool,
    /// Only available when an initial fluidity is supplied.
    pub m_f: Option<f64>,
}

/// Jacobian of the reduced system at its positive steady state,
/// row-major `[[dtau'/dtau, dtau'/df], [df'/dtau, df'/df]]`.
pub fn reduced_jacobian(p: &Parameters, a: f64) -> Result<[[f64; 2]; 2]> {
    let ss = steady_nonhomogeneous(p, a)?;
    let (tau, f) = (ss.tau_inf(), ss.f_inf());
    Ok([
        [-f / p.lambda, -tau / p.lambda],
        [p.xi * f * f, -p.nu * f * f],
    ])
}

/// Exponential convergence rate from the linearization at `(tau_inf, f_inf)`.
///
/// `delta` is the discriminant of the characteristic polynomial; `delta = 0`
/// counts as a real pair.
pub fn linearized_rate(p: &Parameters, a: f64) -> Result<StabilityReport> {
    stability_report(p, a, None)
}

pub fn stability_report(p: &Parameters, a: f64, f0: Option<f64>) -> Result<StabilityReport> {
    let ss = steady_nonhomogeneous(p, a)?;
    let (tau, f) = (ss.tau_inf(), ss.f_inf());
    let lam = p.lambda;
    let spread = 1.0 / lam + p.nu * f;
    let delta = f * f * (spread * spread - 4.0 * (p.nu * f / lam + p.xi * tau / lam));
    let half_trace = 0.5 * (f / lam + p.nu * f * f);
    let (c_r, eigen_class) = if delta >= 0.0 {
        (
            half_trace - 0.5 * delta.sqrt(),
            EigenClass::RealNegativePair,
        )
    } else {
        (half_trace, EigenClass::ComplexPair)
    };
    let dulac = dulac_condition(p, a)?;
    let m_f = f0.map(|f0| fluidity_floor_m_f(p, a, f0)).transpose()?;
    Ok(StabilityReport {
        delta,
        c_r,
        eigen_class,
        sigma: sigma(p, a)?,
        dulac_lhs: dulac.lhs,
        dulac_holds: dulac.holds,
        m_f,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn unit() -> Parameters {
        Parameters::default()
    }

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    #[test]
    fn golden_ratio_steady_state() {
        let ss = steady_nonhomogeneous(&unit(), 1.0).unwrap();
        assert!(close(ss.tau_inf(), 1.618_033_988_749_895, 1e-14));
        assert!(close(ss.f_inf(), 0.618_033_988_749_895, 1e-14));
        assert!(close(ss.tau_inf() * ss.f_inf(), 1.0, 1e-14));
        assert!(close(ss.f_inf(), -1.0 + ss.tau_inf(), 1e-14));
        assert_eq!(ss.velocity(0.25), 0.25);
    }

    #[test]
    fn nonpositive_a_is_a_domain_error() {
        assert!(matches!(
            steady_nonhomogeneous(&unit(), 0.0),
            Err(Error::Domain(_))
        ));
        assert!(sigma(&unit(), -1.0).is_err());
    }

    #[test]
    fn tiny_shear_has_no_cancellation() {
        let ss = steady_nonhomogeneous(&unit(), 1e-14).unwrap();
        // f tau = G a to full relative precision
        assert!(close(ss.f_inf() * ss.tau_inf() / 1e-14, 1.0, 1e-12));
    }

    #[test]
    fn piecewise_full_support_matches_plain() {
        let p = unit();
        let pw = steady_piecewise(&p, 1.0, 1.0).unwrap();
        let plain = steady_nonhomogeneous(&p, 1.0).unwrap();
        assert_eq!(pw.fluid, plain.fluid);
        assert!(pw.solid.is_none());
    }

    #[test]
    fn piecewise_half_support() {
        let p = Parameters { eta: 1.0, ..unit() };
        let pw = steady_piecewise(&p, 1.0, 0.5).unwrap();
        assert!(close(pw.fluid.tau, 2.0, 1e-14));
        assert!(close(pw.fluid.f, 1.0, 1e-14));
        assert!(close(pw.fluid.u_slope, 2.0, 1e-14));
        let solid = pw.solid.unwrap();
        assert!(close(solid.tau, 4.0, 1e-14));
        assert_eq!(solid.f, 0.0);
        assert!(close(pw.fluid.f * pw.fluid.tau, p.g_mod * 1.0 / 0.5, 1e-14));
        assert!(close(pw.velocity(1.0), 1.0, 1e-15));
        assert!(close(pw.velocity(0.75), 1.0, 1e-15));
        // eta u' + tau is continuous across the interface
        assert!(close(
            p.eta * pw.fluid.u_slope + pw.fluid.tau,
            p.eta * solid.u_slope + solid.tau,
            1e-14
        ));
        assert!(steady_piecewise(&p, 1.0, 0.0).is_err());
        assert!(steady_piecewise(&p, 1.0, 1.2).is_err());
    }

    #[test]
    fn sigma_at_reference_parameters() {
        let s = sigma(&unit(), 1.0).unwrap();
        // min{3 / (1 + 4 tau_inf), (sqrt 5 - 1)/3} = min{0.4014916, 0.4120227}
        assert!(close(s, 0.401_491_624_090_794_4, 1e-12));
        assert!(s < steady_nonhomogeneous(&unit(), 1.0).unwrap().f_inf());
    }

    #[test]
    fn dulac_fails_at_reference_parameters() {
        let d = dulac_condition(&unit(), 1.0).unwrap();
        assert!(close(d.lhs, 35.138_959_705_122_45, 1e-9));
        assert!(!d.holds);
        let small = dulac_condition(&unit().with_lambda(1e-4), 1.0).unwrap();
        assert!(small.holds);
        let lo = dulac_condition(&unit().with_lambda(0.4), 1.0).unwrap().lhs;
        assert!(lo < d.lhs);
    }

    #[test]
    fn fluidity_floor() {
        let p = unit();
        let s = sigma(&p, 1.0).unwrap();
        let m = fluidity_floor_m_f(&p, 1.0, s).unwrap();
        assert!(close(m, 0.102_199_957_028_405_3, 1e-12));
        assert!(m <= s);
        let below = fluidity_floor_m_f(&p, 1.0, 0.5 * s).unwrap();
        let above = fluidity_floor_m_f(&p, 1.0, 2.0 * s).unwrap();
        assert!(below < m);
        assert_eq!(above, m);
        assert!(fluidity_floor_m_f(&p, 1.0, 0.0).is_err());
    }

    #[test]
    fn reported_convergence_rates() {
        let r = linearized_rate(&unit(), 1.0).unwrap();
        assert_eq!(r.eigen_class, EigenClass::ComplexPair);
        assert!(r.delta < 0.0);
        assert!(close(r.c_r, 0.8090, 5e-5));
        let r = linearized_rate(&unit().with_lambda(0.1), 1.0).unwrap();
        assert_eq!(r.eigen_class, EigenClass::RealNegativePair);
        assert!(r.delta > 0.0);
        assert!(close(r.c_r, 1.7895, 5e-5));
    }

    #[test]
    fn sampled_steady_state_boundary_values() {
        let g = Grid::new(10).unwrap();
        let s = steady_piecewise(&unit(), 1.0, 0.5).unwrap().sample(&g);
        assert_eq!(s.u[0], 0.0);
        assert!(close(s.u[10], 1.0, 1e-15));
        assert_eq!(s.f[4], 1.0);
        assert_eq!(s.f[5], 0.0);
    }
}
