//! Initial states.

use std::fmt;
use std::str::FromStr;

use crate::discretization::Discretization;
use crate::error::{Error, Result};
use crate::fields::{MixtureParams, State};
use crate::mms::ManufacturedSolution;

/// Radius of the quiescent drop.
pub const DROP_RADIUS: f64 = 0.5;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Scenario {
    /// Circular drop at rest, `phi = -1` inside.
    #[default]
    QuiescentDrop,
    /// Manufactured solution at `t = 0`.
    Manufactured,
}

impl Scenario {
    pub fn initial_state(self, disc: &Discretization, params: &MixtureParams<f64>) -> Result<State> {
        match self {
            Scenario::QuiescentDrop => quiescent_drop(disc, params),
            Scenario::Manufactured => mms_initial_state(disc, params),
        }
    }
}

impl fmt::Display for Scenario {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Scenario::QuiescentDrop => "quiescent",
            Scenario::Manufactured => "mms",
        })
    }
}

impl FromStr for Scenario {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "quiescent" | "drop" => Ok(Scenario::QuiescentDrop),
            "mms" | "manufactured" => Ok(Scenario::Manufactured),
            _ => Err(Error::InvalidArgument(format!("unknown scenario `{s}`"))),
        }
    }
}

/// `0.9 eta^2 / (13 gamma)`, inside the admissible range.
pub fn admissible_dt(params: &MixtureParams<f64>) -> f64 {
    0.9 * params.eta * params.eta / (13.0 * params.gamma)
}

/// Equilibrium profile `tanh((r - R) / (sqrt(2) eta))`, no flow.
pub fn quiescent_drop(disc: &Discretization, params: &MixtureParams<f64>) -> Result<State> {
    let w = std::f64::consts::SQRT_2 * params.eta;
    let phi = disc.phase.interpolate(|x, y| (((x * x + y * y).sqrt() - DROP_RADIUS) / w).tanh());
    State::new(
        disc,
        params,
        vec![0.0; disc.velocity.dof_count],
        vec![0.0; disc.pressure.dof_count],
        phi,
        0.0,
    )
}

/// Interpolated manufactured fields at `t = 0`.
pub fn mms_initial_state(disc: &Discretization, params: &MixtureParams<f64>) -> Result<State> {
    let m = ManufacturedSolution::new(*params);
    let u = disc.velocity.interpolate_vector(|x, y| m.u(0.0, x, y));
    let p = disc.pressure.interpolate(|x, y| m.p(0.0, x, y));
    let phi = disc.phase.interpolate(|x, y| m.phi(0.0, x, y));
    State::new(disc, params, u, p, phi, 0.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::discretization::Rect;

    #[test]
    fn drop_profile() {
        let d = Discretization::new(Rect::unit_square(), 8).unwrap();
        let p = MixtureParams::benchmark();
        let s = quiescent_drop(&d, &p).unwrap();
        assert!(s.max_abs_phi() < 1.0);
        let centre = d.phase.dof_coordinates.iter().position(|c| c[0] == 0.0 && c[1] == 0.0).unwrap();
        assert!(s.phi[centre] < -0.998);
        assert!(s.u.iter().all(|v| *v == 0.0));
        assert_eq!(s.rho_prev.len(), s.phi.len());
    }

    #[test]
    fn admissible_step() {
        let p = MixtureParams::benchmark();
        let dt = admissible_dt(&p);
        assert!(dt < p.eta * p.eta / (13.0 * p.gamma));
        assert!((dt - 0.9 / 1300.0).abs() < 1e-15);
    }

    #[test]
    fn manufactured_start() {
        let d = Discretization::new(Rect::unit_square(), 4).unwrap();
        let s = mms_initial_state(&d, &MixtureParams::benchmark()).unwrap();
        assert!(s.phi.iter().all(|v| (v + 1.0).abs() < 1e-14));
        assert!(s.u.iter().all(|v| v.abs() < 1e-14));
        assert_eq!("mms".parse::<Scenario>().unwrap(), Scenario::Manufactured);
    }
}
