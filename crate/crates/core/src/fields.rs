//! Physical parameters, mixture laws and the double-well potential.

use std::fmt;
use std::str::FromStr;

use crate::discretization::Discretization;
use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Physical and scheme constants.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MixtureParams<T> {
    pub rho_a: T,
    pub rho_b: T,
    pub mu_a: T,
    pub mu_b: T,
    /// Mobility.
    pub gamma: T,
    /// Interface thickness.
    pub eta: T,
    /// Mixing-energy density.
    pub sigma: T,
    /// Fixed-point stabilization weight.
    pub beta: T,
    pub dt: T,
    /// Pressure penalization of the saddle-point system.
    pub eps_pressure: T,
}

impl<T: Scalar> MixtureParams<T> {
    /// Parameters of the manufactured-solution benchmark on `[-1, 1]^2`
    /// (`beta = 0`, `dt = 1/1300`).
    pub fn benchmark() -> Self {
        Self {
            rho_a: T::lit(3.0),
            rho_b: T::one(),
            mu_a: T::one(),
            mu_b: T::one(),
            gamma: T::one(),
            eta: T::lit(0.1),
            sigma: T::one(),
            beta: T::zero(),
            dt: T::one() / T::lit(1300.0),
            eps_pressure: T::lit(1e-8),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("rho_a", self.rho_a),
            ("rho_b", self.rho_b),
            ("mu_a", self.mu_a),
            ("mu_b", self.mu_b),
            ("gamma", self.gamma),
            ("eta", self.eta),
            ("sigma", self.sigma),
            ("dt", self.dt),
            ("eps_pressure", self.eps_pressure),
        ];
        for (name, v) in positive {
            if !(v > T::zero()) || !v.is_finite() {
                return Err(Error::InvalidArgument(format!("{name} must be positive, got {v}")));
            }
        }
        if !(self.beta >= T::zero()) || !self.beta.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "beta must be non-negative, got {}",
                self.beta
            )));
        }
        Ok(())
    }

    pub fn rho_bar(&self) -> T {
        (self.rho_a + self.rho_b) / T::lit(2.0)
    }

    pub fn delta_rho(&self) -> T {
        self.rho_a - self.rho_b
    }

    /// Smaller of the two densities.
    pub fn rho_min(&self) -> T {
        self.rho_a.min(self.rho_b)
    }

    pub fn rho_max(&self) -> T {
        self.rho_a.max(self.rho_b)
    }

    pub fn mu_bar(&self) -> T {
        (self.mu_a + self.mu_b) / T::lit(2.0)
    }

    pub fn delta_mu(&self) -> T {
        self.mu_a - self.mu_b
    }

    pub fn mu_min(&self) -> T {
        self.mu_a.min(self.mu_b)
    }

    pub fn mu_max(&self) -> T {
        self.mu_a.max(self.mu_b)
    }

    /// `gamma * dt / eta^2`, the weight of the reaction terms.
    pub fn alpha(&self) -> T {
        self.gamma * self.dt / (self.eta * self.eta)
    }

    /// `rho(phi) = rho_bar + delta_rho / 2 * phi`, no clamping.
    pub fn mixture_density(&self, phi: T) -> T {
        self.rho_bar() + self.delta_rho() / T::lit(2.0) * phi
    }

    /// `mu(phi) = mu_bar + delta_mu / 2 * phi`, no clamping.
    pub fn mixture_viscosity(&self, phi: T) -> T {
        self.mu_bar() + self.delta_mu() / T::lit(2.0) * phi
    }

    pub fn with_beta(mut self, beta: T) -> Self {
        self.beta = beta;
        self
    }

    pub fn with_dt(mut self, dt: T) -> Self {
        self.dt = dt;
        self
    }
}

/// Derivative of the double-well potential `(phi^2 - 1)^2 / (4 eta^2)`.
pub fn potential_derivative<T: Scalar>(phi: T, eta: T) -> T {
    phi * (phi * phi - T::one()) / (eta * eta)
}

/// Treatment of the cubic term in the phase-field solve.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Linearization {
    /// First-order expansion around the previous iterate.
    Newton,
    /// `phi_{k+1} (phi_k^2 - 1)`.
    Picard,
    /// Cubic term taken at the previous time level, no stabilization.
    Explicit,
}

impl Linearization {
    /// Smallest `beta` for which the linearized update keeps `|phi| <= 1`.
    pub fn max_principle_beta<T: Scalar>(self) -> Option<T> {
        match self {
            Linearization::Newton => Some(T::lit(9.0 / 8.0)),
            Linearization::Picard => Some(T::lit(2.0)),
            Linearization::Explicit => None,
        }
    }
}

impl FromStr for Linearization {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "newton" => Ok(Self::Newton),
            "picard" => Ok(Self::Picard),
            "explicit" => Ok(Self::Explicit),
            other => Err(Error::InvalidArgument(format!("unknown linearization `{other}`"))),
        }
    }
}

impl fmt::Display for Linearization {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Linearization::Newton => "newton",
            Linearization::Picard => "picard",
            Linearization::Explicit => "explicit",
        })
    }
}

/// Pointwise coefficients of the linearized phase-field equation:
/// `reaction * phi_{k+1} + dt u.grad(phi_{k+1}) - gamma dt lap(phi_{k+1}) = rhs`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AcCoefficients<T> {
    pub reaction: T,
    pub rhs: T,
}

pub fn ac_linearization<T: Scalar>(
    method: Linearization,
    phi_k: T,
    phi_n: T,
    params: &MixtureParams<T>,
) -> AcCoefficients<T> {
    let one = T::one();
    let two = T::lit(2.0);
    let a = params.alpha();
    let beta = params.beta;
    match method {
        Linearization::Newton => AcCoefficients {
            reaction: one + a * (beta - one + T::lit(3.0) * phi_k * phi_k),
            rhs: phi_n + a * phi_k * (beta + two * phi_k * phi_k),
        },
        Linearization::Picard => AcCoefficients {
            reaction: one + a * (beta + phi_k * phi_k - one),
            rhs: phi_n + a * beta * phi_k,
        },
        Linearization::Explicit => AcCoefficients {
            reaction: one,
            rhs: phi_n + a * (one - phi_n * phi_n) * phi_n,
        },
    }
}

/// One time level of the discrete solution.
#[derive(Clone, Debug, PartialEq)]
pub struct State {
    /// Velocity, component-blocked quadratic coefficients.
    pub u: Vec<f64>,
    /// Pressure, linear coefficients.
    pub p: Vec<f64>,
    /// Phase field, quadratic coefficients.
    pub phi: Vec<f64>,
    /// Nodal density `rho(phi)` of this level, kept for the next step's
    /// `sqrt(rho_{n+1} rho_n)` term.
    pub rho_prev: Vec<f64>,
    pub t: f64,
}

impl State {
    /// Build a state and its density field from phase coefficients.
    pub fn new(
        disc: &Discretization,
        params: &MixtureParams<f64>,
        u: Vec<f64>,
        p: Vec<f64>,
        phi: Vec<f64>,
        t: f64,
    ) -> Result<Self> {
        for (ctx, expected, actual) in [
            ("state velocity", disc.velocity.dof_count, u.len()),
            ("state pressure", disc.pressure.dof_count, p.len()),
            ("state phase", disc.phase.dof_count, phi.len()),
        ] {
            if expected != actual {
                return Err(Error::DimensionMismatch {
                    context: ctx,
                    expected,
                    actual,
                });
            }
        }
        let rho_prev = phi.iter().map(|&v| params.mixture_density(v)).collect();
        Ok(Self {
            u,
            p,
            phi,
            rho_prev,
            t,
        })
    }

    /// Largest nodal `|phi|`.
    pub fn max_abs_phi(&self) -> f64 {
        max_abs(&self.phi)
    }
}

pub fn max_abs(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}
