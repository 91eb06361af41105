//! Manufactured solution on `[-1, 1]^2`:
//!
//! ```text
//! phi(t,x,y) = t (x + 2)^2 / (2 T) - 1
//! u1(t,x,y)  =  pi sin(2 pi y) sin^2(pi x) sin(t)
//! u2(t,x,y)  = -pi sin(2 pi x) sin^2(pi y) sin(t)
//! p(t,x,y)   = cos(pi x) sin(pi y) sin(t)
//! ```
//!
//! with `T = 10 eta^2 / (13 gamma)`. The velocity is the curl of
//! `sin^2(pi x) sin^2(pi y) sin(t)`, so it is divergence free and vanishes on
//! the boundary. Forcing terms are hand-coded residuals of the strong form;
//! [`oracle`] recomputes them by finite differences.

use crate::discretization::Discretization;
use crate::error::Result;
use crate::fields::{potential_derivative, MixtureParams, State};
use crate::norms::{h1_error, l2_error, velocity_l2_error};
use crate::scalar::Scalar;

/// Analytic fields at one point.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MmsValues<T> {
    pub u: [T; 2],
    pub p: T,
    pub phi: T,
}

#[derive(Clone, Copy, Debug)]
pub struct ManufacturedSolution<T> {
    pub params: MixtureParams<T>,
    /// Reference time `T = 10 eta^2 / (13 gamma)`.
    pub t_ref: T,
}

impl<T: Scalar> ManufacturedSolution<T> {
    pub fn new(params: MixtureParams<T>) -> Self {
        let t_ref = T::lit(10.0) * params.eta * params.eta / (T::lit(13.0) * params.gamma);
        Self { params, t_ref }
    }

    pub fn eval(&self, t: T, x: T, y: T) -> MmsValues<T> {
        MmsValues {
            u: self.u(t, x, y),
            p: self.p(t, x, y),
            phi: self.phi(t, x, y),
        }
    }

    pub fn phi(&self, t: T, x: T, _y: T) -> T {
        let s = x + T::lit(2.0);
        t * s * s / (T::lit(2.0) * self.t_ref) - T::one()
    }

    pub fn phi_t(&self, _t: T, x: T, _y: T) -> T {
        let s = x + T::lit(2.0);
        s * s / (T::lit(2.0) * self.t_ref)
    }

    pub fn phi_grad(&self, t: T, x: T, _y: T) -> [T; 2] {
        [t * (x + T::lit(2.0)) / self.t_ref, T::zero()]
    }

    pub fn phi_laplacian(&self, t: T, _x: T, _y: T) -> T {
        t / self.t_ref
    }

    pub fn u(&self, t: T, x: T, y: T) -> [T; 2] {
        let pi = T::PI();
        let two_pi = pi + pi;
        let st = t.sin();
        let (sx, sy) = ((pi * x).sin(), (pi * y).sin());
        [
            pi * (two_pi * y).sin() * sx * sx * st,
            -pi * (two_pi * x).sin() * sy * sy * st,
        ]
    }

    pub fn u_t(&self, t: T, x: T, y: T) -> [T; 2] {
        let ratio = t.cos();
        let base = self.u(T::PI() / T::lit(2.0), x, y);
        [base[0] * ratio, base[1] * ratio]
    }

    /// `grad[c][d] = d u_c / d x_d`.
    pub fn u_grad(&self, t: T, x: T, y: T) -> [[T; 2]; 2] {
        let pi = T::PI();
        let two_pi = pi + pi;
        let pi2 = pi * pi;
        let st = t.sin();
        let (sx, sy) = ((pi * x).sin(), (pi * y).sin());
        let (s2x, s2y) = ((two_pi * x).sin(), (two_pi * y).sin());
        let (c2x, c2y) = ((two_pi * x).cos(), (two_pi * y).cos());
        [
            [pi2 * s2y * s2x * st, T::lit(2.0) * pi2 * c2y * sx * sx * st],
            [-T::lit(2.0) * pi2 * c2x * sy * sy * st, -pi2 * s2x * s2y * st],
        ]
    }

    /// Second derivatives `[d_xx, d_xy, d_yy]` of each component.
    pub fn u_hessian(&self, t: T, x: T, y: T) -> [[T; 3]; 2] {
        let pi = T::PI();
        let two_pi = pi + pi;
        let pi3 = pi * pi * pi;
        let two = T::lit(2.0);
        let four = T::lit(4.0);
        let st = t.sin();
        let (sx, sy) = ((pi * x).sin(), (pi * y).sin());
        let (s2x, s2y) = ((two_pi * x).sin(), (two_pi * y).sin());
        let (c2x, c2y) = ((two_pi * x).cos(), (two_pi * y).cos());
        [
            [
                two * pi3 * s2y * c2x * st,
                two * pi3 * c2y * s2x * st,
                -four * pi3 * s2y * sx * sx * st,
            ],
            [
                four * pi3 * s2x * sy * sy * st,
                -two * pi3 * c2x * s2y * st,
                -two * pi3 * s2x * c2y * st,
            ],
        ]
    }

    pub fn p(&self, t: T, x: T, y: T) -> T {
        let pi = T::PI();
        (pi * x).cos() * (pi * y).sin() * t.sin()
    }

    pub fn p_grad(&self, t: T, x: T, y: T) -> [T; 2] {
        let pi = T::PI();
        let st = t.sin();
        [
            -pi * (pi * x).sin() * (pi * y).sin() * st,
            pi * (pi * x).cos() * (pi * y).cos() * st,
        ]
    }

    /// Outward normal derivative of `phi` on the boundary point `(x, y)`
    /// with normal `n`.
    pub fn phi_normal_derivative(&self, t: T, x: T, y: T, n: [T; 2]) -> T {
        let g = self.phi_grad(t, x, y);
        g[0] * n[0] + g[1] * n[1]
    }

    /// Residual of `phi_t + u.grad(phi) - gamma (lap(phi) - f(phi))`.
    pub fn forcing_ac(&self, t: T, x: T, y: T) -> T {
        let u = self.u(t, x, y);
        let g = self.phi_grad(t, x, y);
        let prm = &self.params;
        self.phi_t(t, x, y) + u[0] * g[0] + u[1] * g[1]
            - prm.gamma
                * (self.phi_laplacian(t, x, y) - potential_derivative(self.phi(t, x, y), prm.eta))
    }

    /// Momentum terms shared by both forcing variants: convection, Temam
    /// term, viscous stress, pressure and the advective capillary part.
    fn momentum_space_terms(&self, t: T, x: T, y: T) -> [T; 2] {
        let prm = &self.params;
        let half = T::lit(0.5);
        let phi = self.phi(t, x, y);
        let gphi = self.phi_grad(t, x, y);
        let rho = prm.mixture_density(phi);
        let mu = prm.mixture_viscosity(phi);
        let grho = [prm.delta_rho() * half * gphi[0], prm.delta_rho() * half * gphi[1]];
        let gmu = [prm.delta_mu() * half * gphi[0], prm.delta_mu() * half * gphi[1]];
        let u = self.u(t, x, y);
        let gu = self.u_grad(t, x, y);
        let h = self.u_hessian(t, x, y);
        let div_u = gu[0][0] + gu[1][1];
        let div_rho_u = grho[0] * u[0] + grho[1] * u[1] + rho * div_u;
        // strain D_cd = (d_d u_c + d_c u_d) / 2
        let strain = |c: usize, d: usize| half * (gu[c][d] + gu[d][c]);
        // d_d D_cd summed over d: (lap u_c + d_c div u) / 2
        let lap = [h[0][0] + h[0][2], h[1][0] + h[1][2]];
        let grad_div = [h[0][0] + h[1][1], h[0][1] + h[1][2]];
        let gp = self.p_grad(t, x, y);
        let u_dot_gphi = u[0] * gphi[0] + u[1] * gphi[1];
        let cap = prm.sigma / prm.gamma * u_dot_gphi;
        let mut out = [T::zero(); 2];
        for c in 0..2 {
            let convection = rho * (u[0] * gu[c][0] + u[1] * gu[c][1]);
            let temam = half * div_rho_u * u[c];
            let viscous = -(gmu[0] * strain(c, 0) + gmu[1] * strain(c, 1))
                - mu * half * (lap[c] + grad_div[c]);
            out[c] = convection + temam + viscous + gp[c] + cap * gphi[c];
        }
        out
    }

    /// Residual of the continuous momentum equation
    /// `sqrt(rho) d_t(sqrt(rho) u) + rho (u.grad)u + div(rho u) u / 2
    ///  - div(mu D(u)) + grad p + sigma/gamma (phi_t + u.grad phi) grad phi`
    /// with no body force.
    pub fn forcing_ns(&self, t: T, x: T, y: T) -> [T; 2] {
        let prm = &self.params;
        let phi = self.phi(t, x, y);
        let rho = prm.mixture_density(phi);
        let rho_t = prm.delta_rho() * T::lit(0.5) * self.phi_t(t, x, y);
        let u = self.u(t, x, y);
        let ut = self.u_t(t, x, y);
        let gphi = self.phi_grad(t, x, y);
        let lag = prm.sigma / prm.gamma * self.phi_t(t, x, y);
        let space = self.momentum_space_terms(t, x, y);
        let mut out = [T::zero(); 2];
        for c in 0..2 {
            out[c] = rho * ut[c] + T::lit(0.5) * rho_t * u[c] + lag * gphi[c] + space[c];
        }
        out
    }

    /// Residual of the backward-Euler momentum equation between `t_prev` and
    /// `t`: the time derivative becomes
    /// `(rho(t) u(t) - sqrt(rho(t) rho(t_prev)) u(t_prev)) / dt` and the
    /// phase lag `(phi(t) - phi(t_prev)) / dt`. The exact fields then solve
    /// the semi-discrete system, leaving only the spatial error.
    pub fn forcing_ns_discrete(&self, t_prev: T, t: T, x: T, y: T) -> [T; 2] {
        let prm = &self.params;
        let dt = t - t_prev;
        let rho = prm.mixture_density(self.phi(t, x, y));
        let rho_prev = prm.mixture_density(self.phi(t_prev, x, y));
        let geo = (rho * rho_prev).sqrt();
        let (u, u_prev) = (self.u(t, x, y), self.u(t_prev, x, y));
        let gphi = self.phi_grad(t, x, y);
        let lag = prm.sigma / prm.gamma * (self.phi(t, x, y) - self.phi(t_prev, x, y)) / dt;
        let space = self.momentum_space_terms(t, x, y);
        let mut out = [T::zero(); 2];
        for c in 0..2 {
            out[c] = (rho * u[c] - geo * u_prev[c]) / dt + lag * gphi[c] + space[c];
        }
        out
    }
}

/// Finite-difference recomputation of the forcing terms, independent of the
/// hand-coded derivatives above.
/// `[||u - u_ex||, ||phi - phi_ex||, ||phi - phi_ex||_H1]` at `state.t`.
pub fn state_errors(disc: &Discretization, state: &State, m: &ManufacturedSolution<f64>) -> Result<[f64; 3]> {
    let t = state.t;
    Ok([
        velocity_l2_error(disc, &state.u, |x, y| m.u(t, x, y))?,
        l2_error(disc, &disc.phase, &state.phi, |x, y| m.phi(t, x, y))?,
        h1_error(disc, &disc.phase, &state.phi, |x, y| m.phi(t, x, y), |x, y| m.phi_grad(t, x, y))?,
    ])
}

pub mod oracle {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    /// Default step for the central differences.
    pub const FD_STEP: f64 = 1e-5;

    fn d1(f: impl Fn(f64) -> f64, z: f64, h: f64) -> f64 {
        (f(z + h) - f(z - h)) / (2.0 * h)
    }

    fn d2(f: impl Fn(f64) -> f64, z: f64, h: f64) -> f64 {
        (f(z + h) - 2.0 * f(z) + f(z - h)) / (h * h)
    }

    fn dxy(f: impl Fn(f64, f64) -> f64, x: f64, y: f64, h: f64) -> f64 {
        (f(x + h, y + h) - f(x + h, y - h) - f(x - h, y + h) + f(x - h, y - h)) / (4.0 * h * h)
    }

    /// Phase-field residual from differences of `phi` and values of `u`.
    pub fn ac_residual(m: &ManufacturedSolution<f64>, t: f64, x: f64, y: f64, h: f64) -> f64 {
        let phi = |t: f64, x: f64, y: f64| m.phi(t, x, y);
        let phi_t = d1(|s| phi(s, x, y), t, h);
        let gx = d1(|s| phi(t, s, y), x, h);
        let gy = d1(|s| phi(t, x, s), y, h);
        let lap = d2(|s| phi(t, s, y), x, h) + d2(|s| phi(t, x, s), y, h);
        let u = m.u(t, x, y);
        let p = &m.params;
        let v = phi(t, x, y);
        phi_t + u[0] * gx + u[1] * gy - p.gamma * (lap - v * (v * v - 1.0) / (p.eta * p.eta))
    }

    /// Momentum residual in conservative form, every derivative by
    /// differences: `sqrt(rho) d_t(sqrt(rho) u) + rho (u.grad)u
    /// + div(rho u) u / 2 - div(mu D(u)) + grad p + sigma/gamma (phi_t + u.grad phi) grad phi`.
    pub fn ns_residual(m: &ManufacturedSolution<f64>, t: f64, x: f64, y: f64, h: f64) -> [f64; 2] {
        let p = &m.params;
        let rho = |t: f64, x: f64, y: f64| p.mixture_density(m.phi(t, x, y));
        let mu = |t: f64, x: f64, y: f64| p.mixture_viscosity(m.phi(t, x, y));
        let uc = |c: usize, t: f64, x: f64, y: f64| m.u(t, x, y)[c];
        let u = m.u(t, x, y);
        let r = rho(t, x, y);
        // D_cd(x, y) by central differences
        let strain = |c: usize, d: usize, x: f64, y: f64| {
            let dd = |k: usize, comp: usize| {
                if k == 0 {
                    d1(|s| uc(comp, t, s, y), x, h)
                } else {
                    d1(|s| uc(comp, t, x, s), y, h)
                }
            };
            0.5 * (dd(d, c) + dd(c, d))
        };
        let div_rho_u = d1(|s| rho(t, s, y) * uc(0, t, s, y), x, h)
            + d1(|s| rho(t, x, s) * uc(1, t, x, s), y, h);
        let phi_t = d1(|s| m.phi(s, x, y), t, h);
        let gphi = [d1(|s| m.phi(t, s, y), x, h), d1(|s| m.phi(t, x, s), y, h)];
        let cap = p.sigma / p.gamma * (phi_t + u[0] * gphi[0] + u[1] * gphi[1]);
        let gp = [
            d1(|s| m.p(t, s, y), x, h),
            d1(|s| m.p(t, x, s), y, h),
        ];
        let mut out = [0.0; 2];
        for c in 0..2 {
            let sqrt_rho_u = |s: f64| rho(s, x, y).sqrt() * uc(c, s, x, y);
            let time = r.sqrt() * d1(sqrt_rho_u, t, h);
            let conv = r
                * (u[0] * d1(|s| uc(c, t, s, y), x, h) + u[1] * d1(|s| uc(c, t, x, s), y, h));
            // div(mu D(u))_c with the flux mu D_cd differentiated by a wider
            // stencil (nested central differences)
            let flux = |d: usize, x: f64, y: f64| mu(t, x, y) * strain(c, d, x, y);
            let div_flux = d1(|s| flux(0, s, y), x, h) + d1(|s| flux(1, x, s), y, h);
            out[c] = time + conv + 0.5 * div_rho_u * u[c] - div_flux + gp[c] + cap * gphi[c];
        }
        out
    }

    /// Laplacian by differences, used to cross-check the Hessian closure.
    pub fn u_laplacian(m: &ManufacturedSolution<f64>, t: f64, x: f64, y: f64, h: f64) -> [f64; 2] {
        let mut out = [0.0; 2];
        for (c, o) in out.iter_mut().enumerate() {
            *o = d2(|s| m.u(t, s, y)[c], x, h) + d2(|s| m.u(t, x, s)[c], y, h);
        }
        let _ = dxy(|a, b| m.p(t, a, b), x, y, h);
        out
    }

    /// Worst relative discrepancies over a sample.
    #[derive(Clone, Copy, Debug)]
    pub struct ForcingCheck {
        pub n_points: usize,
        pub max_rel_ac: f64,
        pub max_rel_ns: f64,
    }

    impl ForcingCheck {
        pub fn passes(&self, tol_ac: f64, tol_ns: f64) -> bool {
            self.max_rel_ac <= tol_ac && self.max_rel_ns <= tol_ns
        }
    }

    /// Compare hand-coded forcing with the difference oracle at `n` random
    /// points `(t, x, y)` in `[0, T] x [-1, 1]^2`. Errors are relative to
    /// `max(|F|, 1)`.
    pub fn check_forcing(m: &ManufacturedSolution<f64>, n: usize, seed: u64) -> ForcingCheck {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut max_rel_ac: f64 = 0.0;
        let mut max_rel_ns: f64 = 0.0;
        for _ in 0..n {
            let t = rng.random_range(0.0..=m.t_ref);
            let x = rng.random_range(-1.0..=1.0);
            let y = rng.random_range(-1.0..=1.0);
            let fa = m.forcing_ac(t, x, y);
            let oa = ac_residual(m, t, x, y, FD_STEP);
            max_rel_ac = max_rel_ac.max((fa - oa).abs() / fa.abs().max(1.0));
            let fnv = m.forcing_ns(t, x, y);
            let on = ns_residual(m, t, x, y, FD_STEP);
            let diff = ((fnv[0] - on[0]).powi(2) + (fnv[1] - on[1]).powi(2)).sqrt();
            let scale = (fnv[0].powi(2) + fnv[1].powi(2)).sqrt().max(1.0);
            max_rel_ns = max_rel_ns.max(diff / scale);
        }
        ForcingCheck {
            n_points: n,
            max_rel_ac,
            max_rel_ns,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::PI;

    fn mms() -> ManufacturedSolution<f64> {
        ManufacturedSolution::new(MixtureParams::benchmark())
    }

    #[test]
    fn reference_time() {
        assert!((mms().t_ref - 1.0 / 130.0).abs() < 1e-16);
    }

    #[test]
    fn initial_values() {
        let m = mms();
        for (x, y) in [(0.0, 0.0), (0.3, -0.7), (-1.0, 1.0)] {
            let v = m.eval(0.0, x, y);
            assert_eq!(v.u, [0.0, 0.0]);
            assert_eq!(v.p, 0.0);
            assert_eq!(v.phi, -1.0);
        }
        assert!((m.phi(m.t_ref, 0.0, 0.4) - 1.0).abs() < 1e-15);
        let u = m.u(PI / 2.0, 0.5, 0.25);
        assert!((u[0] - PI).abs() < 1e-14);
    }

    #[test]
    fn boundary_trace_vanishes() {
        let m = mms();
        let u = m.u(PI / 2.0, 1.0, 0.0);
        assert!(u[0].abs() < 1e-12 && u[1].abs() < 1e-12);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..1000 {
            let t = rng.random_range(0.0..2.0);
            let s = rng.random_range(-1.0..=1.0);
            for (x, y) in [(-1.0, s), (1.0, s), (s, -1.0), (s, 1.0)] {
                let u = m.u(t, x, y);
                assert!(u[0].abs() <= 1e-12 && u[1].abs() <= 1e-12);
            }
        }
    }

    #[test]
    fn velocity_is_divergence_free() {
        let m = mms();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..1000 {
            let (t, x, y) = (
                rng.random_range(0.0..2.0),
                rng.random_range(-1.0..=1.0),
                rng.random_range(-1.0..=1.0),
            );
            let g = m.u_grad(t, x, y);
            assert!((g[0][0] + g[1][1]).abs() <= 1e-12);
        }
    }

    #[test]
    fn ac_forcing_at_initial_time() {
        let m = mms();
        for x in [-1.0, -0.25, 0.6, 1.0] {
            let expected = (x + 2.0) * (x + 2.0) / (2.0 * m.t_ref);
            assert!((m.forcing_ac(0.0, x, 0.3) - expected).abs() < 1e-12);
        }
    }

    #[test]
    fn ns_forcing_at_initial_time() {
        // u = 0, grad p = 0, grad phi = 0 at t = 0; only rho u_t survives
        let m = mms();
        let (x, y) = (0.35, -0.2);
        let f = m.forcing_ns(0.0, x, y);
        let rho = m.params.mixture_density(-1.0);
        let ut = m.u_t(0.0, x, y);
        assert!((f[0] - rho * ut[0]).abs() < 1e-12);
        assert!((f[1] - rho * ut[1]).abs() < 1e-12);
        assert_eq!(m.phi_grad(0.0, x, y), [0.0, 0.0]);
        assert_eq!(m.p_grad(0.0, x, y), [-0.0, 0.0]);
    }

    #[test]
    fn forcing_matches_finite_difference_oracle() {
        let m = mms();
        let check = oracle::check_forcing(&m, 100, 2024);
        assert!(check.max_rel_ac <= 1e-6, "{check:?}");
        assert!(check.max_rel_ns <= 1e-5, "{check:?}");
    }

    #[test]
    fn forcing_oracle_with_unequal_viscosity() {
        let p = MixtureParams {
            mu_a: 2.0,
            mu_b: 0.5,
            ..MixtureParams::benchmark()
        };
        let check = oracle::check_forcing(&ManufacturedSolution::new(p), 100, 5);
        assert!(check.passes(1e-6, 1e-5), "{check:?}");
    }

    #[test]
    fn viscous_term_is_half_laplacian_via_stream_function() {
        // u = curl(S(x) S(y) sin t) with S(z) = sin^2(pi z)
        let m = mms();
        let s1 = |z: f64| PI * (2.0 * PI * z).sin();
        let s2 = |z: f64| 2.0 * PI * PI * (2.0 * PI * z).cos();
        let s3 = |z: f64| -4.0 * PI.powi(3) * (2.0 * PI * z).sin();
        let s0 = |z: f64| (PI * z).sin().powi(2);
        let mut rng = ChaCha8Rng::seed_from_u64(19);
        for _ in 0..50 {
            let (t, x, y): (f64, f64, f64) = (
                rng.random_range(0.0..1.0),
                rng.random_range(-1.0..1.0),
                rng.random_range(-1.0..1.0),
            );
            let st = t.sin();
            let lap = [
                (s2(x) * s1(y) + s0(x) * s3(y)) * st,
                -(s3(x) * s0(y) + s1(x) * s2(y)) * st,
            ];
            let h = m.u_hessian(t, x, y);
            for c in 0..2 {
                let coded = h[c][0] + h[c][2];
                assert!((coded - lap[c]).abs() < 1e-10 * (1.0 + lap[c].abs()));
            }
            let fd = oracle::u_laplacian(&m, t, x, y, 1e-4);
            for c in 0..2 {
                assert!((fd[c] - lap[c]).abs() < 1e-4 * (1.0 + lap[c].abs()));
            }
        }
    }

    #[test]
    fn discrete_forcing_tends_to_continuous() {
        let m = mms();
        let (t, x, y) = (0.005, 0.3, -0.4);
        let f = m.forcing_ns(t, x, y);
        let mut prev = f64::INFINITY;
        for k in 1..5 {
            let dt = 10f64.powi(-(k + 2));
            let g = m.forcing_ns_discrete(t - dt, t, x, y);
            let diff = ((f[0] - g[0]).powi(2) + (f[1] - g[1]).powi(2)).sqrt();
            assert!(diff < prev);
            prev = diff;
        }
        assert!(prev < 1e-2);
    }

    #[test]
    fn single_precision_evaluation() {
        let m32 = ManufacturedSolution::new(MixtureParams::<f32>::benchmark());
        let m64 = mms();
        let (t, x, y) = (0.004, 0.1, 0.7);
        let a = m32.forcing_ac(t as f32, x as f32, y as f32) as f64;
        let b = m64.forcing_ac(t, x, y);
        assert!((a - b).abs() < 1e-4 * b.abs());
    }
}
