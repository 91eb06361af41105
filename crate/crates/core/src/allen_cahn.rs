//! One linearized phase-field solve of the fixed-point loop.
//!
//! Weak form, for every quadratic test function `psi`:
//!
//! ```text
//! int R phi psi + dt int (u_k . grad phi) psi + gamma dt int grad phi . grad psi
//!     = int S psi + dt int F psi + gamma dt int_{boundary} g psi
//! ```
//!
//! where `(R, S)` come from [`ac_linearization`], `F` is an optional source
//! and `g` an optional normal-derivative datum (zero flux by default).

use crate::discretization::{
    assemble_bilinear, assemble_boundary_linear, assemble_linear, quadrature_points, sample_scalar,
    sample_vector, solve_direct, CsrMatrix, Discretization, QpField, QpVectorField, SparseSystem,
};
use crate::error::{Error, Result};
use crate::fields::{ac_linearization, Linearization, MixtureParams};

/// Gauss points per boundary edge for the normal-derivative datum.
const BOUNDARY_POINTS: usize = 3;

/// Source term `F(x)`.
pub type ScalarSource<'a> = &'a (dyn Fn([f64; 2]) -> f64 + Sync);
/// Normal derivative datum `g(x, n)`.
pub type FluxDatum<'a> = &'a (dyn Fn([f64; 2], [f64; 2]) -> f64 + Sync);

/// Inputs of one phase-field iteration.
#[derive(Clone, Copy)]
pub struct AcStepInput<'a> {
    pub phi_n: &'a [f64],
    pub phi_k: &'a [f64],
    pub u_k: &'a [f64],
    pub method: Linearization,
    pub params: &'a MixtureParams<f64>,
    pub forcing: Option<ScalarSource<'a>>,
    pub boundary_flux: Option<FluxDatum<'a>>,
}

impl<'a> AcStepInput<'a> {
    /// Unforced input with zero-flux boundary.
    pub fn new(
        phi_n: &'a [f64],
        phi_k: &'a [f64],
        u_k: &'a [f64],
        method: Linearization,
        params: &'a MixtureParams<f64>,
    ) -> Self {
        Self {
            phi_n,
            phi_k,
            u_k,
            method,
            params,
            forcing: None,
            boundary_flux: None,
        }
    }
}

struct Sampled {
    phi_n: QpField,
    phi_k: QpField,
    u: QpVectorField,
}

fn sample(disc: &Discretization, input: &AcStepInput<'_>) -> Result<Sampled> {
    Ok(Sampled {
        phi_n: sample_scalar(&disc.mesh, &disc.phase, input.phi_n, &disc.rule)?,
        phi_k: sample_scalar(&disc.mesh, &disc.phase, input.phi_k, &disc.rule)?,
        u: sample_vector(&disc.mesh, &disc.velocity, input.u_k, &disc.rule)?,
    })
}

/// Advection block `A[i][j] = int (u . grad psi_j) psi_i`.
pub fn advection_matrix(disc: &Discretization, u: &[f64]) -> Result<CsrMatrix> {
    let su = sample_vector(&disc.mesh, &disc.velocity, u, &disc.rule)?;
    assemble_bilinear(&disc.mesh, &disc.phase, &disc.phase, &disc.rule, |p, m| {
        let v = su.values[p.global_index];
        for j in 0..p.trial.n_local() {
            let g = p.trial.grads[j];
            let adv = p.weight * (v[0] * g[0] + v[1] * g[1]);
            for i in 0..p.test.n_local() {
                m.add(i, j, adv * p.test.values[i]);
            }
        }
    })
}

/// Assemble the linearized system. Rows follow the phase dof map; there are
/// no constrained rows.
pub fn assemble_ac(disc: &Discretization, input: &AcStepInput<'_>) -> Result<SparseSystem> {
    input.params.validate()?;
    let s = sample(disc, input)?;
    let prm = *input.params;
    let dt = prm.dt;
    let diffusion = prm.gamma * dt;
    let coeff = |k: usize| {
        ac_linearization(input.method, s.phi_k.values[k], s.phi_n.values[k], &prm)
    };

    let matrix = assemble_bilinear(&disc.mesh, &disc.phase, &disc.phase, &disc.rule, |p, m| {
        let k = p.global_index;
        let r = coeff(k).reaction;
        let v = s.u.values[k];
        for j in 0..p.trial.n_local() {
            let nj = p.trial.values[j];
            let gj = p.trial.grads[j];
            let adv = dt * (v[0] * gj[0] + v[1] * gj[1]);
            for i in 0..p.test.n_local() {
                let gi = p.test.grads[i];
                let val = (r * nj + adv) * p.test.values[i] + diffusion * (gi[0] * gj[0] + gi[1] * gj[1]);
                m.add(i, j, p.weight * val);
            }
        }
    })?;

    let mut rhs = assemble_linear(&disc.mesh, &disc.phase, &disc.rule, |p, b| {
        let mut src = coeff(p.global_index).rhs;
        if let Some(f) = input.forcing {
            src += dt * f(p.x);
        }
        for (bi, v) in b.iter_mut().zip(p.test.values) {
            *bi += p.weight * src * v;
        }
    })?;

    if let Some(g) = input.boundary_flux {
        let flux =
            assemble_boundary_linear(&disc.mesh, &disc.phase, BOUNDARY_POINTS, |b| g(b.x, b.normal))?;
        for (r, f) in rhs.iter_mut().zip(flux) {
            *r += diffusion * f;
        }
    }
    SparseSystem::new(matrix, rhs)
}

/// Assemble and solve; returns `phi_{k+1}`.
pub fn solve_ac_step(disc: &Discretization, input: &AcStepInput<'_>) -> Result<Vec<f64>> {
    let mut system = assemble_ac(disc, input)?;
    let phi = solve_direct(&mut system)?;
    if let Some(i) = phi.iter().position(|v| !v.is_finite()) {
        return Err(Error::Factorization { pivot: i });
    }
    Ok(phi)
}

/// Quadrature points of the phase solve, for callers that tabulate sources.
pub fn source_points(disc: &Discretization) -> Vec<[f64; 2]> {
    quadrature_points(&disc.mesh, &disc.rule).0
}
