//! One linearized momentum/pressure solve of the fixed-point loop.
//!
//! Unknowns are ordered `[u_x, u_y, p]`. The velocity block collects, for
//! the new density `rho` and viscosity `mu` of `phi_{k+1}`:
//!
//! ```text
//! rho/dt u.v + rho (u_k.grad)u.v + 1/2 div(rho u_k) u.v + mu D(u):D(v)
//!     + sigma/gamma (u.grad phi)(v.grad phi)
//! ```
//!
//! and the right-hand side
//!
//! ```text
//! G(phi).v + sqrt(rho rho_n) u_n.v/dt - sigma/(gamma dt) (phi - phi_n) grad phi.v + F.v
//! ```
//!
//! The pressure couples through `B[q][j] = -int q div(v_j)` and a
//! `-eps M_p` penalty block. Velocity Dirichlet rows are replaced by
//! identity rows.

use crate::discretization::{
    apply_dirichlet, assemble_bilinear, sample_scalar, sample_vector, solve_direct, CsrMatrix,
    Discretization, LocalMatrix, QpField, QpVectorField, QuadPoint, SparseSystem,
};
use crate::error::{Error, Result};
use crate::fields::MixtureParams;
use crate::norms::mean_value;

/// Momentum source `F(x)`.
pub type VectorSource<'a> = &'a (dyn Fn([f64; 2]) -> [f64; 2] + Sync);
/// Velocity boundary trace.
pub type VelocityTrace<'a> = &'a (dyn Fn([f64; 2]) -> [f64; 2] + Sync);

/// Inputs of one momentum iteration.
#[derive(Clone, Copy)]
pub struct NsStepInput<'a> {
    pub u_n: &'a [f64],
    /// Nodal density of the previous time level (phase space).
    pub rho_n: &'a [f64],
    pub u_k: &'a [f64],
    pub phi_k1: &'a [f64],
    pub phi_n: &'a [f64],
    pub params: &'a MixtureParams<f64>,
    /// Body force `G(phi) = phi * gravity`.
    pub gravity: [f64; 2],
    pub forcing: Option<VectorSource<'a>>,
    /// Velocity on the boundary; zero when absent.
    pub dirichlet: Option<VelocityTrace<'a>>,
}

impl<'a> NsStepInput<'a> {
    pub fn new(
        u_n: &'a [f64],
        rho_n: &'a [f64],
        u_k: &'a [f64],
        phi_k1: &'a [f64],
        phi_n: &'a [f64],
        params: &'a MixtureParams<f64>,
    ) -> Self {
        Self {
            u_n,
            rho_n,
            u_k,
            phi_k1,
            phi_n,
            params,
            gravity: [0.0, 0.0],
            forcing: None,
            dirichlet: None,
        }
    }
}

/// Which velocity-block terms to assemble.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct MomentumTerms {
    pub mass: bool,
    /// Convection plus the `div(rho u_k)` correction.
    pub convection: bool,
    pub viscous: bool,
    pub capillary: bool,
}

impl MomentumTerms {
    pub const ALL: Self = Self {
        mass: true,
        convection: true,
        viscous: true,
        capillary: true,
    };
    pub const NONE: Self = Self {
        mass: false,
        convection: false,
        viscous: false,
        capillary: false,
    };
}

/// Assembled saddle-point system and bookkeeping.
#[derive(Clone, Debug)]
pub struct NsSystem {
    pub system: SparseSystem,
    pub n_velocity: usize,
    pub n_pressure: usize,
    /// The `B` block, kept for the divergence diagnostic.
    pub divergence: CsrMatrix,
    /// Quadrature points where `sqrt(rho rho_n)` needed clamping.
    pub clamped_points: usize,
}

/// Result of a momentum solve.
#[derive(Clone, Debug)]
pub struct NsSolution {
    pub u: Vec<f64>,
    /// Zero-mean pressure.
    pub p: Vec<f64>,
    /// `||B u||`.
    pub divergence_residual: f64,
    pub clamped_points: usize,
}

struct Sampled {
    phi: QpField,
    phi_n: QpField,
    rho_n: QpField,
    u_k: QpVectorField,
    u_n: QpVectorField,
}

fn sample(disc: &Discretization, input: &NsStepInput<'_>) -> Result<Sampled> {
    let (m, r) = (&disc.mesh, &disc.rule);
    Ok(Sampled {
        phi: sample_scalar(m, &disc.phase, input.phi_k1, r)?,
        phi_n: sample_scalar(m, &disc.phase, input.phi_n, r)?,
        rho_n: sample_scalar(m, &disc.phase, input.rho_n, r)?,
        u_k: sample_vector(m, &disc.velocity, input.u_k, r)?,
        u_n: sample_vector(m, &disc.velocity, input.u_n, r)?,
    })
}

fn check_viscosity(disc: &Discretization, phi: &QpField, prm: &MixtureParams<f64>) -> Result<()> {
    let nq = disc.rule.len();
    for (k, &v) in phi.values.iter().enumerate() {
        let mu = prm.mixture_viscosity(v);
        if !(mu > 0.0) {
            return Err(Error::NonPositiveViscosity {
                element: k / nq,
                point: k % nq,
                value: mu,
                phi: v,
            });
        }
    }
    Ok(())
}

fn momentum_kernel(
    p: &QuadPoint<'_>,
    m: &mut LocalMatrix,
    s: &Sampled,
    prm: &MixtureParams<f64>,
    terms: MomentumTerms,
) {
    let k = p.global_index;
    let phi = s.phi.values[k];
    let gphi = s.phi.grads[k];
    let rho = prm.mixture_density(phi);
    let mu = prm.mixture_viscosity(phi);
    let half_drho = 0.5 * prm.delta_rho();
    let grho = [half_drho * gphi[0], half_drho * gphi[1]];
    let uk = s.u_k.values[k];
    let div_rho_u = grho[0] * uk[0] + grho[1] * uk[1] + rho * s.u_k.divergence(k);
    let zeroth = if terms.mass { rho / prm.dt } else { 0.0 }
        + if terms.convection { 0.5 * div_rho_u } else { 0.0 };
    let cap = prm.sigma / prm.gamma;
    let w = p.weight;
    let ns = p.test.n_scalar();
    for j in 0..p.trial.n_local() {
        let (b, sj) = p.trial.split(j);
        let nj = p.trial.values[sj];
        let gj = p.trial.grads[sj];
        let adv = rho * (uk[0] * gj[0] + uk[1] * gj[1]);
        for si in 0..ns {
            let ni = p.test.values[si];
            let gi = p.test.grads[si];
            for a in 0..2 {
                let i = a * ns + si;
                let mut v = 0.0;
                if a == b {
                    v += zeroth * nj * ni;
                    if terms.convection {
                        v += adv * ni;
                    }
                    if terms.viscous {
                        v += 0.5 * mu * (gi[0] * gj[0] + gi[1] * gj[1]);
                    }
                }
                if terms.viscous {
                    v += 0.5 * mu * gj[a] * gi[b];
                }
                if terms.capillary {
                    v += cap * gphi[a] * gphi[b] * nj * ni;
                }
                if v != 0.0 {
                    m.add(i, j, w * v);
                }
            }
        }
    }
}

/// Velocity block with a selection of terms, no boundary conditions.
pub fn momentum_matrix(disc: &Discretization, input: &NsStepInput<'_>, terms: MomentumTerms) -> Result<CsrMatrix> {
    input.params.validate()?;
    let s = sample(disc, input)?;
    if terms.viscous {
        check_viscosity(disc, &s.phi, input.params)?;
    }
    let prm = *input.params;
    assemble_bilinear(&disc.mesh, &disc.velocity, &disc.velocity, &disc.rule, |p, m| {
        momentum_kernel(p, m, &s, &prm, terms)
    })
}

/// `B[q][j] = -int q div(v_j)`, pressure rows by velocity columns.
pub fn divergence_matrix(disc: &Discretization) -> Result<CsrMatrix> {
    assemble_bilinear(&disc.mesh, &disc.velocity, &disc.pressure, &disc.rule, |p, m| {
        for j in 0..p.trial.n_local() {
            let (b, sj) = p.trial.split(j);
            let d = p.trial.grads[sj][b];
            for i in 0..p.test.n_local() {
                m.add(i, j, -p.weight * p.test.values[i] * d);
            }
        }
    })
}

pub fn pressure_mass_matrix(disc: &Discretization) -> Result<CsrMatrix> {
    assemble_bilinear(&disc.mesh, &disc.pressure, &disc.pressure, &disc.rule, |p, m| {
        for j in 0..p.trial.n_local() {
            for i in 0..p.test.n_local() {
                m.add(i, j, p.weight * p.test.values[i] * p.trial.values[j]);
            }
        }
    })
}

/// Full saddle-point operator and right-hand side before boundary
/// conditions.
pub fn assemble_ns_operator(disc: &Discretization, input: &NsStepInput<'_>) -> Result<NsSystem> {
    let prm = *input.params;
    prm.validate()?;
    let s = sample(disc, input)?;
    check_viscosity(disc, &s.phi, &prm)?;
    let a = assemble_bilinear(&disc.mesh, &disc.velocity, &disc.velocity, &disc.rule, |p, m| {
        momentum_kernel(p, m, &s, &prm, MomentumTerms::ALL)
    })?;
    let b = divergence_matrix(disc)?;
    let mp = pressure_mass_matrix(disc)?.scaled(-prm.eps_pressure);
    let nu = disc.velocity.dof_count;
    let np = disc.pressure.dof_count;
    let bt = b.transpose();
    let matrix = CsrMatrix::from_blocks(nu + np, nu + np, &[(0, 0, &a), (0, nu, &bt), (nu, 0, &b), (nu, nu, &mp)]);

    // right-hand side, with sqrt(rho rho_n) evaluated per point
    let rho_floor = prm.rho_min();
    let clamped = std::sync::atomic::AtomicUsize::new(0);
    let lag = prm.sigma / (prm.gamma * prm.dt);
    let f_u = crate::discretization::assemble_linear(&disc.mesh, &disc.velocity, &disc.rule, |p, out| {
        let k = p.global_index;
        let phi = s.phi.values[k];
        let gphi = s.phi.grads[k];
        let mut rho = prm.mixture_density(phi);
        let mut rho_n = s.rho_n.values[k];
        if rho <= 0.0 || rho_n <= 0.0 {
            clamped.fetch_add(1, std::sync::atomic::Ordering::Relaxed);
            rho = rho.max(rho_floor);
            rho_n = rho_n.max(rho_floor);
        }
        let geo = (rho * rho_n).sqrt() / prm.dt;
        let un = s.u_n.values[k];
        let jump = lag * (phi - s.phi_n.values[k]);
        let extra = input.forcing.map(|f| f(p.x)).unwrap_or([0.0, 0.0]);
        let ns = p.test.n_scalar();
        for a in 0..2 {
            let val = input.gravity[a] * phi + geo * un[a] - jump * gphi[a] + extra[a];
            for si in 0..ns {
                out[a * ns + si] += p.weight * val * p.test.values[si];
            }
        }
    })?;
    let mut rhs = f_u;
    rhs.resize(nu + np, 0.0);
    Ok(NsSystem {
        system: SparseSystem::new(matrix, rhs)?,
        n_velocity: nu,
        n_pressure: np,
        divergence: b,
        clamped_points: clamped.into_inner(),
    })
}

/// Operator with the velocity boundary conditions applied.
pub fn assemble_ns(disc: &Discretization, input: &NsStepInput<'_>) -> Result<NsSystem> {
    let mut ns = assemble_ns_operator(disc, input)?;
    match input.dirichlet {
        Some(trace) => apply_dirichlet(&mut ns.system, &disc.velocity, |x, c| trace(x)[c])?,
        None => apply_dirichlet(&mut ns.system, &disc.velocity, |_, _| 0.0)?,
    }
    Ok(ns)
}

/// Assemble, solve and shift the pressure to zero mean.
pub fn solve_ns_step(disc: &Discretization, input: &NsStepInput<'_>) -> Result<NsSolution> {
    let mut ns = assemble_ns(disc, input)?;
    let x = solve_direct(&mut ns.system)?;
    let (u, p) = x.split_at(ns.n_velocity);
    let mut p = p.to_vec();
    let mean = mean_value(disc, &disc.pressure, &p)?;
    p.iter_mut().for_each(|v| *v -= mean);
    let bu = ns.divergence.mul_vec(u);
    Ok(NsSolution {
        u: u.to_vec(),
        p,
        divergence_residual: crate::discretization::sparse::norm2(&bu),
        clamped_points: ns.clamped_points,
    })
}
