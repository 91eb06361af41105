//! Quadrature-based norms and errors of finite element fields.

use crate::discretization::{quadrature_points, sample_scalar, sample_vector, DofMap, Discretization};
use crate::error::Result;

/// `sqrt(int f^2)` with `f` given at quadrature points.
fn weighted_root(ws: &[f64], sq: impl Iterator<Item = f64>) -> f64 {
    ws.iter().zip(sq).map(|(w, v)| w * v).sum::<f64>().sqrt()
}

/// L2 norm of a scalar field.
pub fn l2_norm(disc: &Discretization, dm: &DofMap, coeffs: &[f64]) -> Result<f64> {
    let s = sample_scalar(&disc.mesh, dm, coeffs, &disc.rule)?;
    let (_, ws) = quadrature_points(&disc.mesh, &disc.rule);
    Ok(weighted_root(&ws, s.values.iter().map(|v| v * v)))
}

/// L2 norm of the gradient of a scalar field.
pub fn grad_l2_norm(disc: &Discretization, dm: &DofMap, coeffs: &[f64]) -> Result<f64> {
    let s = sample_scalar(&disc.mesh, dm, coeffs, &disc.rule)?;
    let (_, ws) = quadrature_points(&disc.mesh, &disc.rule);
    Ok(weighted_root(&ws, s.grads.iter().map(|g| g[0] * g[0] + g[1] * g[1])))
}

/// Norms of a velocity field.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct VelocityNorms {
    pub l2: f64,
    /// Full gradient, Frobenius.
    pub grad: f64,
    /// Symmetric gradient `(grad u + grad u^T) / 2`, Frobenius.
    pub strain: f64,
    pub divergence: f64,
}

pub fn velocity_norms(disc: &Discretization, u: &[f64]) -> Result<VelocityNorms> {
    let s = sample_vector(&disc.mesh, &disc.velocity, u, &disc.rule)?;
    let (_, ws) = quadrature_points(&disc.mesh, &disc.rule);
    let (mut l2, mut grad, mut strain, mut div) = (0.0, 0.0, 0.0, 0.0);
    for (k, w) in ws.iter().enumerate() {
        let v = s.values[k];
        let g = s.grads[k];
        l2 += w * (v[0] * v[0] + v[1] * v[1]);
        grad += w * (g[0][0].powi(2) + g[0][1].powi(2) + g[1][0].powi(2) + g[1][1].powi(2));
        let off = 0.5 * (g[0][1] + g[1][0]);
        strain += w * (g[0][0].powi(2) + 2.0 * off * off + g[1][1].powi(2));
        div += w * s.divergence(k).powi(2);
    }
    Ok(VelocityNorms {
        l2: l2.sqrt(),
        grad: grad.sqrt(),
        strain: strain.sqrt(),
        divergence: div.sqrt(),
    })
}

/// `||u . grad(phi)||` in L2.
pub fn advective_norm(disc: &Discretization, u: &[f64], phi: &[f64]) -> Result<f64> {
    let su = sample_vector(&disc.mesh, &disc.velocity, u, &disc.rule)?;
    let sp = sample_scalar(&disc.mesh, &disc.phase, phi, &disc.rule)?;
    let (_, ws) = quadrature_points(&disc.mesh, &disc.rule);
    Ok(weighted_root(
        &ws,
        su.values.iter().zip(&sp.grads).map(|(v, g)| (v[0] * g[0] + v[1] * g[1]).powi(2)),
    ))
}

/// `||phi_h - f||` in L2.
pub fn l2_error(
    disc: &Discretization,
    dm: &DofMap,
    coeffs: &[f64],
    f: impl Fn(f64, f64) -> f64,
) -> Result<f64> {
    let s = sample_scalar(&disc.mesh, dm, coeffs, &disc.rule)?;
    let (xs, ws) = quadrature_points(&disc.mesh, &disc.rule);
    Ok(weighted_root(
        &ws,
        s.values.iter().zip(&xs).map(|(v, x)| (v - f(x[0], x[1])).powi(2)),
    ))
}

/// `sqrt(||phi_h - f||^2 + ||grad(phi_h - f)||^2)`.
pub fn h1_error(
    disc: &Discretization,
    dm: &DofMap,
    coeffs: &[f64],
    f: impl Fn(f64, f64) -> f64,
    grad_f: impl Fn(f64, f64) -> [f64; 2],
) -> Result<f64> {
    let s = sample_scalar(&disc.mesh, dm, coeffs, &disc.rule)?;
    let (xs, ws) = quadrature_points(&disc.mesh, &disc.rule);
    let sq = (0..xs.len()).map(|k| {
        let x = xs[k];
        let g = grad_f(x[0], x[1]);
        (s.values[k] - f(x[0], x[1])).powi(2)
            + (s.grads[k][0] - g[0]).powi(2)
            + (s.grads[k][1] - g[1]).powi(2)
    });
    Ok(weighted_root(&ws, sq))
}

/// `||u_h - f||` in L2 for the velocity space.
pub fn velocity_l2_error(
    disc: &Discretization,
    u: &[f64],
    f: impl Fn(f64, f64) -> [f64; 2],
) -> Result<f64> {
    let s = sample_vector(&disc.mesh, &disc.velocity, u, &disc.rule)?;
    let (xs, ws) = quadrature_points(&disc.mesh, &disc.rule);
    Ok(weighted_root(
        &ws,
        s.values.iter().zip(&xs).map(|(v, x)| {
            let e = f(x[0], x[1]);
            (v[0] - e[0]).powi(2) + (v[1] - e[1]).powi(2)
        }),
    ))
}

/// `int phi_h / |Omega|`.
pub fn mean_value(disc: &Discretization, dm: &DofMap, coeffs: &[f64]) -> Result<f64> {
    let s = sample_scalar(&disc.mesh, dm, coeffs, &disc.rule)?;
    let (_, ws) = quadrature_points(&disc.mesh, &disc.rule);
    let total: f64 = ws.iter().zip(&s.values).map(|(w, v)| w * v).sum();
    Ok(total / disc.domain_area())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::discretization::Rect;

    fn disc(n: usize) -> Discretization {
        Discretization::new(Rect::new(-1.0, 1.0, -1.0, 1.0), n).unwrap()
    }

    #[test]
    fn constant_field_norms() {
        let d = disc(3);
        let ones = vec![1.0; d.phase.dof_count];
        assert!((l2_norm(&d, &d.phase, &ones).unwrap() - 2.0).abs() < 1e-13);
        assert!(grad_l2_norm(&d, &d.phase, &ones).unwrap() < 1e-12);
        assert!((mean_value(&d, &d.pressure, &vec![3.0; d.pressure.dof_count]).unwrap() - 3.0).abs() < 1e-13);
    }

    #[test]
    fn quadratic_field_norms() {
        // int_{[-1,1]^2} x^4 = 4/5, int |grad x^2|^2 = int 4 x^2 = 16/3
        let d = disc(2);
        let c = d.phase.interpolate(|x, _| x * x);
        assert!((l2_norm(&d, &d.phase, &c).unwrap() - (0.8f64).sqrt()).abs() < 1e-13);
        assert!((grad_l2_norm(&d, &d.phase, &c).unwrap() - (16.0f64 / 3.0).sqrt()).abs() < 1e-13);
        assert!(l2_error(&d, &d.phase, &c, |x, _| x * x).unwrap() < 1e-14);
        assert!(h1_error(&d, &d.phase, &c, |x, _| x * x, |x, _| [2.0 * x, 0.0]).unwrap() < 1e-13);
    }

    #[test]
    fn velocity_norm_components() {
        // u = (y, 0): grad norm^2 = 4, strain has off-diagonal 1/2 twice
        let d = disc(2);
        let u = d.velocity.interpolate_vector(|_, y| [y, 0.0]);
        let n = velocity_norms(&d, &u).unwrap();
        assert!((n.l2 - (4.0f64 / 3.0).sqrt()).abs() < 1e-13);
        assert!((n.grad - 2.0).abs() < 1e-13);
        assert!((n.strain - (2.0f64).sqrt()).abs() < 1e-13);
        assert!(n.divergence < 1e-13);
        let phi = d.phase.interpolate(|_, y| y);
        // u . grad(phi) = 0
        assert!(advective_norm(&d, &u, &phi).unwrap() < 1e-14);
        assert!(velocity_l2_error(&d, &u, |_, y| [y, 0.0]).unwrap() < 1e-14);
    }
}
