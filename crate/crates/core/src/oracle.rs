//! Independent reference computations for testing the assembled operators:
//! dense quadrature loops with hand-written P2/P1 bases, a dense Gaussian
//! elimination, and a generator of pointwise divergence-free velocities.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::allen_cahn::AcStepInput;
use crate::discretization::basis::{self, AffineMap, Degree};
use crate::discretization::{sparse, Discretization, QuadratureRule};
use crate::error::{Error, Result};
use crate::fields::ac_linearization;
use crate::navier_stokes::NsStepInput;

pub type Dense = Vec<Vec<f64>>;

/// Quadratic basis values and physical gradients at one point.
struct P2Point {
    val: [f64; 6],
    grad: [[f64; 2]; 6],
}

struct Triangle {
    gl: [[f64; 2]; 3],
    area: f64,
}

impl Triangle {
    fn new(v: [[f64; 2]; 3]) -> Self {
        let det = (v[1][0] - v[0][0]) * (v[2][1] - v[0][1]) - (v[2][0] - v[0][0]) * (v[1][1] - v[0][1]);
        Self {
            gl: [
                [(v[1][1] - v[2][1]) / det, (v[2][0] - v[1][0]) / det],
                [(v[2][1] - v[0][1]) / det, (v[0][0] - v[2][0]) / det],
                [(v[0][1] - v[1][1]) / det, (v[1][0] - v[0][0]) / det],
            ],
            area: det.abs() / 2.0,
        }
    }

    fn p2(&self, l: [f64; 3]) -> P2Point {
        let gl = &self.gl;
        let val = [
            l[0] * (2.0 * l[0] - 1.0),
            l[1] * (2.0 * l[1] - 1.0),
            l[2] * (2.0 * l[2] - 1.0),
            4.0 * l[0] * l[1],
            4.0 * l[1] * l[2],
            4.0 * l[2] * l[0],
        ];
        let mut grad = [[0.0; 2]; 6];
        for i in 0..3 {
            for c in 0..2 {
                grad[i][c] = (4.0 * l[i] - 1.0) * gl[i][c];
            }
        }
        for (m, (i, j)) in [(0usize, 1usize), (1, 2), (2, 0)].into_iter().enumerate() {
            for c in 0..2 {
                grad[3 + m][c] = 4.0 * (gl[i][c] * l[j] + l[i] * gl[j][c]);
            }
        }
        P2Point { val, grad }
    }
}

/// Phase-field matrix and right-hand side (no boundary flux) under `rule`.
pub fn dense_ac(d: &Discretization, input: &AcStepInput<'_>, rule: &QuadratureRule<f64>) -> (Dense, Vec<f64>) {
    let n = d.phase.dof_count;
    let mut a = vec![vec![0.0; n]; n];
    let mut b = vec![0.0; n];
    let prm = input.params;
    let nv = d.velocity.n_nodes();
    for t in 0..d.mesh.n_triangles() {
        let tri = Triangle::new(d.mesh.triangle_coords(t));
        let nodes = d.phase.cell_nodes(t);
        let vnodes = d.velocity.cell_nodes(t);
        for (l, w) in rule.points.iter().zip(&rule.weights) {
            let wt = w * tri.area;
            let P2Point { val, grad } = tri.p2(*l);
            let field = |c: &[f64], nodes: &[usize], off: usize| (0..6).map(|s| c[off + nodes[s]] * val[s]).sum::<f64>();
            let (pn, pk) = (field(input.phi_n, nodes, 0), field(input.phi_k, nodes, 0));
            let u = [field(input.u_k, vnodes, 0), field(input.u_k, vnodes, nv)];
            let cf = ac_linearization(input.method, pk, pn, prm);
            for i in 0..6 {
                b[nodes[i]] += wt * cf.rhs * val[i];
                for j in 0..6 {
                    let adv = u[0] * grad[j][0] + u[1] * grad[j][1];
                    let dif = grad[i][0] * grad[j][0] + grad[i][1] * grad[j][1];
                    a[nodes[i]][nodes[j]] +=
                        wt * (cf.reaction * val[j] * val[i] + prm.dt * adv * val[i] + prm.gamma * prm.dt * dif);
                }
            }
        }
    }
    (a, b)
}

/// Saddle-point operator `[u_x, u_y, p]` and right-hand side (no body
/// force, no source, no boundary rows) on the discretization's own rule,
/// since `sqrt(rho rho_n)` is not polynomial.
pub fn dense_ns(d: &Discretization, input: &NsStepInput<'_>) -> (Dense, Vec<f64>) {
    let prm = input.params;
    let nv = d.velocity.n_nodes();
    let nu = 2 * nv;
    let n = nu + d.pressure.dof_count;
    let mut a = vec![vec![0.0; n]; n];
    let mut rhs = vec![0.0; n];
    let rule = &d.rule;
    for t in 0..d.mesh.n_triangles() {
        let tri = Triangle::new(d.mesh.triangle_coords(t));
        let qn = d.velocity.cell_nodes(t);
        let ln = d.pressure.cell_nodes(t);
        for (l, w) in rule.points.iter().zip(&rule.weights) {
            let wt = w * tri.area;
            let P2Point { val, grad: g } = tri.p2(*l);
            let eval = |c: &[f64], off: usize| -> (f64, [f64; 2]) {
                let mut s = (0.0, [0.0; 2]);
                for k in 0..6 {
                    let x = c[off + qn[k]];
                    s.0 += x * val[k];
                    s.1[0] += x * g[k][0];
                    s.1[1] += x * g[k][1];
                }
                s
            };
            let (phi, gphi) = eval(input.phi_k1, 0);
            let (phin, _) = eval(input.phi_n, 0);
            let (rhon, _) = eval(input.rho_n, 0);
            let (ux, gux) = eval(input.u_k, 0);
            let (uy, guy) = eval(input.u_k, nv);
            let (unx, _) = eval(input.u_n, 0);
            let (uny, _) = eval(input.u_n, nv);
            let rho = prm.rho_bar() + 0.5 * prm.delta_rho() * phi;
            let mu = prm.mu_bar() + 0.5 * prm.delta_mu() * phi;
            let grho = [0.5 * prm.delta_rho() * gphi[0], 0.5 * prm.delta_rho() * gphi[1]];
            let div_rho_u = grho[0] * ux + grho[1] * uy + rho * (gux[0] + guy[1]);
            let u = [ux, uy];
            let un = [unx, uny];
            for ci in 0..2 {
                for i in 0..6 {
                    let row = ci * nv + qn[i];
                    let src = (rho * rhon).sqrt() / prm.dt * un[ci]
                        - prm.sigma / (prm.gamma * prm.dt) * (phi - phin) * gphi[ci];
                    rhs[row] += wt * src * val[i];
                    for cj in 0..2 {
                        for j in 0..6 {
                            let col = cj * nv + qn[j];
                            // D(e_cj N_j) : D(e_ci N_i)
                            let mut dd = 0.0;
                            for r in 0..2 {
                                for s in 0..2 {
                                    let dj = 0.5
                                        * (if r == cj { g[j][s] } else { 0.0 } + if s == cj { g[j][r] } else { 0.0 });
                                    let di = 0.5
                                        * (if r == ci { g[i][s] } else { 0.0 } + if s == ci { g[i][r] } else { 0.0 });
                                    dd += dj * di;
                                }
                            }
                            let mut e = mu * dd + prm.sigma / prm.gamma * gphi[cj] * gphi[ci] * val[j] * val[i];
                            if ci == cj {
                                e += rho / prm.dt * val[j] * val[i]
                                    + rho * (u[0] * g[j][0] + u[1] * g[j][1]) * val[i]
                                    + 0.5 * div_rho_u * val[j] * val[i];
                            }
                            a[row][col] += wt * e;
                        }
                    }
                }
            }
            for qi in 0..3 {
                for cj in 0..2 {
                    for j in 0..6 {
                        let bval = -wt * l[qi] * g[j][cj];
                        a[nu + ln[qi]][cj * nv + qn[j]] += bval;
                        a[cj * nv + qn[j]][nu + ln[qi]] += bval;
                    }
                }
                for qj in 0..3 {
                    a[nu + ln[qi]][nu + ln[qj]] -= prm.eps_pressure * wt * l[qi] * l[qj];
                }
            }
        }
    }
    (a, rhs)
}

/// Gaussian elimination with partial pivoting.
pub fn dense_solve(mut a: Dense, mut b: Vec<f64>) -> Vec<f64> {
    let n = b.len();
    for k in 0..n {
        let piv = (k..n).max_by(|&i, &j| a[i][k].abs().total_cmp(&a[j][k].abs())).unwrap();
        a.swap(k, piv);
        b.swap(k, piv);
        for i in k + 1..n {
            let f = a[i][k] / a[k][k];
            for j in k..n {
                a[i][j] -= f * a[k][j];
            }
            b[i] -= f * b[k];
        }
    }
    let mut x = vec![0.0; n];
    for k in (0..n).rev() {
        let s: f64 = (k + 1..n).map(|j| a[k][j] * x[j]).sum();
        x[k] = (b[k] - s) / a[k][k];
    }
    x
}

/// Largest entrywise difference between a dense and a sparse matrix.
pub fn max_entry_difference(dense: &Dense, sparse: &crate::discretization::CsrMatrix) -> f64 {
    let mut worst = 0.0f64;
    for (i, row) in dense.iter().enumerate() {
        for (j, v) in row.iter().enumerate() {
            worst = worst.max((sparse.get(i, j) - v).abs());
        }
    }
    worst
}

/// Pointwise divergence of a quadratic velocity at the vertices of every
/// triangle, as dense rows over all velocity dofs.
fn divergence_rows(d: &Discretization) -> Dense {
    let nv = d.velocity.n_nodes();
    let mut rows = Vec::new();
    let mut g = [[0.0; 2]; 6];
    for t in 0..d.mesh.n_triangles() {
        let map = AffineMap::new(d.mesh.triangle_coords(t));
        let nodes = d.velocity.cell_nodes(t);
        for l in basis::local_nodes::<f64>(Degree::Linear) {
            basis::reference_gradients(Degree::Quadratic, l, &mut g);
            let mut row = vec![0.0; 2 * nv];
            for s in 0..6 {
                let pg = map.push_gradient(g[s]);
                row[nodes[s]] += pg[0];
                row[nv + nodes[s]] += pg[1];
            }
            rows.push(row);
        }
    }
    rows
}

/// A random velocity vanishing on the boundary whose divergence is zero
/// at every point (piecewise-linear divergence vanishing at all vertices),
/// obtained by projecting with conjugate gradients on the normal equations.
pub fn divergence_free_velocity(d: &Discretization, seed: u64) -> Result<Vec<f64>> {
    let rows = divergence_rows(d);
    let n = 2 * d.velocity.n_nodes();
    let free: Vec<bool> = d.velocity.dirichlet_mask.iter().map(|b| !b).collect();
    let apply = |x: &[f64]| -> Vec<f64> {
        let dx: Vec<f64> = rows.iter().map(|r| r.iter().zip(x).map(|(a, b)| a * b).sum()).collect();
        let mut out = vec![0.0; n];
        for (r, v) in rows.iter().zip(&dx) {
            for k in 0..n {
                if free[k] {
                    out[k] += r[k] * v;
                }
            }
        }
        out
    };
    let dot = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(x, y)| x * y).sum::<f64>();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut x: Vec<f64> = (0..n).map(|k| if free[k] { rng.random_range(-1.0..1.0) } else { 0.0 }).collect();
    // solve D^T D e = D^T D x for the range component e, then x - e
    for _ in 0..5 {
        let b = apply(&x);
        let mut e = vec![0.0; n];
        let mut r = b.clone();
        let mut p = r.clone();
        let mut rr = dot(&r, &r);
        let stop = 1e-28 * rr;
        for _ in 0..4 * n {
            let ap = apply(&p);
            let pap = dot(&p, &ap);
            if rr <= stop || pap <= 0.0 {
                break;
            }
            let alpha = rr / pap;
            for k in 0..n {
                e[k] += alpha * p[k];
                r[k] -= alpha * ap[k];
            }
            let rr_new = dot(&r, &r);
            for k in 0..n {
                p[k] = r[k] + rr_new / rr * p[k];
            }
            rr = rr_new;
        }
        for k in 0..n {
            x[k] -= e[k];
        }
    }
    let worst = rows
        .iter()
        .map(|r| r.iter().zip(&x).map(|(a, b)| a * b).sum::<f64>().abs())
        .fold(0.0, f64::max);
    if worst > 1e-11 {
        return Err(Error::InaccurateSolve {
            residual: worst,
            tolerance: 1e-11,
        });
    }
    if sparse::norm2(&x) < 1e-3 {
        return Err(Error::InvalidArgument("mesh too coarse for a nonzero divergence-free velocity".into()));
    }
    Ok(x)
}
