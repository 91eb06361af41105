//! Element loops: bilinear and linear forms, boundary integrals and field
//! sampling at quadrature points.
//!
//! Local matrices are computed in parallel but scattered into the global
//! matrix in triangle order, so the result does not depend on the number of
//! worker threads.

use rayon::prelude::*;

use super::basis::{self, AffineMap, Degree};
use super::dofmap::DofMap;
use super::mesh::Mesh;
use super::quadrature::{GaussLegendre, QuadratureRule};
use super::sparse::CsrMatrix;
use crate::error::{Error, Result};

/// Reference basis values and gradients at every point of a rule.
#[derive(Clone, Debug)]
pub struct Tabulation {
    pub degree: Degree,
    pub n_points: usize,
    values: Vec<f64>,
    ref_grads: Vec<[f64; 2]>,
}

impl Tabulation {
    pub fn new(degree: Degree, rule: &QuadratureRule<f64>) -> Self {
        let nb = degree.n_local();
        let mut values = vec![0.0; rule.len() * nb];
        let mut ref_grads = vec![[0.0; 2]; rule.len() * nb];
        for (q, l) in rule.points.iter().enumerate() {
            basis::values(degree, *l, &mut values[q * nb..(q + 1) * nb]);
            basis::reference_gradients(degree, *l, &mut ref_grads[q * nb..(q + 1) * nb]);
        }
        Self {
            degree,
            n_points: rule.len(),
            values,
            ref_grads,
        }
    }

    pub fn values(&self, q: usize) -> &[f64] {
        let nb = self.degree.n_local();
        &self.values[q * nb..(q + 1) * nb]
    }

    /// Physical gradients at point `q` of an element with map `map`.
    pub fn gradients(&self, q: usize, map: &AffineMap, out: &mut [[f64; 2]]) {
        let nb = self.degree.n_local();
        for (o, g) in out.iter_mut().zip(&self.ref_grads[q * nb..(q + 1) * nb]) {
            *o = map.push_gradient(*g);
        }
    }
}

/// Scalar basis of one element evaluated at one point. Vector spaces reuse
/// the scalar functions per component: local dof `l` is component
/// `l / n_scalar()` times scalar function `l % n_scalar()`.
#[derive(Clone, Copy, Debug)]
pub struct ElementBasis<'a> {
    pub values: &'a [f64],
    pub grads: &'a [[f64; 2]],
    pub n_components: usize,
}

impl ElementBasis<'_> {
    pub fn n_scalar(&self) -> usize {
        self.values.len()
    }

    pub fn n_local(&self) -> usize {
        self.values.len() * self.n_components
    }

    /// `(component, scalar index)` of local dof `l`.
    pub fn split(&self, l: usize) -> (usize, usize) {
        (l / self.n_scalar(), l % self.n_scalar())
    }
}

/// Everything a bilinear kernel sees at one quadrature point.
#[derive(Clone, Copy, Debug)]
pub struct QuadPoint<'a> {
    pub element: usize,
    /// Point index within the rule.
    pub index: usize,
    /// `element * rule.len() + index`, the layout used by [`QpField`].
    pub global_index: usize,
    pub x: [f64; 2],
    /// Rule weight times element area.
    pub weight: f64,
    pub test: ElementBasis<'a>,
    pub trial: ElementBasis<'a>,
}

/// Dense element matrix, row-major, rows indexed by test dofs.
#[derive(Clone, Debug)]
pub struct LocalMatrix {
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<f64>,
}

impl LocalMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    #[inline]
    pub fn add(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.cols + j] += v;
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.cols + j]
    }
}

fn check_mesh(mesh: &Mesh, dm: &DofMap) -> Result<()> {
    if dm.matches(mesh) {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!(
            "dof map built for {} triangles used with a mesh of {}",
            dm.n_triangles(),
            mesh.n_triangles()
        )))
    }
}

/// CSR pattern coupling every test dof of a triangle with every trial dof.
pub fn sparsity_pattern(test: &DofMap, trial: &DofMap) -> CsrMatrix {
    let mut rows: Vec<Vec<usize>> = vec![Vec::new(); test.dof_count];
    let (mut td, mut sd) = (Vec::new(), Vec::new());
    for t in 0..test.n_triangles() {
        test.cell_dofs(t, &mut td);
        trial.cell_dofs(t, &mut sd);
        for &i in &td {
            rows[i].extend_from_slice(&sd);
        }
    }
    CsrMatrix::from_pattern(trial.dof_count, rows)
}

/// `A[i][j] = sum_T sum_q w |T| kernel(test_i, trial_j, q)`.
///
/// The kernel accumulates one quadrature point's contribution into the
/// element matrix.
pub fn assemble_bilinear<K>(
    mesh: &Mesh,
    trial: &DofMap,
    test: &DofMap,
    rule: &QuadratureRule<f64>,
    kernel: K,
) -> Result<CsrMatrix>
where
    K: Fn(&QuadPoint<'_>, &mut LocalMatrix) + Sync,
{
    check_mesh(mesh, trial)?;
    check_mesh(mesh, test)?;
    let test_tab = Tabulation::new(test.degree(), rule);
    let trial_tab = Tabulation::new(trial.degree(), rule);
    let nq = rule.len();
    let (nr, nc) = (test.n_local(), trial.n_local());

    let locals: Vec<LocalMatrix> = (0..mesh.n_triangles())
        .into_par_iter()
        .map(|t| {
            let map = AffineMap::new(mesh.triangle_coords(t));
            let mut local = LocalMatrix::zeros(nr, nc);
            let mut tg = vec![[0.0; 2]; test.degree().n_local()];
            let mut sg = vec![[0.0; 2]; trial.degree().n_local()];
            for q in 0..nq {
                test_tab.gradients(q, &map, &mut tg);
                trial_tab.gradients(q, &map, &mut sg);
                let point = QuadPoint {
                    element: t,
                    index: q,
                    global_index: t * nq + q,
                    x: map.map(rule.points[q]),
                    weight: rule.weights[q] * map.area(),
                    test: ElementBasis {
                        values: test_tab.values(q),
                        grads: &tg,
                        n_components: test.n_components(),
                    },
                    trial: ElementBasis {
                        values: trial_tab.values(q),
                        grads: &sg,
                        n_components: trial.n_components(),
                    },
                };
                kernel(&point, &mut local);
            }
            local
        })
        .collect();

    let mut matrix = sparsity_pattern(test, trial);
    let (mut td, mut sd) = (Vec::new(), Vec::new());
    for (t, local) in locals.iter().enumerate() {
        test.cell_dofs(t, &mut td);
        trial.cell_dofs(t, &mut sd);
        for (a, &i) in td.iter().enumerate() {
            for (b, &j) in sd.iter().enumerate() {
                let k = matrix.position(i, j).expect("pattern covers element couplings");
                matrix.values[k] += local.get(a, b);
            }
        }
    }
    Ok(matrix)
}

/// Linear form `b[i] = sum_T sum_q w |T| kernel(test_i, q)`; the kernel fills
/// the element vector for one point. The `trial` field of the point mirrors
/// `test`.
pub fn assemble_linear<K>(
    mesh: &Mesh,
    test: &DofMap,
    rule: &QuadratureRule<f64>,
    kernel: K,
) -> Result<Vec<f64>>
where
    K: Fn(&QuadPoint<'_>, &mut [f64]) + Sync,
{
    check_mesh(mesh, test)?;
    let tab = Tabulation::new(test.degree(), rule);
    let nq = rule.len();
    let nl = test.n_local();
    let locals: Vec<Vec<f64>> = (0..mesh.n_triangles())
        .into_par_iter()
        .map(|t| {
            let map = AffineMap::new(mesh.triangle_coords(t));
            let mut local = vec![0.0; nl];
            let mut g = vec![[0.0; 2]; test.degree().n_local()];
            for q in 0..nq {
                tab.gradients(q, &map, &mut g);
                let basis = ElementBasis {
                    values: tab.values(q),
                    grads: &g,
                    n_components: test.n_components(),
                };
                let point = QuadPoint {
                    element: t,
                    index: q,
                    global_index: t * nq + q,
                    x: map.map(rule.points[q]),
                    weight: rule.weights[q] * map.area(),
                    test: basis,
                    trial: basis,
                };
                kernel(&point, &mut local);
            }
            local
        })
        .collect();
    let mut out = vec![0.0; test.dof_count];
    let mut td = Vec::new();
    for (t, local) in locals.iter().enumerate() {
        test.cell_dofs(t, &mut td);
        for (&i, v) in td.iter().zip(local) {
            out[i] += v;
        }
    }
    Ok(out)
}

/// One Gauss point on a boundary edge.
#[derive(Clone, Copy, Debug)]
pub struct BoundaryPoint<'a> {
    pub x: [f64; 2],
    pub normal: [f64; 2],
    /// Gauss weight times edge length.
    pub weight: f64,
    /// Scalar basis values of the owning triangle.
    pub values: &'a [f64],
}

/// `b[i] = int_{boundary} kernel * psi_i ds` for a scalar space, with
/// `n_points` Gauss points per edge.
pub fn assemble_boundary_linear<K>(
    mesh: &Mesh,
    test: &DofMap,
    n_points: usize,
    kernel: K,
) -> Result<Vec<f64>>
where
    K: Fn(&BoundaryPoint<'_>) -> f64,
{
    check_mesh(mesh, test)?;
    if test.n_components() != 1 {
        return Err(Error::InvalidArgument("boundary forms need a scalar space".into()));
    }
    let gl = GaussLegendre::<f64>::new(n_points);
    let nb = test.degree().n_local();
    let mut values = vec![0.0; nb];
    let mut out = vec![0.0; test.dof_count];
    for edge in &mesh.boundary_edges {
        let map = AffineMap::new(mesh.triangle_coords(edge.triangle));
        let [a, b] = edge.vertices.map(|v| mesh.vertices[v]);
        let len = ((b[0] - a[0]).powi(2) + (b[1] - a[1]).powi(2)).sqrt();
        let (la, lb) = (edge.local_edge, (edge.local_edge + 1) % 3);
        let nodes = test.cell_nodes(edge.triangle);
        for (s, w) in gl.points.iter().zip(&gl.weights) {
            let mut l = [0.0; 3];
            l[la] = 1.0 - s;
            l[lb] = *s;
            basis::values(test.degree(), l, &mut values);
            let point = BoundaryPoint {
                x: map.map(l),
                normal: edge.tag.normal(),
                weight: w * len,
                values: &values,
            };
            let k = point.weight * kernel(&point);
            for (&i, v) in nodes.iter().zip(&values) {
                out[i] += k * v;
            }
        }
    }
    Ok(out)
}

/// Scalar finite element field sampled at all quadrature points, indexed by
/// [`QuadPoint::global_index`].
#[derive(Clone, Debug)]
pub struct QpField {
    pub values: Vec<f64>,
    pub grads: Vec<[f64; 2]>,
}

/// Vector field sampled at quadrature points; `grads[k][c]` is the gradient
/// of component `c`.
#[derive(Clone, Debug)]
pub struct QpVectorField {
    pub values: Vec<[f64; 2]>,
    pub grads: Vec<[[f64; 2]; 2]>,
}

impl QpVectorField {
    pub fn divergence(&self, k: usize) -> f64 {
        self.grads[k][0][0] + self.grads[k][1][1]
    }
}

fn check_len(dm: &DofMap, coeffs: &[f64]) -> Result<()> {
    if coeffs.len() == dm.dof_count {
        Ok(())
    } else {
        Err(Error::DimensionMismatch {
            context: "coefficient vector",
            expected: dm.dof_count,
            actual: coeffs.len(),
        })
    }
}

pub fn sample_scalar(
    mesh: &Mesh,
    dm: &DofMap,
    coeffs: &[f64],
    rule: &QuadratureRule<f64>,
) -> Result<QpField> {
    check_mesh(mesh, dm)?;
    check_len(dm, coeffs)?;
    let tab = Tabulation::new(dm.degree(), rule);
    let nq = rule.len();
    let nb = dm.degree().n_local();
    let per_element: Vec<(Vec<f64>, Vec<[f64; 2]>)> = (0..mesh.n_triangles())
        .into_par_iter()
        .map(|t| {
            let map = AffineMap::new(mesh.triangle_coords(t));
            let nodes = dm.cell_nodes(t);
            let mut g = vec![[0.0; 2]; nb];
            let mut vals = Vec::with_capacity(nq);
            let mut grads = Vec::with_capacity(nq);
            for q in 0..nq {
                tab.gradients(q, &map, &mut g);
                let (mut v, mut d) = (0.0, [0.0; 2]);
                for (s, &k) in nodes.iter().enumerate() {
                    let c = coeffs[k];
                    v += c * tab.values(q)[s];
                    d[0] += c * g[s][0];
                    d[1] += c * g[s][1];
                }
                vals.push(v);
                grads.push(d);
            }
            (vals, grads)
        })
        .collect();
    let mut values = Vec::with_capacity(mesh.n_triangles() * nq);
    let mut grads = Vec::with_capacity(mesh.n_triangles() * nq);
    for (v, g) in per_element {
        values.extend(v);
        grads.extend(g);
    }
    Ok(QpField { values, grads })
}

pub fn sample_vector(
    mesh: &Mesh,
    dm: &DofMap,
    coeffs: &[f64],
    rule: &QuadratureRule<f64>,
) -> Result<QpVectorField> {
    check_len(dm, coeffs)?;
    if dm.n_components() != 2 {
        return Err(Error::InvalidArgument("vector sampling needs a vector space".into()));
    }
    let n = dm.n_nodes();
    let scalar = DofMap::new(mesh, crate::discretization::SpaceKind::ScalarQuadratic);
    let x = sample_scalar(mesh, &scalar, &coeffs[..n], rule)?;
    let y = sample_scalar(mesh, &scalar, &coeffs[n..], rule)?;
    Ok(QpVectorField {
        values: x.values.iter().zip(&y.values).map(|(a, b)| [*a, *b]).collect(),
        grads: x.grads.iter().zip(&y.grads).map(|(a, b)| [*a, *b]).collect(),
    })
}

/// Physical coordinates and weights (rule weight times area) of all
/// quadrature points, in [`QuadPoint::global_index`] order.
pub fn quadrature_points(mesh: &Mesh, rule: &QuadratureRule<f64>) -> (Vec<[f64; 2]>, Vec<f64>) {
    let mut xs = Vec::with_capacity(mesh.n_triangles() * rule.len());
    let mut ws = Vec::with_capacity(xs.capacity());
    for t in 0..mesh.n_triangles() {
        let map = AffineMap::new(mesh.triangle_coords(t));
        for (l, w) in rule.points.iter().zip(&rule.weights) {
            xs.push(map.map(*l));
            ws.push(w * map.area());
        }
    }
    (xs, ws)
}
