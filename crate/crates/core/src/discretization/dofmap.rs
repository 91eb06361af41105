use super::basis::Degree;
use super::mesh::Mesh;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum SpaceKind {
    ScalarLinear,
    ScalarQuadratic,
    VectorQuadratic,
}

impl SpaceKind {
    pub fn degree(self) -> Degree {
        match self {
            SpaceKind::ScalarLinear => Degree::Linear,
            SpaceKind::ScalarQuadratic | SpaceKind::VectorQuadratic => Degree::Quadratic,
        }
    }

    pub fn n_components(self) -> usize {
        match self {
            SpaceKind::VectorQuadratic => 2,
            _ => 1,
        }
    }
}

/// Global numbering of a Lagrange space on a uniform mesh.
///
/// Quadratic nodes coincide with the once-refined `(2N+1) x (2N+1)` grid and
/// are numbered row by row. Vector spaces are component-blocked: all x
/// components first, then all y components.
#[derive(Clone, Debug)]
pub struct DofMap {
    pub space_kind: SpaceKind,
    /// Coordinates of the scalar nodes (shared by every component).
    pub dof_coordinates: Vec<[f64; 2]>,
    pub dof_count: usize,
    pub dirichlet_mask: Vec<bool>,
    /// Scalar node indices of each triangle in local basis order.
    cell_nodes: Vec<usize>,
    n_mesh_triangles: usize,
}

impl DofMap {
    pub fn new(mesh: &Mesh, space_kind: SpaceKind) -> Self {
        let n = mesh.n_subdivisions;
        let degree = space_kind.degree();
        let nl = degree.n_local();
        let (stride, scale) = match degree {
            Degree::Linear => (n + 1, 1),
            Degree::Quadratic => (2 * n + 1, 2),
        };
        let grid = |v: usize| {
            let (i, j) = (v % (n + 1), v / (n + 1));
            (i * scale, j * scale)
        };
        let mut cell_nodes = Vec::with_capacity(mesh.n_triangles() * nl);
        for tri in &mesh.triangles {
            let g: Vec<(usize, usize)> = tri.iter().map(|&v| grid(v)).collect();
            for &(i, j) in &g {
                cell_nodes.push(j * stride + i);
            }
            if degree == Degree::Quadratic {
                for (a, b) in [(0, 1), (1, 2), (2, 0)] {
                    let i = (g[a].0 + g[b].0) / 2;
                    let j = (g[a].1 + g[b].1) / 2;
                    cell_nodes.push(j * stride + i);
                }
            }
        }
        let d = &mesh.domain;
        let hx = d.width() / (stride - 1) as f64;
        let hy = d.height() / (stride - 1) as f64;
        let at = |k: usize, lo: f64, hi: f64, h: f64| if k == stride - 1 { hi } else { lo + k as f64 * h };
        let dof_coordinates: Vec<[f64; 2]> = (0..stride * stride)
            .map(|node| {
                let (i, j) = (node % stride, node / stride);
                [at(i, d.x_min, d.x_max, hx), at(j, d.y_min, d.y_max, hy)]
            })
            .collect();
        let scalar_mask: Vec<bool> = dof_coordinates
            .iter()
            .map(|p| mesh.is_on_boundary(*p))
            .collect();
        let nc = space_kind.n_components();
        let dirichlet_mask = scalar_mask.repeat(nc);
        Self {
            space_kind,
            dof_count: nc * dof_coordinates.len(),
            dof_coordinates,
            dirichlet_mask,
            cell_nodes,
            n_mesh_triangles: mesh.n_triangles(),
        }
    }

    pub fn degree(&self) -> Degree {
        self.space_kind.degree()
    }

    pub fn n_components(&self) -> usize {
        self.space_kind.n_components()
    }

    /// Number of scalar nodes (dofs per component).
    pub fn n_nodes(&self) -> usize {
        self.dof_coordinates.len()
    }

    /// Local dofs per triangle, counting all components.
    pub fn n_local(&self) -> usize {
        self.degree().n_local() * self.n_components()
    }

    pub fn n_triangles(&self) -> usize {
        self.n_mesh_triangles
    }

    /// Scalar node indices of triangle `t`.
    pub fn cell_nodes(&self, t: usize) -> &[usize] {
        let nl = self.degree().n_local();
        &self.cell_nodes[t * nl..(t + 1) * nl]
    }

    /// Global dof indices of triangle `t`, component-major.
    pub fn cell_dofs(&self, t: usize, out: &mut Vec<usize>) {
        out.clear();
        let nodes = self.cell_nodes(t);
        for c in 0..self.n_components() {
            out.extend(nodes.iter().map(|&k| c * self.n_nodes() + k));
        }
    }

    /// Nodal interpolation of a scalar function.
    pub fn interpolate(&self, f: impl Fn(f64, f64) -> f64) -> Vec<f64> {
        assert_eq!(self.n_components(), 1, "scalar interpolation on a vector space");
        self.dof_coordinates.iter().map(|p| f(p[0], p[1])).collect()
    }

    /// Nodal interpolation of a vector function into a component-blocked vector.
    pub fn interpolate_vector(&self, f: impl Fn(f64, f64) -> [f64; 2]) -> Vec<f64> {
        assert_eq!(self.n_components(), 2, "vector interpolation on a scalar space");
        let n = self.n_nodes();
        let mut out = vec![0.0; 2 * n];
        for (k, p) in self.dof_coordinates.iter().enumerate() {
            let v = f(p[0], p[1]);
            out[k] = v[0];
            out[n + k] = v[1];
        }
        out
    }

    pub fn matches(&self, mesh: &Mesh) -> bool {
        self.n_mesh_triangles == mesh.n_triangles()
    }
}
