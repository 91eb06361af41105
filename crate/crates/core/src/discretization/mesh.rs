use crate::error::{Error, Result};

/// Axis-aligned rectangle `[x_min, x_max] x [y_min, y_max]`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Rect {
    pub x_min: f64,
    pub x_max: f64,
    pub y_min: f64,
    pub y_max: f64,
}

impl Rect {
    pub const fn new(x_min: f64, x_max: f64, y_min: f64, y_max: f64) -> Self {
        Self {
            x_min,
            x_max,
            y_min,
            y_max,
        }
    }

    /// The square `[-1, 1]^2`.
    pub const fn unit_square() -> Self {
        Self::new(-1.0, 1.0, -1.0, 1.0)
    }

    pub fn width(&self) -> f64 {
        self.x_max - self.x_min
    }

    pub fn height(&self) -> f64 {
        self.y_max - self.y_min
    }

    pub fn area(&self) -> f64 {
        self.width() * self.height()
    }
}

/// Side of the rectangle a boundary edge lies on.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum BoundaryTag {
    Bottom,
    Right,
    Top,
    Left,
}

impl BoundaryTag {
    /// Outward unit normal.
    pub fn normal(self) -> [f64; 2] {
        match self {
            BoundaryTag::Bottom => [0.0, -1.0],
            BoundaryTag::Right => [1.0, 0.0],
            BoundaryTag::Top => [0.0, 1.0],
            BoundaryTag::Left => [-1.0, 0.0],
        }
    }
}

/// Boundary edge: the owning triangle and which of its local edges lies on
/// the boundary. Local edge `e` joins local vertices `e` and `(e + 1) % 3`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct BoundaryEdge {
    pub vertices: [usize; 2],
    pub triangle: usize,
    pub local_edge: usize,
    pub tag: BoundaryTag,
}

/// Uniform triangulation of a rectangle.
///
/// Vertex `(i, j)` of the `(n+1) x (n+1)` grid has index `j * (n + 1) + i`.
/// Each grid cell is split along its lower-left to upper-right diagonal into
/// two counter-clockwise triangles.
#[derive(Clone, Debug)]
pub struct Mesh {
    pub domain: Rect,
    pub n_subdivisions: usize,
    pub vertices: Vec<[f64; 2]>,
    pub triangles: Vec<[usize; 3]>,
    pub boundary_edges: Vec<BoundaryEdge>,
}

pub fn build_uniform_mesh(domain: Rect, n: usize) -> Result<Mesh> {
    if n == 0 {
        return Err(Error::InvalidArgument("mesh needs at least one subdivision".into()));
    }
    if !(domain.width() > 0.0 && domain.height() > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "degenerate rectangle {domain:?}"
        )));
    }
    let np = n + 1;
    let hx = domain.width() / n as f64;
    let hy = domain.height() / n as f64;
    let coord = |i: usize, len: f64, lo: f64, hi: f64| {
        // exact endpoints so boundary detection does not depend on rounding
        if i == n {
            hi
        } else {
            lo + i as f64 * len
        }
    };
    let mut vertices = Vec::with_capacity(np * np);
    for j in 0..np {
        for i in 0..np {
            vertices.push([
                coord(i, hx, domain.x_min, domain.x_max),
                coord(j, hy, domain.y_min, domain.y_max),
            ]);
        }
    }
    let vid = |i: usize, j: usize| j * np + i;
    let mut triangles = Vec::with_capacity(2 * n * n);
    let mut boundary_edges = Vec::with_capacity(4 * n);
    for j in 0..n {
        for i in 0..n {
            let v00 = vid(i, j);
            let v10 = vid(i + 1, j);
            let v01 = vid(i, j + 1);
            let v11 = vid(i + 1, j + 1);
            let lower = triangles.len();
            triangles.push([v00, v10, v11]);
            let upper = triangles.len();
            triangles.push([v00, v11, v01]);
            if j == 0 {
                boundary_edges.push(BoundaryEdge {
                    vertices: [v00, v10],
                    triangle: lower,
                    local_edge: 0,
                    tag: BoundaryTag::Bottom,
                });
            }
            if i == n - 1 {
                boundary_edges.push(BoundaryEdge {
                    vertices: [v10, v11],
                    triangle: lower,
                    local_edge: 1,
                    tag: BoundaryTag::Right,
                });
            }
            if j == n - 1 {
                boundary_edges.push(BoundaryEdge {
                    vertices: [v11, v01],
                    triangle: upper,
                    local_edge: 1,
                    tag: BoundaryTag::Top,
                });
            }
            if i == 0 {
                boundary_edges.push(BoundaryEdge {
                    vertices: [v01, v00],
                    triangle: upper,
                    local_edge: 2,
                    tag: BoundaryTag::Left,
                });
            }
        }
    }
    Ok(Mesh {
        domain,
        n_subdivisions: n,
        vertices,
        triangles,
        boundary_edges,
    })
}

impl Mesh {
    pub fn n_vertices(&self) -> usize {
        self.vertices.len()
    }

    pub fn n_triangles(&self) -> usize {
        self.triangles.len()
    }

    pub fn triangle_coords(&self, t: usize) -> [[f64; 2]; 3] {
        let [a, b, c] = self.triangles[t];
        [self.vertices[a], self.vertices[b], self.vertices[c]]
    }

    /// Signed area (positive for counter-clockwise orientation).
    pub fn signed_area(&self, t: usize) -> f64 {
        let [a, b, c] = self.triangle_coords(t);
        0.5 * ((b[0] - a[0]) * (c[1] - a[1]) - (c[0] - a[0]) * (b[1] - a[1]))
    }

    pub fn total_area(&self) -> f64 {
        (0..self.n_triangles()).map(|t| self.signed_area(t)).sum()
    }

    pub fn is_on_boundary(&self, p: [f64; 2]) -> bool {
        let d = &self.domain;
        let tol = 1e-12 * (d.width() + d.height());
        (p[0] - d.x_min).abs() <= tol
            || (p[0] - d.x_max).abs() <= tol
            || (p[1] - d.y_min).abs() <= tol
            || (p[1] - d.y_max).abs() <= tol
    }
}
