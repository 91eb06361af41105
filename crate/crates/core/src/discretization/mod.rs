//! Meshes, Lagrange spaces, quadrature and sparse assembly.

pub mod assembly;
pub mod basis;
pub mod dofmap;
pub mod mesh;
pub mod quadrature;
pub mod sparse;

pub use assembly::{
    assemble_bilinear, assemble_boundary_linear, assemble_linear, quadrature_points, sample_scalar,
    sample_vector, ElementBasis, LocalMatrix, QpField, QpVectorField, QuadPoint,
};
pub use dofmap::{DofMap, SpaceKind};
pub use mesh::{build_uniform_mesh, BoundaryTag, Mesh, Rect};
pub use quadrature::{GaussLegendre, QuadratureRule};
pub use sparse::{apply_dirichlet, solve_direct, CsrMatrix, SparseSystem, DIRECT_SOLVE_TOLERANCE};

/// Quadrature degree used by every solver form. Degree 8 covers the
/// cubic-in-phase Newton reaction term and the convection/Temam trilinear
/// terms exactly.
pub const FORM_QUADRATURE_DEGREE: usize = 8;

/// Mesh, spaces and the quadrature rule shared by both PDE solves.
#[derive(Clone, Debug)]
pub struct Discretization {
    pub mesh: Mesh,
    pub velocity: DofMap,
    pub pressure: DofMap,
    pub phase: DofMap,
    pub rule: QuadratureRule<f64>,
}

impl Discretization {
    /// Taylor-Hood velocity/pressure pair plus quadratic phase field on an
    /// `n x n` uniform mesh.
    pub fn new(domain: Rect, n: usize) -> crate::Result<Self> {
        let mesh = build_uniform_mesh(domain, n)?;
        Ok(Self {
            velocity: DofMap::new(&mesh, SpaceKind::VectorQuadratic),
            pressure: DofMap::new(&mesh, SpaceKind::ScalarLinear),
            phase: DofMap::new(&mesh, SpaceKind::ScalarQuadratic),
            rule: QuadratureRule::with_degree(FORM_QUADRATURE_DEGREE),
            mesh,
        })
    }

    pub fn domain_area(&self) -> f64 {
        self.mesh.domain.area()
    }
}
