//! Lagrange bases on the reference triangle.
//!
//! Local dof order: vertices 0, 1, 2, then (for P2) the midpoints of edges
//! 0-1, 1-2 and 2-0.

use crate::scalar::Scalar;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Degree {
    Linear,
    Quadratic,
}

impl Degree {
    pub fn n_local(self) -> usize {
        match self {
            Degree::Linear => 3,
            Degree::Quadratic => 6,
        }
    }
}

/// Basis values at barycentric point `l`.
pub fn values<T: Scalar>(degree: Degree, l: [T; 3], out: &mut [T]) {
    match degree {
        Degree::Linear => out[..3].copy_from_slice(&l),
        Degree::Quadratic => {
            let two = T::lit(2.0);
            let four = T::lit(4.0);
            for i in 0..3 {
                out[i] = l[i] * (two * l[i] - T::one());
            }
            out[3] = four * l[0] * l[1];
            out[4] = four * l[1] * l[2];
            out[5] = four * l[2] * l[0];
        }
    }
}

/// Gradients with respect to the reference coordinates `(xi, eta)`, where
/// `l1 = xi`, `l2 = eta`, `l0 = 1 - xi - eta`.
pub fn reference_gradients<T: Scalar>(degree: Degree, l: [T; 3], out: &mut [[T; 2]]) {
    let one = T::one();
    let zero = T::zero();
    // d(l0, l1, l2)/d(xi, eta)
    let dl = [[-one, -one], [one, zero], [zero, one]];
    match degree {
        Degree::Linear => out[..3].copy_from_slice(&dl),
        Degree::Quadratic => {
            let four = T::lit(4.0);
            for i in 0..3 {
                let f = four * l[i] - one;
                out[i] = [f * dl[i][0], f * dl[i][1]];
            }
            let edge = |a: usize, b: usize| {
                [
                    four * (dl[a][0] * l[b] + l[a] * dl[b][0]),
                    four * (dl[a][1] * l[b] + l[a] * dl[b][1]),
                ]
            };
            out[3] = edge(0, 1);
            out[4] = edge(1, 2);
            out[5] = edge(2, 0);
        }
    }
}

/// Barycentric coordinates of the local nodes.
pub fn local_nodes<T: Scalar>(degree: Degree) -> Vec<[T; 3]> {
    let o = T::one();
    let z = T::zero();
    let h = T::lit(0.5);
    let mut nodes = vec![[o, z, z], [z, o, z], [z, z, o]];
    if degree == Degree::Quadratic {
        nodes.extend([[h, h, z], [z, h, h], [h, z, h]]);
    }
    nodes
}

/// Affine map from the reference triangle to a physical triangle.
#[derive(Clone, Copy, Debug)]
pub struct AffineMap {
    pub origin: [f64; 2],
    /// Columns are `b - a` and `c - a`.
    pub jacobian: [[f64; 2]; 2],
    /// Inverse transpose of the Jacobian, used to push gradients forward.
    pub inv_t: [[f64; 2]; 2],
    /// Absolute determinant of the Jacobian (twice the area).
    pub det: f64,
}

impl AffineMap {
    pub fn new(v: [[f64; 2]; 3]) -> Self {
        let j = [
            [v[1][0] - v[0][0], v[2][0] - v[0][0]],
            [v[1][1] - v[0][1], v[2][1] - v[0][1]],
        ];
        let det = j[0][0] * j[1][1] - j[0][1] * j[1][0];
        let inv_t = [
            [j[1][1] / det, -j[1][0] / det],
            [-j[0][1] / det, j[0][0] / det],
        ];
        Self {
            origin: v[0],
            jacobian: j,
            inv_t,
            det: det.abs(),
        }
    }

    pub fn area(&self) -> f64 {
        0.5 * self.det
    }

    pub fn map(&self, l: [f64; 3]) -> [f64; 2] {
        let j = &self.jacobian;
        [
            self.origin[0] + j[0][0] * l[1] + j[0][1] * l[2],
            self.origin[1] + j[1][0] * l[1] + j[1][1] * l[2],
        ]
    }

    pub fn push_gradient(&self, g: [f64; 2]) -> [f64; 2] {
        let m = &self.inv_t;
        [m[0][0] * g[0] + m[0][1] * g[1], m[1][0] * g[0] + m[1][1] * g[1]]
    }

    /// Inverse of [`AffineMap::map`].
    pub fn barycentric(&self, x: [f64; 2]) -> [f64; 3] {
        let m = &self.inv_t;
        let d = [x[0] - self.origin[0], x[1] - self.origin[1]];
        let l1 = m[0][0] * d[0] + m[1][0] * d[1];
        let l2 = m[0][1] * d[0] + m[1][1] * d[1];
        [1.0 - l1 - l2, l1, l2]
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::discretization::quadrature::QuadratureRule;

    #[test]
    fn quadratic_basis_is_a_partition_of_unity() {
        let rule = QuadratureRule::<f64>::with_degree(8);
        let mut v = [0.0; 6];
        let mut g = [[0.0; 2]; 6];
        for p in &rule.points {
            values(Degree::Quadratic, *p, &mut v);
            reference_gradients(Degree::Quadratic, *p, &mut g);
            assert!((v.iter().sum::<f64>() - 1.0).abs() < 1e-14);
            let gx: f64 = g.iter().map(|d| d[0]).sum();
            let gy: f64 = g.iter().map(|d| d[1]).sum();
            assert!(gx.abs() < 1e-13 && gy.abs() < 1e-13);
        }
    }

    #[test]
    fn nodal_basis_is_kronecker() {
        for degree in [Degree::Linear, Degree::Quadratic] {
            let nodes = local_nodes::<f64>(degree);
            let mut v = vec![0.0; degree.n_local()];
            for (i, node) in nodes.iter().enumerate() {
                values(degree, *node, &mut v);
                for (j, vj) in v.iter().enumerate() {
                    let expected = if i == j { 1.0 } else { 0.0 };
                    assert!((vj - expected).abs() < 1e-15);
                }
            }
        }
    }

    #[test]
    fn gradients_match_finite_differences() {
        let l = [0.2, 0.3, 0.5];
        let h = 1e-6;
        let mut g = [[0.0; 2]; 6];
        reference_gradients(Degree::Quadratic, l, &mut g);
        let eval = |xi: f64, eta: f64| {
            let mut v = [0.0; 6];
            values(Degree::Quadratic, [1.0 - xi - eta, xi, eta], &mut v);
            v
        };
        let (xp, xm) = (eval(0.3 + h, 0.5), eval(0.3 - h, 0.5));
        let (yp, ym) = (eval(0.3, 0.5 + h), eval(0.3, 0.5 - h));
        for i in 0..6 {
            assert!((g[i][0] - (xp[i] - xm[i]) / (2.0 * h)).abs() < 1e-8);
            assert!((g[i][1] - (yp[i] - ym[i]) / (2.0 * h)).abs() < 1e-8);
        }
    }

    #[test]
    fn affine_map_pushes_linear_gradients() {
        let map = AffineMap::new([[0.0, 0.0], [2.0, 0.0], [2.0, 1.0]]);
        assert!((map.area() - 1.0).abs() < 1e-15);
        // the linear function x equals 2*l1 + 2*l2 on this triangle
        let gx = [
            2.0 * 1.0 + 2.0 * 0.0, // d/dxi
            2.0 * 0.0 + 2.0 * 1.0, // d/deta
        ];
        let g = map.push_gradient(gx);
        assert!((g[0] - 1.0).abs() < 1e-15 && g[1].abs() < 1e-15);
        assert_eq!(map.map([0.0, 0.0, 1.0]), [2.0, 1.0]);
    }
}
