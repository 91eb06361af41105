//! Quadrature rules on the reference triangle and the unit interval.
//!
//! Triangle rules store barycentric points and weights normalized to sum to
//! one, so `|T| * sum(w_q f(x_q))` approximates `int_T f`.

use crate::scalar::Scalar;

/// Gauss-Legendre rule on `[0, 1]`, weights summing to one.
#[derive(Clone, Debug)]
pub struct GaussLegendre<T> {
    pub points: Vec<T>,
    pub weights: Vec<T>,
}

impl<T: Scalar> GaussLegendre<T> {
    /// `n`-point rule, exact for polynomials of degree `2n - 1`.
    ///
    /// Nodes are the roots of the Legendre polynomial found by Newton's
    /// method in the working precision.
    pub fn new(n: usize) -> Self {
        assert!(n >= 1, "Gauss-Legendre rule needs at least one point");
        let one = T::one();
        let half = T::lit(0.5);
        let nt = T::from_count(n);
        let mut points = vec![T::zero(); n];
        let mut weights = vec![T::zero(); n];
        for i in 0..n {
            // Chebyshev-like initial guess on [-1, 1]
            let mut x = (T::PI() * (T::from_count(i) + T::lit(0.75)) / (nt + half)).cos();
            for _ in 0..100 {
                let (p, d) = legendre(n, x);
                let dx = p / d;
                x = x - dx;
                if dx.abs() <= T::epsilon() * T::lit(4.0) {
                    break;
                }
            }
            let (_, dp) = legendre(n, x);
            // [-1, 1] weight is 2 / ((1 - x^2) P'^2); the map to [0, 1] halves it
            points[n - 1 - i] = half * (x + one);
            weights[n - 1 - i] = one / ((one - x * x) * dp * dp);
        }
        Self { points, weights }
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

/// Legendre polynomial `P_n(x)` and its derivative.
fn legendre<T: Scalar>(n: usize, x: T) -> (T, T) {
    let one = T::one();
    let mut p0 = one;
    let mut p1 = x;
    if n == 0 {
        return (one, T::zero());
    }
    for k in 2..=n {
        let kt = T::from_count(k);
        let p2 = ((T::lit(2.0) * kt - one) * x * p1 - (kt - one) * p0) / kt;
        p0 = p1;
        p1 = p2;
    }
    let nt = T::from_count(n);
    let dp = nt * (x * p1 - p0) / (x * x - one);
    (p1, dp)
}

/// Rule on the reference triangle `(0,0), (1,0), (0,1)`.
#[derive(Clone, Debug)]
pub struct QuadratureRule<T> {
    /// Barycentric coordinates `(l0, l1, l2)`; the Cartesian point is `(l1, l2)`.
    pub points: Vec<[T; 3]>,
    pub weights: Vec<T>,
    /// Highest total polynomial degree integrated exactly.
    pub degree: usize,
}

impl<T: Scalar> QuadratureRule<T> {
    /// One-point centroid rule, degree 1.
    pub fn centroid() -> Self {
        let third = T::one() / T::lit(3.0);
        Self {
            points: vec![[third; 3]],
            weights: vec![T::one()],
            degree: 1,
        }
    }

    /// Three interior points, degree 2.
    pub fn three_point() -> Self {
        let a = T::lit(2.0) / T::lit(3.0);
        let b = T::one() / T::lit(6.0);
        let w = T::one() / T::lit(3.0);
        Self {
            points: vec![[a, b, b], [b, a, b], [b, b, a]],
            weights: vec![w; 3],
            degree: 2,
        }
    }

    /// Collapsed (Duffy) tensor Gauss rule with `n * n` points.
    ///
    /// The collapse Jacobian adds one degree in the radial direction, so the
    /// rule is exact up to degree `2n - 2`.
    pub fn collapsed_gauss(n: usize) -> Self {
        let gl = GaussLegendre::<T>::new(n);
        let two = T::lit(2.0);
        let mut points = Vec::with_capacity(n * n);
        let mut weights = Vec::with_capacity(n * n);
        for (s, ws) in gl.points.iter().zip(&gl.weights) {
            for (t, wt) in gl.points.iter().zip(&gl.weights) {
                let x = *s;
                let y = (T::one() - *s) * *t;
                points.push([T::one() - x - y, x, y]);
                weights.push(two * *ws * *wt * (T::one() - *s));
            }
        }
        Self {
            points,
            weights,
            degree: 2 * n - 2,
        }
    }

    /// Smallest collapsed rule exact for polynomials of `degree`.
    pub fn with_degree(degree: usize) -> Self {
        match degree {
            0 | 1 => Self::centroid(),
            2 => Self::three_point(),
            d => Self::collapsed_gauss(d.div_ceil(2) + 1),
        }
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}
