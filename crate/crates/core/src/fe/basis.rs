//! Local bases on a triangle, expressed in scaled monomials about the centroid.
//!
//! With `s = (x - x_c)/h_K`, `t = (y - y_c)/h_K`:
//!
//! * scalar test space `P2`: `1, s, t, s², st, t²` (6 functions),
//! * vector test space `[P3]²`: `(m, 0)` and `(0, m)` for the 10 monomials of
//!   degree ≤ 3 (20 functions),
//! * trial `u`: the first 1 or 3 scalar monomials.
//!
//! Test function index `i < 6` is `(v_i, 0)`; index `6 + j` is `(0, τ_j)`.

use crate::mesh::{Point, Triangle};
use crate::{DpgError, Result};

use super::quadrature::TriangleRule;

pub const SCALAR_TEST_DIM: usize = 6;
pub const VECTOR_TEST_DIM: usize = 20;
pub const TEST_DIM: usize = SCALAR_TEST_DIM + VECTOR_TEST_DIM;

/// Exponents `(a, b)` of `s^a t^b`, graded by total degree.
pub(crate) const MONOMIALS: [(i32, i32); 10] = [
    (0, 0),
    (1, 0),
    (0, 1),
    (2, 0),
    (1, 1),
    (0, 2),
    (3, 0),
    (2, 1),
    (1, 2),
    (0, 3),
];

#[derive(Debug, Clone, Copy)]
pub struct TestBasis {
    centroid: Point,
    scale: f64,
}

fn pow(x: f64, e: i32) -> f64 {
    if e <= 0 {
        1.0
    } else {
        x.powi(e)
    }
}

impl TestBasis {
    pub fn new(tri: &Triangle) -> Result<Self> {
        let area = tri.signed_area();
        if area.partial_cmp(&0.0) != Some(std::cmp::Ordering::Greater) || !area.is_finite() {
            return Err(DpgError::DegenerateElement {
                element: usize::MAX,
                area,
            });
        }
        Ok(Self {
            centroid: tri.centroid(),
            scale: tri.diameter(),
        })
    }

    fn local(&self, p: Point) -> (f64, f64) {
        (
            (p[0] - self.centroid[0]) / self.scale,
            (p[1] - self.centroid[1]) / self.scale,
        )
    }

    /// Value and gradient of monomial `idx` at `p`.
    pub fn monomial(&self, idx: usize, p: Point) -> (f64, Point) {
        let (s, t) = self.local(p);
        let (a, b) = MONOMIALS[idx];
        let value = pow(s, a) * pow(t, b);
        let ds = if a > 0 {
            a as f64 * pow(s, a - 1) * pow(t, b)
        } else {
            0.0
        };
        let dt = if b > 0 {
            b as f64 * pow(s, a) * pow(t, b - 1)
        } else {
            0.0
        };
        (value, [ds / self.scale, dt / self.scale])
    }

    /// Scalar test functions and their gradients.
    pub fn scalar(&self, p: Point) -> ([f64; SCALAR_TEST_DIM], [Point; SCALAR_TEST_DIM]) {
        let mut v = [0.0; SCALAR_TEST_DIM];
        let mut g = [[0.0; 2]; SCALAR_TEST_DIM];
        for i in 0..SCALAR_TEST_DIM {
            (v[i], g[i]) = self.monomial(i, p);
        }
        (v, g)
    }

    /// Vector test functions and their divergences.
    pub fn vector(&self, p: Point) -> ([Point; VECTOR_TEST_DIM], [f64; VECTOR_TEST_DIM]) {
        let mut tau = [[0.0; 2]; VECTOR_TEST_DIM];
        let mut div = [0.0; VECTOR_TEST_DIM];
        for (m, _) in MONOMIALS.iter().enumerate() {
            let (value, grad) = self.monomial(m, p);
            tau[2 * m] = [value, 0.0];
            div[2 * m] = grad[0];
            tau[2 * m + 1] = [0.0, value];
            div[2 * m + 1] = grad[1];
        }
        (tau, div)
    }

    /// Trial `u` basis (first `count` scalar monomials): values and gradients.
    pub fn trial_u(&self, count: usize, p: Point) -> ([f64; 3], [Point; 3]) {
        let mut v = [0.0; 3];
        let mut g = [[0.0; 2]; 3];
        for i in 0..count {
            (v[i], g[i]) = self.monomial(i, p);
        }
        (v, g)
    }
}

/// Test basis values at the physical quadrature points of one element.
#[derive(Debug, Clone)]
pub struct TestTables {
    pub points: Vec<Point>,
    /// Physical weights (reference weight times Jacobian).
    pub weights: Vec<f64>,
    pub v: Vec<[f64; SCALAR_TEST_DIM]>,
    pub grad_v: Vec<[Point; SCALAR_TEST_DIM]>,
    pub tau: Vec<[Point; VECTOR_TEST_DIM]>,
    pub div_tau: Vec<[f64; VECTOR_TEST_DIM]>,
}

pub fn test_basis_tables(tri: &Triangle, rule: &TriangleRule) -> Result<TestTables> {
    let basis = TestBasis::new(tri)?;
    let n = rule.len();
    let mut tables = TestTables {
        points: Vec::with_capacity(n),
        weights: Vec::with_capacity(n),
        v: Vec::with_capacity(n),
        grad_v: Vec::with_capacity(n),
        tau: Vec::with_capacity(n),
        div_tau: Vec::with_capacity(n),
    };
    for (p, w) in rule.on(tri) {
        let (v, g) = basis.scalar(p);
        let (tau, div) = basis.vector(p);
        tables.points.push(p);
        tables.weights.push(w);
        tables.v.push(v);
        tables.grad_v.push(g);
        tables.tau.push(tau);
        tables.div_tau.push(div);
    }
    Ok(tables)
}
