//! Independent oracles shared by the integration tests.
//!
//! Nothing here calls the library's quadrature or assembly code.

#![allow(dead_code)]

use dpg_heat::mesh::{Point, Triangle, LOCAL_EDGES};
use nalgebra::{DMatrix, DVector};

/// Gauss–Legendre nodes and weights on `[0,1]` by Newton iteration on `P_n`.
pub fn gauss_legendre(n: usize) -> Vec<(f64, f64)> {
    let mut out = Vec::with_capacity(n);
    for i in 0..n {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for m in 2..=n {
                let m = m as f64;
                let p2 = ((2.0 * m - 1.0) * x * p1 - (m - 1.0) * p0) / m;
                p0 = p1;
                p1 = p2;
            }
            let p = if n == 1 { x } else { p1 };
            let pm1 = if n == 1 { 1.0 } else { p0 };
            dp = n as f64 * (x * p - pm1) / (x * x - 1.0);
            let dx = p / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        out.push((0.5 * (x + 1.0), 0.5 * w));
    }
    out
}

/// Physical points and weights of a collapsed `m × m` rule on `tri`.
pub fn triangle_points(tri: &Triangle, m: usize) -> Vec<(Point, f64)> {
    let [a, b, c] = tri.vertices;
    let jac = ((b[0] - a[0]) * (c[1] - a[1]) - (c[0] - a[0]) * (b[1] - a[1])).abs();
    let line = gauss_legendre(m);
    let mut pts = Vec::with_capacity(m * m);
    for &(xi, wi) in &line {
        for &(eta, wj) in &line {
            let (s, t) = (xi, (1.0 - xi) * eta);
            let p = [
                a[0] + s * (b[0] - a[0]) + t * (c[0] - a[0]),
                a[1] + s * (b[1] - a[1]) + t * (c[1] - a[1]),
            ];
            pts.push((p, wi * wj * (1.0 - xi) * jac));
        }
    }
    pts
}

/// `(point, weight, s)` on the segment `p → q`.
pub fn segment_points(p: Point, q: Point, m: usize) -> Vec<(Point, f64, f64)> {
    let len = ((q[0] - p[0]).powi(2) + (q[1] - p[1]).powi(2)).sqrt();
    gauss_legendre(m)
        .into_iter()
        .map(|(s, w)| ([p[0] + s * (q[0] - p[0]), p[1] + s * (q[1] - p[1])], w * len, s))
        .collect()
}

const EXPONENTS: [(i32, i32); 10] = [
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

/// Scaled monomial `s^a t^b` about the centroid, `s = (x − x_c)/diam`.
pub struct Monomials {
    c: Point,
    h: f64,
}

impl Monomials {
    pub fn new(tri: &Triangle) -> Self {
        let [a, b, c] = tri.vertices;
        let d = |p: Point, q: Point| ((p[0] - q[0]).powi(2) + (p[1] - q[1]).powi(2)).sqrt();
        Self {
            c: [(a[0] + b[0] + c[0]) / 3.0, (a[1] + b[1] + c[1]) / 3.0],
            h: d(a, b).max(d(b, c)).max(d(c, a)),
        }
    }

    pub fn value(&self, i: usize, p: Point) -> f64 {
        let (a, b) = EXPONENTS[i];
        let s = (p[0] - self.c[0]) / self.h;
        let t = (p[1] - self.c[1]) / self.h;
        s.powi(a) * t.powi(b)
    }

    pub fn grad(&self, i: usize, p: Point) -> Point {
        let (a, b) = EXPONENTS[i];
        let s = (p[0] - self.c[0]) / self.h;
        let t = (p[1] - self.c[1]) / self.h;
        let ds = if a > 0 {
            a as f64 * s.powi(a - 1) * t.powi(b)
        } else {
            0.0
        };
        let dt = if b > 0 {
            b as f64 * s.powi(a) * t.powi(b - 1)
        } else {
            0.0
        };
        [ds / self.h, dt / self.h]
    }

    /// Vector test function `j`: monomial `j/2` in component `j%2`.
    pub fn tau(&self, j: usize, p: Point) -> Point {
        let v = self.value(j / 2, p);
        if j.is_multiple_of(2) {
            [v, 0.0]
        } else {
            [0.0, v]
        }
    }

    pub fn div_tau(&self, j: usize, p: Point) -> f64 {
        self.grad(j / 2, p)[j % 2]
    }
}

fn outward_normal(tri: &Triangle, i: usize) -> Point {
    let [a, b] = LOCAL_EDGES[i];
    let (p, q) = (tri.vertices[a], tri.vertices[b]);
    let (dx, dy) = (q[0] - p[0], q[1] - p[1]);
    let len = (dx * dx + dy * dy).sqrt();
    [dy / len, -dx / len]
}

/// Gram matrix of the test norm, 26 × 26, with a high-order rule.
pub fn oracle_gram(tri: &Triangle, k: f64) -> DMatrix<f64> {
    let m = Monomials::new(tri);
    let mut g = DMatrix::zeros(26, 26);
    for (p, w) in triangle_points(tri, 12) {
        for i in 0..6 {
            for j in 0..6 {
                let gi = m.grad(i, p);
                let gj = m.grad(j, p);
                g[(i, j)] += w * (m.value(i, p) * m.value(j, p) / (k * k) + (gi[0] * gj[0] + gi[1] * gj[1]) / k);
            }
        }
        for i in 0..20 {
            for j in 0..20 {
                let (ti, tj) = (m.tau(i, p), m.tau(j, p));
                g[(6 + i, 6 + j)] += w * ((ti[0] * tj[0] + ti[1] * tj[1]) / k + m.div_tau(i, p) * m.div_tau(j, p));
            }
        }
    }
    g
}

/// `b_e` with columns `u (n_u), σ (2), û (hat_u_vertices), σ̂ (3 edges)`.
pub fn oracle_b(tri: &Triangle, signs: [i8; 3], k: f64, n_u: usize, hat_u_vertices: &[usize]) -> DMatrix<f64> {
    let m = Monomials::new(tri);
    let cols = n_u + 2 + hat_u_vertices.len() + 3;
    let mut b = DMatrix::zeros(26, cols);
    for (p, w) in triangle_points(tri, 12) {
        for c in 0..n_u {
            let u = m.value(c, p);
            for i in 0..6 {
                b[(i, c)] += w * u * m.value(i, p) / k;
            }
            for j in 0..20 {
                b[(6 + j, c)] += w * u * m.div_tau(j, p);
            }
        }
        for c in 0..2 {
            for i in 0..6 {
                b[(i, n_u + c)] += w * m.grad(i, p)[c];
            }
            for j in 0..20 {
                b[(6 + j, n_u + c)] += w * m.tau(j, p)[c];
            }
        }
    }
    for e in 0..3 {
        let [a, bb] = LOCAL_EDGES[e];
        let n = outward_normal(tri, e);
        for (p, w, s) in segment_points(tri.vertices[a], tri.vertices[bb], 12) {
            for i in 0..6 {
                b[(i, n_u + 2 + hat_u_vertices.len() + e)] -= w * signs[e] as f64 * m.value(i, p);
            }
            for (col, &vertex) in hat_u_vertices.iter().enumerate() {
                let lambda = if vertex == a {
                    1.0 - s
                } else if vertex == bb {
                    s
                } else {
                    0.0
                };
                for j in 0..20 {
                    let t = m.tau(j, p);
                    b[(6 + j, n_u + 2 + col)] -= w * lambda * (t[0] * n[0] + t[1] * n[1]);
                }
            }
        }
    }
    b
}

/// `(g, v)` on the scalar test rows; `g = f + u_prev/k` for a step load.
pub fn oracle_load(tri: &Triangle, data: impl Fn(Point) -> f64) -> DVector<f64> {
    let m = Monomials::new(tri);
    let mut l = DVector::zeros(26);
    for (p, w) in triangle_points(tri, 12) {
        for i in 0..6 {
            l[i] += w * data(p) * m.value(i, p);
        }
    }
    l
}

pub fn max_abs_diff(a: &DMatrix<f64>, b: &DMatrix<f64>) -> f64 {
    assert_eq!(a.shape(), b.shape());
    a.iter().zip(b.iter()).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

/// `u = (1 + t)·x(1 − x)y(1 − y)`: polynomial data, so every quadrature in play is exact.
pub struct Bubble;

impl dpg_heat::exact::ExactSolution for Bubble {
    fn name(&self) -> &str {
        "bubble"
    }

    fn u(&self, p: Point, t: f64) -> f64 {
        (1.0 + t) * p[0] * (1.0 - p[0]) * p[1] * (1.0 - p[1])
    }

    fn grad_u(&self, p: Point, t: f64) -> Point {
        [
            (1.0 + t) * (1.0 - 2.0 * p[0]) * p[1] * (1.0 - p[1]),
            (1.0 + t) * p[0] * (1.0 - p[0]) * (1.0 - 2.0 * p[1]),
        ]
    }

    fn dudt(&self, p: Point, _t: f64) -> f64 {
        p[0] * (1.0 - p[0]) * p[1] * (1.0 - p[1])
    }

    fn f(&self, p: Point, t: f64) -> f64 {
        self.dudt(p, t) + 2.0 * (1.0 + t) * (p[0] * (1.0 - p[0]) + p[1] * (1.0 - p[1]))
    }
}
