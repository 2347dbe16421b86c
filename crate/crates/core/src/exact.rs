//! Manufactured solutions of `u̇ − Δu = f` on `(0,1)²` with `u = 0` on the boundary.

use std::f64::consts::{PI, SQRT_2};

use crate::mesh::Point;

/// An exact solution together with its data.
pub trait ExactSolution: Send + Sync {
    fn name(&self) -> &str;
    fn u(&self, p: Point, t: f64) -> f64;
    fn grad_u(&self, p: Point, t: f64) -> Point;
    fn dudt(&self, p: Point, t: f64) -> f64;
    fn f(&self, p: Point, t: f64) -> f64;

    fn u0(&self, p: Point) -> f64 {
        self.u(p, 0.0)
    }

    /// `div σ = Δu`, obtained from the equation as `u̇ − f`.
    fn div_sigma(&self, p: Point, t: f64) -> f64 {
        self.dudt(p, t) - self.f(p, t)
    }
}

/// `u = e^{−π²t} sin(πx) sin(πy)`, `f = π²u`.
#[derive(Debug, Clone, Copy, Default)]
pub struct Example1;

impl ExactSolution for Example1 {
    fn name(&self) -> &str {
        "example1"
    }

    fn u(&self, p: Point, t: f64) -> f64 {
        (-PI * PI * t).exp() * (PI * p[0]).sin() * (PI * p[1]).sin()
    }

    fn grad_u(&self, p: Point, t: f64) -> Point {
        let decay = (-PI * PI * t).exp();
        let (sx, cx) = (PI * p[0]).sin_cos();
        let (sy, cy) = (PI * p[1]).sin_cos();
        [PI * decay * cx * sy, PI * decay * sx * cy]
    }

    fn dudt(&self, p: Point, t: f64) -> f64 {
        -PI * PI * self.u(p, t)
    }

    fn f(&self, p: Point, t: f64) -> f64 {
        PI * PI * self.u(p, t)
    }
}

/// Fourier series solution with the rough datum `u₀ = (1 − x)·√2·sin(πy)` and `f = 0`.
///
/// `u = (2√2/π) sin(πy) Σ_{j=1}^{M} e^{−(j²+1)π²t} sin(jπx)/j`. The initial
/// datum is evaluated in closed form, not from the truncated series.
#[derive(Debug, Clone, Copy)]
pub struct Example2 {
    terms: usize,
}

pub const EXAMPLE2_DEFAULT_TERMS: usize = 1000;

/// Terms with a decay factor below this are dropped.
const DECAY_CUTOFF: f64 = 1e-300;

impl Example2 {
    pub fn new(terms: usize) -> Self {
        assert!(terms >= 1, "Example 2 needs at least one Fourier term");
        Self { terms }
    }

    pub fn terms(&self) -> usize {
        self.terms
    }

    /// Visits `(j, e^{−(j²+1)π²t})` for the retained terms.
    fn for_each_term(&self, t: f64, mut visit: impl FnMut(f64, f64)) {
        for j in 1..=self.terms {
            let jf = j as f64;
            let decay = (-(jf * jf + 1.0) * PI * PI * t).exp();
            if decay < DECAY_CUTOFF {
                break;
            }
            visit(jf, decay);
        }
    }

    fn amplitude() -> f64 {
        2.0 * SQRT_2 / PI
    }
}

impl Default for Example2 {
    fn default() -> Self {
        Self::new(EXAMPLE2_DEFAULT_TERMS)
    }
}

impl ExactSolution for Example2 {
    fn name(&self) -> &str {
        "example2"
    }

    fn u(&self, p: Point, t: f64) -> f64 {
        let mut sum = 0.0;
        self.for_each_term(t, |j, decay| sum += decay * (j * PI * p[0]).sin() / j);
        Self::amplitude() * (PI * p[1]).sin() * sum
    }

    fn grad_u(&self, p: Point, t: f64) -> Point {
        let (mut sx, mut s) = (0.0, 0.0);
        self.for_each_term(t, |j, decay| {
            let (sin, cos) = (j * PI * p[0]).sin_cos();
            sx += decay * PI * cos;
            s += decay * sin / j;
        });
        let (sy, cy) = (PI * p[1]).sin_cos();
        [Self::amplitude() * sy * sx, Self::amplitude() * PI * cy * s]
    }

    fn dudt(&self, p: Point, t: f64) -> f64 {
        let mut sum = 0.0;
        self.for_each_term(t, |j, decay| {
            sum -= (j * j + 1.0) * PI * PI * decay * (j * PI * p[0]).sin() / j;
        });
        Self::amplitude() * (PI * p[1]).sin() * sum
    }

    fn f(&self, _p: Point, _t: f64) -> f64 {
        0.0
    }

    fn u0(&self, p: Point) -> f64 {
        (1.0 - p[0]) * SQRT_2 * (PI * p[1]).sin()
    }
}

/// `c·u` with data `c·f`, `c·u₀`.
#[derive(Debug, Clone, Copy)]
pub struct Scaled<S> {
    pub inner: S,
    pub factor: f64,
}

impl<S: ExactSolution> ExactSolution for Scaled<S> {
    fn name(&self) -> &str {
        self.inner.name()
    }

    fn u(&self, p: Point, t: f64) -> f64 {
        self.factor * self.inner.u(p, t)
    }

    fn grad_u(&self, p: Point, t: f64) -> Point {
        let g = self.inner.grad_u(p, t);
        [self.factor * g[0], self.factor * g[1]]
    }

    fn dudt(&self, p: Point, t: f64) -> f64 {
        self.factor * self.inner.dudt(p, t)
    }

    fn f(&self, p: Point, t: f64) -> f64 {
        self.factor * self.inner.f(p, t)
    }

    fn u0(&self, p: Point) -> f64 {
        self.factor * self.inner.u0(p)
    }
}

/// Selector used by configuration and the command line.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExampleKind {
    One,
    Two { terms: usize },
}

impl ExampleKind {
    pub fn build(self) -> Box<dyn ExactSolution> {
        match self {
            ExampleKind::One => Box::new(Example1),
            ExampleKind::Two { terms } => Box::new(Example2::new(terms)),
        }
    }

    pub fn number(self) -> u8 {
        match self {
            ExampleKind::One => 1,
            ExampleKind::Two { .. } => 2,
        }
    }
}
