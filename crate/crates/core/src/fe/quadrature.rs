//! Gauss rules on the reference triangle and the unit interval.
//!
//! Triangle rules are collapsed (Duffy) tensor products of Gauss–Legendre
//! rules: a monomial of total degree `d` becomes a polynomial of degree `d+1`
//! in the collapsed direction, so `ceil((d+2)/2)` points per direction are
//! exact.

use std::num::NonZeroUsize;

use gauss_quad::GaussLegendre;

use crate::mesh::{Point, Triangle};
use crate::{DpgError, Result};

pub const MAX_RULE_DEGREE: usize = 12;

/// Rule on the reference triangle `(0,0),(1,0),(0,1)`; weights sum to `1/2`.
#[derive(Debug, Clone)]
pub struct TriangleRule {
    pub points: Vec<Point>,
    pub weights: Vec<f64>,
    pub degree: usize,
}

/// Rule on `[0,1]`; weights sum to `1`.
#[derive(Debug, Clone)]
pub struct EdgeRule {
    pub points: Vec<f64>,
    pub weights: Vec<f64>,
    pub degree: usize,
}

fn gauss_legendre_unit(points: usize) -> Vec<(f64, f64)> {
    let rule = GaussLegendre::new(NonZeroUsize::new(points).expect("at least one point"));
    rule.nodes()
        .zip(rule.weights())
        .map(|(x, w)| (0.5 * (x + 1.0), 0.5 * w))
        .collect()
}

fn check_degree(min_degree: usize) -> Result<()> {
    if min_degree > MAX_RULE_DEGREE {
        return Err(DpgError::UnsupportedQuadrature {
            requested: min_degree,
            max: MAX_RULE_DEGREE,
        });
    }
    Ok(())
}

pub fn triangle_rule(min_degree: usize) -> Result<TriangleRule> {
    check_degree(min_degree)?;
    let n = (min_degree + 3) / 2;
    let line = gauss_legendre_unit(n);
    let mut points = Vec::with_capacity(n * n);
    let mut weights = Vec::with_capacity(n * n);
    for &(a, wa) in &line {
        for &(b, wb) in &line {
            points.push([a, (1.0 - a) * b]);
            weights.push(wa * wb * (1.0 - a));
        }
    }
    Ok(TriangleRule {
        points,
        weights,
        degree: 2 * n - 2,
    })
}

pub fn edge_rule(min_degree: usize) -> Result<EdgeRule> {
    check_degree(min_degree)?;
    let n = min_degree / 2 + 1;
    let (points, weights) = gauss_legendre_unit(n).into_iter().unzip();
    Ok(EdgeRule {
        points,
        weights,
        degree: 2 * n - 1,
    })
}

impl TriangleRule {
    /// Physical points and weights on `tri`.
    pub fn on(&self, tri: &Triangle) -> impl Iterator<Item = (Point, f64)> + '_ {
        let jac = 2.0 * tri.area();
        let tri = *tri;
        self.points
            .iter()
            .zip(&self.weights)
            .map(move |(&xi, &w)| (tri.map(xi), w * jac))
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

impl EdgeRule {
    /// Physical points, weights and the parameter `s ∈ [0,1]` on the segment `p → q`.
    pub fn on_segment(&self, p: Point, q: Point) -> impl Iterator<Item = (Point, f64, f64)> + '_ {
        let len = (q[0] - p[0]).hypot(q[1] - p[1]);
        self.points
            .iter()
            .zip(&self.weights)
            .map(move |(&s, &w)| ([p[0] + s * (q[0] - p[0]), p[1] + s * (q[1] - p[1])], w * len, s))
    }
}
