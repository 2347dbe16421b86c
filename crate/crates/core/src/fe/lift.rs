//! Lifts of skeleton traces to functions on the whole domain.
//!
//! * [`p1_lift`]: continuous piecewise linear function with the `û` values at
//!   interior vertices and zero on the boundary.
//! * [`rt0_lift`]: lowest-order Raviart–Thomas field whose normal flux on every
//!   edge is the `σ̂` value. On a triangle it has the form `b + c·x`, so its
//!   divergence `2c` is elementwise constant.

use crate::mesh::{Mesh, Point, LOCAL_EDGES};
use crate::{DpgError, Result};

#[derive(Debug, Clone)]
pub struct P1Lift<'m> {
    mesh: &'m Mesh,
    vertex_values: Vec<f64>,
}

/// Lift `û` coefficients (one per interior vertex, in vertex order).
pub fn p1_lift<'m>(mesh: &'m Mesh, coefficients: &[f64]) -> Result<P1Lift<'m>> {
    let expected = mesh.num_interior_vertices();
    if coefficients.len() != expected {
        return Err(DpgError::DimensionMismatch {
            what: "û coefficients",
            expected,
            got: coefficients.len(),
        });
    }
    let mut it = coefficients.iter();
    let vertex_values = mesh
        .interior_vertex
        .iter()
        .map(|&interior| if interior { *it.next().unwrap() } else { 0.0 })
        .collect();
    Ok(P1Lift { mesh, vertex_values })
}

impl P1Lift<'_> {
    pub fn vertex_values(&self) -> &[f64] {
        &self.vertex_values
    }

    pub fn value(&self, t: usize, p: Point) -> f64 {
        let lambda = self.mesh.triangle(t).barycentric(p);
        self.mesh.triangles[t]
            .iter()
            .zip(lambda)
            .map(|(&v, l)| self.vertex_values[v] * l)
            .sum()
    }

    pub fn gradient(&self, t: usize) -> Point {
        let grads = self.mesh.triangle(t).barycentric_gradients();
        let mut g = [0.0; 2];
        for (&v, gl) in self.mesh.triangles[t].iter().zip(grads) {
            g[0] += self.vertex_values[v] * gl[0];
            g[1] += self.vertex_values[v] * gl[1];
        }
        g
    }
}

#[derive(Debug, Clone)]
pub struct Rt0Lift {
    /// Per triangle `(b, c)` with field `b + c·x`.
    coefficients: Vec<(Point, f64)>,
}

/// Lift `σ̂` coefficients (one per edge, flux along the canonical normal).
pub fn rt0_lift(mesh: &Mesh, fluxes: &[f64]) -> Result<Rt0Lift> {
    if fluxes.len() != mesh.num_edges() {
        return Err(DpgError::DimensionMismatch {
            what: "σ̂ coefficients",
            expected: mesh.num_edges(),
            got: fluxes.len(),
        });
    }
    let coefficients = (0..mesh.num_triangles())
        .map(|t| {
            let tri = mesh.triangle(t);
            let area = tri.area();
            let mut b = [0.0; 2];
            let mut c = 0.0;
            for (i, r) in mesh.edge_of_triangle[t].iter().enumerate() {
                // Shape function of edge i: |e_i|/(2|K|)·(x − P), P the opposite vertex.
                let opposite = tri.vertices[3 - LOCAL_EDGES[i][0] - LOCAL_EDGES[i][1]];
                let alpha = r.sign as f64 * fluxes[r.edge] * tri.edge_length(i) / (2.0 * area);
                c += alpha;
                b[0] -= alpha * opposite[0];
                b[1] -= alpha * opposite[1];
            }
            (b, c)
        })
        .collect();
    Ok(Rt0Lift { coefficients })
}

impl Rt0Lift {
    pub fn value(&self, t: usize, p: Point) -> Point {
        let (b, c) = self.coefficients[t];
        [b[0] + c * p[0], b[1] + c * p[1]]
    }

    pub fn divergence(&self, t: usize) -> f64 {
        2.0 * self.coefficients[t].1
    }
}
