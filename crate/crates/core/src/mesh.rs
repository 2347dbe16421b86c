//! Uniform triangulations of the unit square and the uniform time grid.
//!
//! Each of the `n × n` cells is split along its lower-left to upper-right
//! diagonal. Edges carry a canonical orientation from the lower to the higher
//! vertex index; the canonical normal is that tangent rotated by +90°.

use std::collections::HashMap;

use crate::{DpgError, Result};

pub type Point = [f64; 2];

/// Local edge `i` of a triangle joins local vertices `LOCAL_EDGES[i]`.
pub const LOCAL_EDGES: [[usize; 2]; 3] = [[0, 1], [1, 2], [2, 0]];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EdgeRef {
    pub edge: usize,
    /// `+1` if the element's outward normal equals the canonical edge normal.
    pub sign: i8,
}

#[derive(Debug, Clone)]
pub struct Mesh {
    pub vertices: Vec<Point>,
    /// Counter-clockwise vertex triples.
    pub triangles: Vec<[usize; 3]>,
    /// `(lo, hi)` with `lo < hi`.
    pub edges: Vec<[usize; 2]>,
    /// Per triangle, local edge `i` (see [`LOCAL_EDGES`]).
    pub edge_of_triangle: Vec<[EdgeRef; 3]>,
    pub boundary_edge: Vec<bool>,
    pub interior_vertex: Vec<bool>,
}

/// Affine geometry of one triangle.
#[derive(Debug, Clone, Copy)]
pub struct Triangle {
    pub vertices: [Point; 3],
}

impl Triangle {
    pub fn new(vertices: [Point; 3]) -> Self {
        Self { vertices }
    }

    /// Signed area; positive for counter-clockwise vertices.
    pub fn signed_area(&self) -> f64 {
        let [a, b, c] = self.vertices;
        0.5 * ((b[0] - a[0]) * (c[1] - a[1]) - (c[0] - a[0]) * (b[1] - a[1]))
    }

    pub fn area(&self) -> f64 {
        self.signed_area().abs()
    }

    pub fn centroid(&self) -> Point {
        let [a, b, c] = self.vertices;
        [(a[0] + b[0] + c[0]) / 3.0, (a[1] + b[1] + c[1]) / 3.0]
    }

    /// Length of local edge `i`.
    pub fn edge_length(&self, i: usize) -> f64 {
        let [p, q] = self.edge_endpoints(i);
        (q[0] - p[0]).hypot(q[1] - p[1])
    }

    pub fn edge_endpoints(&self, i: usize) -> [Point; 2] {
        let [a, b] = LOCAL_EDGES[i];
        [self.vertices[a], self.vertices[b]]
    }

    /// Unit outward normal on local edge `i` (counter-clockwise vertex order assumed).
    pub fn outward_normal(&self, i: usize) -> Point {
        let [p, q] = self.edge_endpoints(i);
        let (dx, dy) = (q[0] - p[0], q[1] - p[1]);
        let len = dx.hypot(dy);
        [dy / len, -dx / len]
    }

    pub fn diameter(&self) -> f64 {
        (0..3).map(|i| self.edge_length(i)).fold(0.0, f64::max)
    }

    /// Map reference coordinates on `(0,0),(1,0),(0,1)` to the element.
    pub fn map(&self, xi: Point) -> Point {
        let [a, b, c] = self.vertices;
        [
            a[0] + (b[0] - a[0]) * xi[0] + (c[0] - a[0]) * xi[1],
            a[1] + (b[1] - a[1]) * xi[0] + (c[1] - a[1]) * xi[1],
        ]
    }

    /// Barycentric coordinates of `p`.
    pub fn barycentric(&self, p: Point) -> [f64; 3] {
        let [a, b, c] = self.vertices;
        let det = 2.0 * self.signed_area();
        let l1 = ((p[0] - a[0]) * (c[1] - a[1]) - (c[0] - a[0]) * (p[1] - a[1])) / det;
        let l2 = ((b[0] - a[0]) * (p[1] - a[1]) - (p[0] - a[0]) * (b[1] - a[1])) / det;
        [1.0 - l1 - l2, l1, l2]
    }

    /// Constant gradients of the three barycentric coordinates.
    pub fn barycentric_gradients(&self) -> [Point; 3] {
        let [a, b, c] = self.vertices;
        let det = 2.0 * self.signed_area();
        let g1 = [(c[1] - a[1]) / det, -(c[0] - a[0]) / det];
        let g2 = [-(b[1] - a[1]) / det, (b[0] - a[0]) / det];
        [[-g1[0] - g2[0], -g1[1] - g2[1]], g1, g2]
    }
}

impl Mesh {
    pub fn num_vertices(&self) -> usize {
        self.vertices.len()
    }

    pub fn num_triangles(&self) -> usize {
        self.triangles.len()
    }

    pub fn num_edges(&self) -> usize {
        self.edges.len()
    }

    pub fn num_interior_vertices(&self) -> usize {
        self.interior_vertex.iter().filter(|&&b| b).count()
    }

    pub fn triangle(&self, t: usize) -> Triangle {
        let [a, b, c] = self.triangles[t];
        Triangle::new([self.vertices[a], self.vertices[b], self.vertices[c]])
    }

    /// Unit canonical normal of global edge `e`.
    pub fn canonical_normal(&self, e: usize) -> Point {
        let [lo, hi] = self.edges[e];
        let (p, q) = (self.vertices[lo], self.vertices[hi]);
        let (dx, dy) = (q[0] - p[0], q[1] - p[1]);
        let len = dx.hypot(dy);
        [-dy / len, dx / len]
    }

    /// Build a mesh from vertices and counter-clockwise triangles.
    pub fn from_triangles(vertices: Vec<Point>, triangles: Vec<[usize; 3]>) -> Result<Self> {
        let mut index: HashMap<[usize; 2], usize> = HashMap::new();
        let mut edges = Vec::new();
        let mut refs = vec![0usize; 0];
        let mut edge_of_triangle = Vec::with_capacity(triangles.len());

        for (t, tri) in triangles.iter().enumerate() {
            let geo = Triangle::new([vertices[tri[0]], vertices[tri[1]], vertices[tri[2]]]);
            let area = geo.signed_area();
            if area <= 0.0 {
                return Err(DpgError::DegenerateElement { element: t, area });
            }
            let mut local = [EdgeRef { edge: 0, sign: 0 }; 3];
            for (i, [a, b]) in LOCAL_EDGES.iter().enumerate() {
                let (va, vb) = (tri[*a], tri[*b]);
                let key = [va.min(vb), va.max(vb)];
                let edge = *index.entry(key).or_insert_with(|| {
                    edges.push(key);
                    refs.push(0);
                    edges.len() - 1
                });
                refs[edge] += 1;
                // Traversal a→b is counter-clockwise; the outward normal is the
                // clockwise rotation of that tangent, which is the canonical normal
                // exactly when the canonical direction is reversed (va > vb).
                let sign = if va > vb { 1 } else { -1 };
                local[i] = EdgeRef { edge, sign };
            }
            edge_of_triangle.push(local);
        }

        if let Some(e) = refs.iter().position(|&r| r > 2) {
            return Err(DpgError::InvalidConfig(format!(
                "edge {e} is shared by more than two triangles"
            )));
        }
        let boundary_edge: Vec<bool> = refs.iter().map(|&r| r == 1).collect();
        let mut interior_vertex = vec![true; vertices.len()];
        for (e, &[a, b]) in edges.iter().enumerate() {
            if boundary_edge[e] {
                interior_vertex[a] = false;
                interior_vertex[b] = false;
            }
        }

        Ok(Self {
            vertices,
            triangles,
            edges,
            edge_of_triangle,
            boundary_edge,
            interior_vertex,
        })
    }
}

/// Uniform mesh of `(0,1)²` with `n` cells per side, `2n²` triangles.
pub fn build_uniform_mesh(n: usize) -> Result<Mesh> {
    if n == 0 {
        return Err(DpgError::InvalidConfig(
            "mesh needs at least one subdivision per side".into(),
        ));
    }
    let nv = n + 1;
    let vertices = (0..nv)
        .flat_map(|j| (0..nv).map(move |i| [i as f64 / n as f64, j as f64 / n as f64]))
        .collect();
    let mut triangles = Vec::with_capacity(2 * n * n);
    for j in 0..n {
        for i in 0..n {
            let v00 = i + j * nv;
            let v10 = v00 + 1;
            let v01 = v00 + nv;
            let v11 = v01 + 1;
            triangles.push([v00, v10, v11]);
            triangles.push([v00, v11, v01]);
        }
    }
    Mesh::from_triangles(vertices, triangles)
}

/// Maximum element diameter.
pub fn mesh_size(mesh: &Mesh) -> f64 {
    (0..mesh.num_triangles())
        .map(|t| mesh.triangle(t).diameter())
        .fold(0.0, f64::max)
}

/// Uniform time steps `t_n = n·k`, `k = T/N`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimeGrid {
    pub final_time: f64,
    pub steps: usize,
    pub step_size: f64,
}

impl TimeGrid {
    pub fn new(final_time: f64, steps: usize) -> Result<Self> {
        if !(final_time > 0.0 && final_time.is_finite()) || steps == 0 {
            return Err(DpgError::InvalidConfig(format!(
                "time grid needs T > 0 and N ≥ 1 (T = {final_time}, N = {steps})"
            )));
        }
        Ok(Self {
            final_time,
            steps,
            step_size: final_time / steps as f64,
        })
    }

    /// Smallest uniform grid with step size at most `requested`: `N = ceil(T/k)`, `k = T/N`.
    pub fn with_max_step(final_time: f64, requested: f64) -> Result<Self> {
        if !(requested > 0.0 && requested.is_finite()) {
            return Err(DpgError::InvalidConfig(format!(
                "requested time step must be positive, got {requested}"
            )));
        }
        let ratio = final_time / requested;
        // Guard against ceil(3.0000000000000004) = 4 from rounding.
        let steps = if (ratio - ratio.round()).abs() < 1e-9 {
            ratio.round()
        } else {
            ratio.ceil()
        };
        Self::new(final_time, steps.max(1.0) as usize)
    }

    pub fn time(&self, n: usize) -> f64 {
        if n == self.steps {
            self.final_time
        } else {
            n as f64 * self.step_size
        }
    }
}
