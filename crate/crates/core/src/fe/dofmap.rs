//! Global numbering of the trial unknowns `(u, σ, û, σ̂)`.
//!
//! Blocks are contiguous and in that order:
//! `u` (1 or 3 per triangle), `σ` (2 per triangle), `û` (one per interior
//! vertex), `σ̂` (one per edge, flux along the canonical edge normal).

use crate::mesh::Mesh;
use crate::{DpgError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TrialConfig {
    u_degree: usize,
}

impl TrialConfig {
    pub fn new(u_degree: usize) -> Result<Self> {
        if u_degree > 1 {
            return Err(DpgError::InvalidConfig(format!(
                "u_degree must be 0 or 1, got {u_degree}"
            )));
        }
        Ok(Self { u_degree })
    }

    pub fn piecewise_constant() -> Self {
        Self { u_degree: 0 }
    }

    pub fn piecewise_linear() -> Self {
        Self { u_degree: 1 }
    }

    pub fn u_degree(&self) -> usize {
        self.u_degree
    }

    pub fn u_dofs_per_element(&self) -> usize {
        if self.u_degree == 0 {
            1
        } else {
            3
        }
    }
}

impl Default for TrialConfig {
    fn default() -> Self {
        Self::piecewise_constant()
    }
}

#[derive(Debug, Clone)]
pub struct DofMap {
    pub config: TrialConfig,
    num_triangles: usize,
    sigma_offset: usize,
    hat_u_offset: usize,
    hat_sigma_offset: usize,
    total: usize,
    /// Global index of each vertex's `û` dof; `None` on the boundary.
    vertex_dof: Vec<Option<usize>>,
}

/// Columns of an element's trial-to-test matrix and their global dofs.
#[derive(Debug, Clone, PartialEq)]
pub struct LocalLayout {
    /// Global dof per local column.
    pub dofs: Vec<usize>,
    pub n_u: usize,
    /// Local vertex index of each `û` column, in column order.
    pub hat_u_vertices: Vec<usize>,
}

impl LocalLayout {
    pub const N_SIGMA: usize = 2;

    pub fn len(&self) -> usize {
        self.dofs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.dofs.is_empty()
    }

    pub fn sigma_col(&self) -> usize {
        self.n_u
    }

    pub fn hat_u_col(&self) -> usize {
        self.n_u + Self::N_SIGMA
    }

    pub fn hat_sigma_col(&self) -> usize {
        self.hat_u_col() + self.hat_u_vertices.len()
    }
}

pub fn build_dof_map(mesh: &Mesh, config: TrialConfig) -> DofMap {
    let f = mesh.num_triangles();
    let sigma_offset = config.u_dofs_per_element() * f;
    let hat_u_offset = sigma_offset + 2 * f;
    let mut next = hat_u_offset;
    let vertex_dof = mesh
        .interior_vertex
        .iter()
        .map(|&interior| {
            interior.then(|| {
                next += 1;
                next - 1
            })
        })
        .collect();
    let hat_sigma_offset = next;
    DofMap {
        config,
        num_triangles: f,
        sigma_offset,
        hat_u_offset,
        hat_sigma_offset,
        total: hat_sigma_offset + mesh.num_edges(),
        vertex_dof,
    }
}

impl DofMap {
    pub fn total(&self) -> usize {
        self.total
    }

    pub fn num_u(&self) -> usize {
        self.sigma_offset
    }

    pub fn num_sigma(&self) -> usize {
        self.hat_u_offset - self.sigma_offset
    }

    pub fn num_hat_u(&self) -> usize {
        self.hat_sigma_offset - self.hat_u_offset
    }

    pub fn num_hat_sigma(&self) -> usize {
        self.total - self.hat_sigma_offset
    }

    pub fn u_range(&self) -> std::ops::Range<usize> {
        0..self.sigma_offset
    }

    pub fn sigma_range(&self) -> std::ops::Range<usize> {
        self.sigma_offset..self.hat_u_offset
    }

    pub fn hat_u_range(&self) -> std::ops::Range<usize> {
        self.hat_u_offset..self.hat_sigma_offset
    }

    pub fn hat_sigma_range(&self) -> std::ops::Range<usize> {
        self.hat_sigma_offset..self.total
    }

    pub fn u_dof(&self, t: usize, i: usize) -> usize {
        debug_assert!(t < self.num_triangles);
        t * self.config.u_dofs_per_element() + i
    }

    pub fn sigma_dof(&self, t: usize, component: usize) -> usize {
        self.sigma_offset + 2 * t + component
    }

    pub fn hat_u_dof(&self, vertex: usize) -> Option<usize> {
        self.vertex_dof[vertex]
    }

    pub fn hat_sigma_dof(&self, edge: usize) -> usize {
        self.hat_sigma_offset + edge
    }

    pub fn local_layout(&self, mesh: &Mesh, t: usize) -> LocalLayout {
        let n_u = self.config.u_dofs_per_element();
        let mut dofs: Vec<usize> = (0..n_u).map(|i| self.u_dof(t, i)).collect();
        dofs.extend((0..2).map(|c| self.sigma_dof(t, c)));
        let mut hat_u_vertices = Vec::with_capacity(3);
        for (a, &v) in mesh.triangles[t].iter().enumerate() {
            if let Some(d) = self.vertex_dof[v] {
                hat_u_vertices.push(a);
                dofs.push(d);
            }
        }
        dofs.extend(mesh.edge_of_triangle[t].iter().map(|r| self.hat_sigma_dof(r.edge)));
        LocalLayout {
            dofs,
            n_u,
            hat_u_vertices,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::build_uniform_mesh;

    #[test]
    fn dof_counts() {
        let m1 = build_uniform_mesh(1).unwrap();
        assert_eq!(build_dof_map(&m1, TrialConfig::piecewise_constant()).total(), 11);
        let m2 = build_uniform_mesh(2).unwrap();
        let d0 = build_dof_map(&m2, TrialConfig::piecewise_constant());
        assert_eq!(d0.total(), 41);
        assert_eq!(
            (d0.num_u(), d0.num_sigma(), d0.num_hat_u(), d0.num_hat_sigma()),
            (8, 16, 1, 16)
        );
        let d1 = build_dof_map(&m2, TrialConfig::piecewise_linear());
        assert_eq!(d1.total(), 57);
    }

    #[test]
    fn blocks_disjoint_and_contiguous() {
        let mesh = build_uniform_mesh(5).unwrap();
        for cfg in [TrialConfig::piecewise_constant(), TrialConfig::piecewise_linear()] {
            let d = build_dof_map(&mesh, cfg);
            let ranges = [d.u_range(), d.sigma_range(), d.hat_u_range(), d.hat_sigma_range()];
            assert_eq!(ranges[0].start, 0);
            for w in ranges.windows(2) {
                assert_eq!(w[0].end, w[1].start);
            }
            assert_eq!(ranges[3].end, d.total());
            let mut seen = vec![0u32; d.total()];
            for t in 0..mesh.num_triangles() {
                let layout = d.local_layout(&mesh, t);
                for i in 0..layout.n_u {
                    seen[layout.dofs[i]] += 1;
                }
                seen[layout.dofs[layout.sigma_col()]] += 1;
                seen[layout.dofs[layout.sigma_col() + 1]] += 1;
            }
            assert!(seen[d.u_range()].iter().chain(&seen[d.sigma_range()]).all(|&c| c == 1));
        }
    }

    #[test]
    fn boundary_vertices_have_no_hat_u() {
        let mesh = build_uniform_mesh(3).unwrap();
        let d = build_dof_map(&mesh, TrialConfig::default());
        for (v, &interior) in mesh.interior_vertex.iter().enumerate() {
            assert_eq!(d.hat_u_dof(v).is_some(), interior);
        }
        let corner = d.local_layout(&mesh, 0);
        assert!(corner.hat_u_vertices.len() < 3);
        assert_eq!(corner.len(), 1 + 2 + corner.hat_u_vertices.len() + 3);
    }

    #[test]
    fn invalid_degree() {
        assert!(TrialConfig::new(2).is_err());
        assert_eq!(TrialConfig::new(1).unwrap().u_dofs_per_element(), 3);
    }
}
