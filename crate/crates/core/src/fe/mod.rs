//! Finite element machinery: quadrature rules, local trial and test bases,
//! global dof numbering and the lifts used to measure trace errors.

pub mod basis;
pub mod dofmap;
pub mod lift;
pub mod quadrature;

pub use basis::{test_basis_tables, TestBasis, TestTables, SCALAR_TEST_DIM, TEST_DIM, VECTOR_TEST_DIM};
pub use dofmap::{build_dof_map, DofMap, LocalLayout, TrialConfig};
pub use lift::{p1_lift, rt0_lift, P1Lift, Rt0Lift};
pub use quadrature::{edge_rule, triangle_rule, EdgeRule, TriangleRule};
