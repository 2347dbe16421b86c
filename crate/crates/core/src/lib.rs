//! Backward-Euler time stepping with a discontinuous Petrov–Galerkin (DPG)
//! discretization of the heat equation on the unit square.
//!
//! Every time step solves a reaction–diffusion problem in its ultra-weak form
//! with trial unknowns `(u, σ, û, σ̂)`: piecewise constant (or linear) `u`,
//! piecewise constant `σ = ∇u`, a continuous piecewise linear trace `û` on the
//! skeleton and a piecewise constant normal flux `σ̂`. Optimal test functions
//! are computed element by element in an enriched broken test space
//! (`P2` for `v`, `[P3]²` for `τ`), which turns each step into a sparse SPD
//! system of normal equations.
//!
//! Module map:
//!
//! * [`mesh`]: uniform triangulations of `(0,1)²` and the time grid.
//! * [`fe`]: quadrature, local bases, dof numbering and trace lifts.
//! * [`assembly`]: Gram/trial-to-test/load matrices, condensation, solve, energy norms.
//! * [`exact`]: manufactured solutions.
//! * [`stepper`]: initial projection and the time loop.
//! * [`analysis`]: error quantities, stability ratio, rates.
//! * [`cli`]: convergence and stability drivers with CSV output.

pub mod analysis;
pub mod assembly;
pub mod cli;
mod error;
pub mod exact;
pub mod fe;
pub mod mesh;
pub mod parallel;
pub mod stepper;

pub use error::{DpgError, Result};
