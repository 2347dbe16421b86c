//! Initial projection and the backward-Euler time loop.

use nalgebra::{Matrix3, Vector3};

use crate::assembly::{GlobalSystem, LocalSystems, DATA_RULE_DEGREE};
use crate::exact::ExactSolution;
use crate::fe::basis::TestBasis;
use crate::fe::dofmap::{build_dof_map, DofMap, TrialConfig};
use crate::fe::quadrature::{triangle_rule, TriangleRule};
use crate::mesh::{build_uniform_mesh, Mesh, Point, TimeGrid};
use crate::parallel::Parallelism;
use crate::{DpgError, Result};

/// Discrete solution at time `t = n·k`.
#[derive(Debug, Clone, PartialEq)]
pub struct StepState {
    pub n: usize,
    pub t: f64,
    /// All trial blocks in [`DofMap`] order.
    pub coefficients: Vec<f64>,
}

impl StepState {
    /// State at `t = 0` carrying only the projected initial datum.
    pub fn initial(dofmap: &DofMap, u0h: &[f64]) -> Result<Self> {
        if u0h.len() != dofmap.num_u() {
            return Err(DpgError::DimensionMismatch {
                what: "initial u coefficients",
                expected: dofmap.num_u(),
                got: u0h.len(),
            });
        }
        let mut coefficients = vec![0.0; dofmap.total()];
        coefficients[dofmap.u_range()].copy_from_slice(u0h);
        Ok(Self {
            n: 0,
            t: 0.0,
            coefficients,
        })
    }

    pub fn u<'a>(&'a self, dofmap: &DofMap) -> &'a [f64] {
        &self.coefficients[dofmap.u_range()]
    }

    pub fn sigma<'a>(&'a self, dofmap: &DofMap) -> &'a [f64] {
        &self.coefficients[dofmap.sigma_range()]
    }

    pub fn hat_u<'a>(&'a self, dofmap: &DofMap) -> &'a [f64] {
        &self.coefficients[dofmap.hat_u_range()]
    }

    pub fn hat_sigma<'a>(&'a self, dofmap: &DofMap) -> &'a [f64] {
        &self.coefficients[dofmap.hat_sigma_range()]
    }
}

/// Value of the discrete `u` on element `t` at `p`.
pub fn eval_u(basis: &TestBasis, coefficients: &[f64], p: Point) -> f64 {
    let (phi, _) = basis.trial_u(coefficients.len(), p);
    coefficients.iter().zip(phi).map(|(c, b)| c * b).sum()
}

pub(crate) fn element_bases(mesh: &Mesh) -> Result<Vec<TestBasis>> {
    (0..mesh.num_triangles())
        .map(|t| {
            let tri = mesh.triangle(t);
            TestBasis::new(&tri).map_err(|_| DpgError::DegenerateElement {
                element: t,
                area: tri.signed_area(),
            })
        })
        .collect()
}

/// `Σ_K ∫_K g_K` with one closure call per element, summed in element order.
pub(crate) fn integrate_elements(
    mesh: &Mesh,
    parallelism: Parallelism,
    g: impl Fn(usize, &TriangleRule) -> f64 + Sync + Send,
) -> Result<f64> {
    let rule = triangle_rule(DATA_RULE_DEGREE)?;
    Ok(parallelism
        .map_indexed(mesh.num_triangles(), |t| g(t, &rule))
        .iter()
        .sum())
}

/// `‖g‖` over the domain.
pub fn l2_norm(mesh: &Mesh, g: &(dyn Fn(Point) -> f64 + Sync), parallelism: Parallelism) -> Result<f64> {
    let sq = integrate_elements(mesh, parallelism, |t, rule| {
        rule.on(&mesh.triangle(t)).map(|(p, w)| w * g(p).powi(2)).sum()
    })?;
    Ok(sq.sqrt())
}

/// `L²` projection of `u₀` onto the discrete `u` space.
///
/// Piecewise constants get the element mean; piecewise linears the local
/// best fit from a 3×3 mass system.
pub fn project_initial(
    mesh: &Mesh,
    dofmap: &DofMap,
    u0: &(dyn Fn(Point) -> f64 + Sync),
    parallelism: Parallelism,
) -> Result<Vec<f64>> {
    let rule = triangle_rule(DATA_RULE_DEGREE)?;
    let bases = element_bases(mesh)?;
    let n_u = dofmap.config.u_dofs_per_element();
    let local = parallelism.try_map_indexed(mesh.num_triangles(), |t| {
        let tri = mesh.triangle(t);
        let mut mass = Matrix3::zeros();
        let mut rhs = Vector3::zeros();
        for (p, w) in rule.on(&tri) {
            let (phi, _) = bases[t].trial_u(n_u, p);
            let value = u0(p);
            for i in 0..n_u {
                rhs[i] += w * value * phi[i];
                for j in 0..n_u {
                    mass[(i, j)] += w * phi[i] * phi[j];
                }
            }
        }
        let mass = mass.view((0, 0), (n_u, n_u)).into_owned();
        let rhs = rhs.rows(0, n_u).into_owned();
        let chol = mass
            .cholesky()
            .ok_or_else(|| DpgError::NotPositiveDefinite(format!("mass matrix of element {t}")))?;
        Ok::<_, DpgError>(chol.solve(&rhs).iter().copied().collect::<Vec<_>>())
    })?;
    Ok(local.concat())
}

/// `(‖u_h‖, ‖σ_h‖)` of a state.
pub fn field_norms(mesh: &Mesh, dofmap: &DofMap, state: &StepState, parallelism: Parallelism) -> Result<(f64, f64)> {
    let bases = element_bases(mesh)?;
    let n_u = dofmap.config.u_dofs_per_element();
    let u = state.u(dofmap);
    let sigma = state.sigma(dofmap);
    let u_sq = integrate_elements(mesh, parallelism, |t, rule| {
        let c = &u[t * n_u..(t + 1) * n_u];
        rule.on(&mesh.triangle(t))
            .map(|(p, w)| w * eval_u(&bases[t], c, p).powi(2))
            .sum()
    })?;
    let sigma_sq: f64 = (0..mesh.num_triangles())
        .map(|t| mesh.triangle(t).area() * (sigma[2 * t].powi(2) + sigma[2 * t + 1].powi(2)))
        .sum();
    Ok((u_sq.sqrt(), sigma_sq.sqrt()))
}

/// Mesh, dofs and the factorized step operator for a fixed `k`.
///
/// The condensed matrix depends only on the mesh and `k`, so it is factored
/// once and reused by every step.
#[derive(Debug)]
pub struct Stepper {
    pub mesh: Mesh,
    pub dofmap: DofMap,
    pub grid: TimeGrid,
    pub locals: LocalSystems,
    global: GlobalSystem,
    parallelism: Parallelism,
}

impl Stepper {
    pub fn new(mesh: Mesh, trial: TrialConfig, grid: TimeGrid, parallelism: Parallelism) -> Result<Self> {
        let dofmap = build_dof_map(&mesh, trial);
        let locals = LocalSystems::new(&mesh, &dofmap, grid.step_size, parallelism)?;
        let global = locals.assemble()?;
        Ok(Self {
            mesh,
            dofmap,
            grid,
            locals,
            global,
            parallelism,
        })
    }

    pub fn k(&self) -> f64 {
        self.grid.step_size
    }

    pub fn initial_state(&self, exact: &dyn ExactSolution) -> Result<StepState> {
        let u0h = project_initial(&self.mesh, &self.dofmap, &|p| exact.u0(p), self.parallelism)?;
        StepState::initial(&self.dofmap, &u0h)
    }

    /// One backward-Euler step with `f` taken at the new time.
    pub fn step(&self, prev: &StepState, exact: &dyn ExactSolution) -> Result<StepState> {
        let n = prev.n + 1;
        let t = self.grid.time(n);
        let f = |p: Point| exact.f(p, t);
        let loads = self.locals.loads(&f, prev.u(&self.dofmap), self.parallelism)?;
        let coefficients = self.global.solve(&self.locals, &self.locals.rhs(&loads))?;
        Ok(StepState { n, t, coefficients })
    }
}

/// Run parameters.
#[derive(Debug, Clone, Copy)]
pub struct RunConfig {
    /// Subdivisions per side of the unit square.
    pub n: usize,
    pub grid: TimeGrid,
    pub trial: TrialConfig,
    pub parallelism: Parallelism,
}

/// Per-step stability bookkeeping.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepDiagnostics {
    pub n: usize,
    pub t: f64,
    pub u_norm: f64,
    pub sigma_norm: f64,
    pub f_norm: f64,
    /// `(‖uⁿ_h‖² + k‖σⁿ_h‖²)^{1/2}`.
    pub energy: f64,
    /// `‖uⁿ⁻¹_h‖ + k‖fⁿ‖`.
    pub step_bound: f64,
    /// `‖u₀‖ + k Σ_{m≤n} ‖fᵐ‖`.
    pub cumulative_bound: f64,
}

fn ratio(num: f64, den: f64) -> f64 {
    if num == 0.0 {
        0.0
    } else {
        num / den
    }
}

impl StepDiagnostics {
    pub fn step_ratio(&self) -> f64 {
        ratio(self.energy, self.step_bound)
    }

    pub fn cumulative_ratio(&self) -> f64 {
        ratio(self.energy, self.cumulative_bound)
    }
}

#[derive(Debug)]
pub struct RunOutput {
    pub config: RunConfig,
    pub stepper: Stepper,
    pub initial: StepState,
    pub final_state: StepState,
    pub u0_norm: f64,
    pub diagnostics: Vec<StepDiagnostics>,
}

impl RunOutput {
    /// Final stability ratio `(‖uᴺ_h‖² + k‖σᴺ_h‖²)^{1/2} / (‖u₀‖ + kΣ‖fⁿ‖)`.
    pub fn stability_ratio(&self) -> f64 {
        self.diagnostics.last().map_or(0.0, StepDiagnostics::cumulative_ratio)
    }
}

/// Project `u₀`, then take `N` steps. Only the final trace blocks are kept.
pub fn run(config: &RunConfig, exact: &dyn ExactSolution) -> Result<RunOutput> {
    let mesh = build_uniform_mesh(config.n)?;
    let stepper = Stepper::new(mesh, config.trial, config.grid, config.parallelism)?;
    let par = config.parallelism;
    let k = stepper.k();
    let u0_norm = l2_norm(&stepper.mesh, &|p| exact.u0(p), par)?;
    let initial = stepper.initial_state(exact)?;
    let (mut prev_u_norm, _) = field_norms(&stepper.mesh, &stepper.dofmap, &initial, par)?;
    let mut cumulative_bound = u0_norm;
    let mut state = initial.clone();
    let mut diagnostics = Vec::with_capacity(config.grid.steps);
    for _ in 0..config.grid.steps {
        state = stepper.step(&state, exact)?;
        let t = state.t;
        let f_norm = l2_norm(&stepper.mesh, &|p| exact.f(p, t), par)?;
        let (u_norm, sigma_norm) = field_norms(&stepper.mesh, &stepper.dofmap, &state, par)?;
        cumulative_bound += k * f_norm;
        diagnostics.push(StepDiagnostics {
            n: state.n,
            t,
            u_norm,
            sigma_norm,
            f_norm,
            energy: (u_norm.powi(2) + k * sigma_norm.powi(2)).sqrt(),
            step_bound: prev_u_norm + k * f_norm,
            cumulative_bound,
        });
        prev_u_norm = u_norm;
    }
    Ok(RunOutput {
        config: *config,
        stepper,
        initial,
        final_state: state,
        u0_norm,
        diagnostics,
    })
}
