//! Error quantities at the final time, stability ratio, Céa constant and rates.
//!
//! Trace errors are measured through lifts: `û_h` by its continuous P1 lift
//! and `σ̂_h` by its lowest-order Raviart–Thomas lift. Both are computable
//! upper bounds for the weighted trace-norm errors.

use std::f64::consts::{PI, SQRT_2};

use nalgebra::DVector;

use crate::assembly::{LocalSystems, DATA_RULE_DEGREE};
use crate::exact::ExactSolution;
use crate::fe::basis::SCALAR_TEST_DIM;
use crate::fe::dofmap::DofMap;
use crate::fe::lift::{p1_lift, rt0_lift};
use crate::fe::quadrature::{triangle_rule, TriangleRule};
use crate::mesh::{mesh_size, Mesh};
use crate::parallel::Parallelism;
use crate::stepper::{element_bases, eval_u, integrate_elements, RunOutput, StepState};
use crate::{DpgError, Result};

/// Poincaré–Friedrichs constant of the unit square, `1/(π√2)`.
pub const POINCARE_FRIEDRICHS: f64 = 1.0 / (PI * SQRT_2);

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct ErrorReport {
    pub n: usize,
    pub h: f64,
    pub k: f64,
    pub steps: usize,
    pub dofs: usize,
    pub err_u: f64,
    pub err_sigma: f64,
    pub err_hat_u: f64,
    pub err_hat_sigma: f64,
    pub err_u0: f64,
    pub err_energy: f64,
    pub stability_ratio: f64,
    /// Root sum of squares of the four field and trace errors.
    pub x2_bound: f64,
    pub c_n: f64,
    pub runtime_s: f64,
}

impl ErrorReport {
    /// `err_u² + err_σ² ≤ err_energy²·(1 + tol)`.
    pub fn field_energy_bound_holds(&self, tol: f64) -> bool {
        self.err_u.powi(2) + self.err_sigma.powi(2) <= self.err_energy.powi(2) * (1.0 + tol)
    }

    /// `err_energy ≤ √3·x2_bound·(1 + tol)`.
    pub fn energy_x2_bound_holds(&self, tol: f64) -> bool {
        self.err_energy <= 3f64.sqrt() * self.x2_bound * (1.0 + tol)
    }
}

pub fn x2_bound(err_u: f64, err_sigma: f64, err_hat_u: f64, err_hat_sigma: f64) -> f64 {
    (err_u.powi(2) + err_sigma.powi(2) + err_hat_u.powi(2) + err_hat_sigma.powi(2)).sqrt()
}

/// `(‖u(T) − u_h‖, √k‖σ(T) − σ_h‖)`.
pub fn field_errors(
    mesh: &Mesh,
    dofmap: &DofMap,
    state: &StepState,
    exact: &dyn ExactSolution,
    k: f64,
    parallelism: Parallelism,
) -> Result<(f64, f64)> {
    let t_final = state.t;
    let n_u = dofmap.config.u_dofs_per_element();
    let u = state.u(dofmap);
    let sigma = state.sigma(dofmap);
    let bases = element_bases(mesh)?;
    let sq = integrate_pairs(mesh, parallelism, |t, rule| {
        let c = &u[t * n_u..(t + 1) * n_u];
        let s = [sigma[2 * t], sigma[2 * t + 1]];
        let mut acc = [0.0; 2];
        for (p, w) in rule.on(&mesh.triangle(t)) {
            let g = exact.grad_u(p, t_final);
            acc[0] += w * (exact.u(p, t_final) - eval_u(&bases[t], c, p)).powi(2);
            acc[1] += w * ((g[0] - s[0]).powi(2) + (g[1] - s[1]).powi(2));
        }
        acc
    })?;
    Ok((sq[0].sqrt(), (k * sq[1]).sqrt()))
}

/// Upper bounds for the trace errors via the P1 and RT0 lifts.
///
/// `err_hat_u = (‖u − ũ_h‖² + k‖∇u − ∇ũ_h‖²)^{1/2}` and
/// `err_hat_sigma = √k (‖σ − σ̃_h‖² + k‖div σ − div σ̃_h‖²)^{1/2}`.
pub fn trace_errors(
    mesh: &Mesh,
    dofmap: &DofMap,
    state: &StepState,
    exact: &dyn ExactSolution,
    k: f64,
    parallelism: Parallelism,
) -> Result<(f64, f64)> {
    let t_final = state.t;
    let hat_u = p1_lift(mesh, state.hat_u(dofmap))?;
    let hat_sigma = rt0_lift(mesh, state.hat_sigma(dofmap))?;
    let sq = integrate_quads(mesh, parallelism, |t, rule| {
        let grad_lift = hat_u.gradient(t);
        let div_lift = hat_sigma.divergence(t);
        let mut acc = [0.0; 4];
        for (p, w) in rule.on(&mesh.triangle(t)) {
            let g = exact.grad_u(p, t_final);
            let s = hat_sigma.value(t, p);
            acc[0] += w * (exact.u(p, t_final) - hat_u.value(t, p)).powi(2);
            acc[1] += w * ((g[0] - grad_lift[0]).powi(2) + (g[1] - grad_lift[1]).powi(2));
            acc[2] += w * ((g[0] - s[0]).powi(2) + (g[1] - s[1]).powi(2));
            acc[3] += w * (exact.div_sigma(p, t_final) - div_lift).powi(2);
        }
        acc
    })?;
    let err_hat_u = (sq[0] + k * sq[1]).sqrt();
    let err_hat_sigma = (k * (sq[2] + k * sq[3])).sqrt();
    Ok((err_hat_u, err_hat_sigma))
}

/// Energy-norm error in the enriched test space.
///
/// The exact solution satisfies `b(u(T), v) = (f(T) − u̇(T) + u(T)/k, v)`, so
/// the error functional is that load minus `b(u_h, v)`; its dual norm is
/// `(Σ_K r_Kᵀ G_K⁻¹ r_K)^{1/2}`.
pub fn energy_error(
    locals: &LocalSystems,
    state: &StepState,
    exact: &dyn ExactSolution,
    parallelism: Parallelism,
) -> Result<f64> {
    if state.coefficients.len() != locals.num_dofs {
        return Err(DpgError::DimensionMismatch {
            what: "state coefficients",
            expected: locals.num_dofs,
            got: state.coefficients.len(),
        });
    }
    let t_final = state.t;
    let k = locals.k;
    let rule = triangle_rule(DATA_RULE_DEGREE)?;
    let residuals = parallelism.map_indexed(locals.elements.len(), |t| {
        let e = &locals.elements[t];
        let mut r = DVector::zeros(e.b.nrows());
        for (p, w) in rule.on(&e.triangle) {
            let g = exact.f(p, t_final) - exact.dudt(p, t_final) + exact.u(p, t_final) / k;
            let (v, _) = e.basis.scalar(p);
            for i in 0..SCALAR_TEST_DIM {
                r[i] += w * g * v[i];
            }
        }
        r - e.apply_b(&state.coefficients)
    });
    Ok(locals.dual_norm_squared(&residuals).sqrt())
}

/// `‖u₀ − u⁰_h‖`.
pub fn initial_error(
    mesh: &Mesh,
    dofmap: &DofMap,
    initial: &StepState,
    exact: &dyn ExactSolution,
    parallelism: Parallelism,
) -> Result<f64> {
    let n_u = dofmap.config.u_dofs_per_element();
    let u = initial.u(dofmap);
    let bases = element_bases(mesh)?;
    let sq = integrate_elements(mesh, parallelism, |t, rule| {
        let c = &u[t * n_u..(t + 1) * n_u];
        rule.on(&mesh.triangle(t))
            .map(|(p, w)| w * (exact.u0(p) - eval_u(&bases[t], c, p)).powi(2))
            .sum()
    })?;
    Ok(sq.sqrt())
}

/// `(‖uᴺ_h‖² + k‖σᴺ_h‖²)^{1/2} / (‖u₀‖ + kΣ‖fⁿ‖)`.
pub fn stability_ratio(run: &RunOutput) -> f64 {
    run.stability_ratio()
}

/// `Cₙ = √2·max{1, (4C²_PF + 6k)^{1/2}}`.
pub fn cea_constant(k: f64) -> f64 {
    SQRT_2 * (4.0 * POINCARE_FRIEDRICHS.powi(2) + 6.0 * k).sqrt().max(1.0)
}

/// All error quantities of a finished run. `runtime_s` is left at zero.
pub fn evaluate(run: &RunOutput, exact: &dyn ExactSolution, parallelism: Parallelism) -> Result<ErrorReport> {
    let s = &run.stepper;
    let k = s.k();
    let (err_u, err_sigma) = field_errors(&s.mesh, &s.dofmap, &run.final_state, exact, k, parallelism)?;
    let (err_hat_u, err_hat_sigma) = trace_errors(&s.mesh, &s.dofmap, &run.final_state, exact, k, parallelism)?;
    Ok(ErrorReport {
        n: run.config.n,
        h: mesh_size(&s.mesh),
        k,
        steps: s.grid.steps,
        dofs: s.dofmap.total(),
        err_u,
        err_sigma,
        err_hat_u,
        err_hat_sigma,
        err_u0: initial_error(&s.mesh, &s.dofmap, &run.initial, exact, parallelism)?,
        err_energy: energy_error(&s.locals, &run.final_state, exact, parallelism)?,
        stability_ratio: run.stability_ratio(),
        x2_bound: x2_bound(err_u, err_sigma, err_hat_u, err_hat_sigma),
        c_n: cea_constant(k),
        runtime_s: 0.0,
    })
}

/// Least-squares slope of `log err` against `log h`, plus consecutive rates.
#[derive(Debug, Clone, PartialEq)]
pub struct RateFit {
    pub slope: f64,
    pub intercept: f64,
    /// `log(e_i/e_{i+1}) / log(h_i/h_{i+1})`.
    pub pairwise: Vec<f64>,
    /// False if some refinement increased the error.
    pub monotone: bool,
}

pub fn convergence_rates(h: &[f64], err: &[f64]) -> Result<RateFit> {
    if h.len() != err.len() {
        return Err(DpgError::DimensionMismatch {
            what: "error series",
            expected: h.len(),
            got: err.len(),
        });
    }
    if h.len() < 2 {
        return Err(DpgError::InvalidConfig("rate fit needs at least two levels".into()));
    }
    if h.iter().chain(err).any(|&x| !(x > 0.0 && x.is_finite())) {
        return Err(DpgError::InvalidConfig(
            "rate fit needs positive finite h and errors".into(),
        ));
    }
    let xs: Vec<f64> = h.iter().map(|x| x.ln()).collect();
    let ys: Vec<f64> = err.iter().map(|x| x.ln()).collect();
    let m = xs.len() as f64;
    let (mx, my) = (xs.iter().sum::<f64>() / m, ys.iter().sum::<f64>() / m);
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    if sxx == 0.0 {
        return Err(DpgError::InvalidConfig("rate fit needs distinct mesh sizes".into()));
    }
    let slope = sxy / sxx;
    let pairwise = xs
        .windows(2)
        .zip(ys.windows(2))
        .map(|(x, y)| (y[0] - y[1]) / (x[0] - x[1]))
        .collect();
    let mut order: Vec<usize> = (0..h.len()).collect();
    order.sort_by(|&a, &b| h[b].total_cmp(&h[a]));
    let monotone = order.windows(2).all(|w| err[w[1]] <= err[w[0]]);
    Ok(RateFit {
        slope,
        intercept: my - slope * mx,
        pairwise,
        monotone,
    })
}

fn integrate_pairs(
    mesh: &Mesh,
    parallelism: Parallelism,
    g: impl Fn(usize, &TriangleRule) -> [f64; 2] + Sync + Send,
) -> Result<[f64; 2]> {
    let q = integrate_quads(mesh, parallelism, |t, rule| {
        let [a, b] = g(t, rule);
        [a, b, 0.0, 0.0]
    })?;
    Ok([q[0], q[1]])
}

fn integrate_quads(
    mesh: &Mesh,
    parallelism: Parallelism,
    g: impl Fn(usize, &TriangleRule) -> [f64; 4] + Sync + Send,
) -> Result<[f64; 4]> {
    let rule = triangle_rule(DATA_RULE_DEGREE)?;
    let parts = parallelism.map_indexed(mesh.num_triangles(), |t| g(t, &rule));
    Ok(parts.iter().fold([0.0; 4], |mut acc, p| {
        for (a, x) in acc.iter_mut().zip(p) {
            *a += x;
        }
        acc
    }))
}
