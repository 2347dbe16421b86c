//! Element matrices of the ultra-weak reaction–diffusion form and the
//! condensed (normal-equation) global system.
//!
//! For a time step `k` and test pair `(v, τ)` on element `K`:
//!
//! ```text
//! ‖(v,τ)‖²_Y = k⁻²(v,v) + k⁻¹(∇v,∇v) + k⁻¹(τ,τ) + (div τ, div τ)
//! b_e(w; v,τ) = k⁻¹(u,v) + (u, div τ) + (σ, ∇v + τ) − ⟨û, τ·n⟩ − ⟨σ̂, v⟩
//! L_e(v)      = (f + k⁻¹ u_prev, v)
//! ```
//!
//! With `G_K` the Gram matrix of the enriched test space, `B_K` the matrix of
//! `b_e` and `l_K` the load vector, the optimal test functions of the trial
//! basis are `G_K⁻¹ B_K` and the DPG system is `Σ B_Kᵀ G_K⁻¹ B_K x = Σ B_Kᵀ G_K⁻¹ l_K`.

use faer::linalg::solvers::Solve;
use faer::sparse::linalg::solvers::Llt;
use faer::sparse::{SparseColMat, Triplet};
use faer::{Mat, Side};
use nalgebra::{Cholesky, DMatrix, DVector, Dyn};

use crate::fe::basis::{TestBasis, SCALAR_TEST_DIM, TEST_DIM, VECTOR_TEST_DIM};
use crate::fe::dofmap::{DofMap, LocalLayout};
use crate::fe::quadrature::{edge_rule, triangle_rule, EdgeRule, TriangleRule};
use crate::fe::test_basis_tables;
use crate::mesh::{Mesh, Point, Triangle, LOCAL_EDGES};
use crate::parallel::Parallelism;
use crate::{DpgError, Result};

/// Exactness of the element rule for Gram and trial-to-test matrices (`τ·τ` has degree 6).
pub const MATRIX_RULE_DEGREE: usize = 7;
/// Exactness of the edge rule (`λ·τ·n` has degree 4).
pub const EDGE_RULE_DEGREE: usize = 5;
/// Exactness of the rule for integrals of non-polynomial data.
pub const DATA_RULE_DEGREE: usize = 10;
/// Target relative residual of the global solve.
pub const SOLVE_TOLERANCE: f64 = 1e-12;
const MAX_REFINEMENTS: usize = 4;

const V: usize = SCALAR_TEST_DIM;

/// The `k`-independent pieces of the element Gram matrix.
#[derive(Debug, Clone)]
pub struct GramBlocks {
    pub mass_v: DMatrix<f64>,
    pub stiffness_v: DMatrix<f64>,
    pub mass_tau: DMatrix<f64>,
    pub div_tau: DMatrix<f64>,
}

impl GramBlocks {
    pub fn compute(tri: &Triangle) -> Result<Self> {
        let rule = triangle_rule(MATRIX_RULE_DEGREE)?;
        let tables = test_basis_tables(tri, &rule)?;
        let mut blocks = GramBlocks {
            mass_v: DMatrix::zeros(V, V),
            stiffness_v: DMatrix::zeros(V, V),
            mass_tau: DMatrix::zeros(VECTOR_TEST_DIM, VECTOR_TEST_DIM),
            div_tau: DMatrix::zeros(VECTOR_TEST_DIM, VECTOR_TEST_DIM),
        };
        for q in 0..tables.points.len() {
            let w = tables.weights[q];
            let (v, g) = (&tables.v[q], &tables.grad_v[q]);
            for i in 0..V {
                for j in i..V {
                    blocks.mass_v[(i, j)] += w * v[i] * v[j];
                    blocks.stiffness_v[(i, j)] += w * (g[i][0] * g[j][0] + g[i][1] * g[j][1]);
                }
            }
            let (tau, div) = (&tables.tau[q], &tables.div_tau[q]);
            for i in 0..VECTOR_TEST_DIM {
                for j in i..VECTOR_TEST_DIM {
                    blocks.mass_tau[(i, j)] += w * (tau[i][0] * tau[j][0] + tau[i][1] * tau[j][1]);
                    blocks.div_tau[(i, j)] += w * div[i] * div[j];
                }
            }
        }
        for m in [
            &mut blocks.mass_v,
            &mut blocks.stiffness_v,
            &mut blocks.mass_tau,
            &mut blocks.div_tau,
        ] {
            m.fill_lower_triangle_with_upper_triangle();
        }
        Ok(blocks)
    }

    /// `G_K(k)`, block diagonal in the scalar and vector test functions.
    pub fn gram(&self, k: f64) -> DMatrix<f64> {
        let mut g = DMatrix::zeros(TEST_DIM, TEST_DIM);
        g.view_mut((0, 0), (V, V))
            .copy_from(&(&self.mass_v / (k * k) + &self.stiffness_v / k));
        g.view_mut((V, V), (VECTOR_TEST_DIM, VECTOR_TEST_DIM))
            .copy_from(&(&self.mass_tau / k + &self.div_tau));
        g
    }
}

fn check_step(k: f64) -> Result<()> {
    if k > 0.0 && k.is_finite() {
        Ok(())
    } else {
        Err(DpgError::InvalidConfig(format!("time step must be positive, got {k}")))
    }
}

/// Gram matrix of the test norm on one element.
pub fn local_gram(tri: &Triangle, k: f64) -> Result<DMatrix<f64>> {
    check_step(k)?;
    Ok(GramBlocks::compute(tri)?.gram(k))
}

/// Matrix of `b_e` with rows indexed by test functions and columns by `layout`.
///
/// `edge_signs[i]` is `+1` when the outward normal of local edge `i` is the
/// canonical normal the global `σ̂` coefficient refers to.
pub fn local_b(tri: &Triangle, edge_signs: [i8; 3], k: f64, layout: &LocalLayout) -> Result<DMatrix<f64>> {
    check_step(k)?;
    let expected = layout.n_u + LocalLayout::N_SIGMA + layout.hat_u_vertices.len() + 3;
    if layout.dofs.len() != expected || layout.n_u == 0 || layout.n_u > 3 {
        return Err(DpgError::DimensionMismatch {
            what: "local trial layout",
            expected,
            got: layout.dofs.len(),
        });
    }
    if layout.hat_u_vertices.iter().any(|&a| a > 2) {
        return Err(DpgError::InvalidConfig("local vertex index out of range".into()));
    }
    let basis = TestBasis::new(tri)?;
    let rule = triangle_rule(MATRIX_RULE_DEGREE)?;
    let edges = edge_rule(EDGE_RULE_DEGREE)?;
    Ok(fill_local_b(tri, &basis, &rule, &edges, edge_signs, k, layout))
}

fn fill_local_b(
    tri: &Triangle,
    basis: &TestBasis,
    rule: &TriangleRule,
    edges: &EdgeRule,
    edge_signs: [i8; 3],
    k: f64,
    layout: &LocalLayout,
) -> DMatrix<f64> {
    let mut b = DMatrix::zeros(TEST_DIM, layout.len());
    let n_u = layout.n_u;
    let sigma = layout.sigma_col();

    for (p, w) in rule.on(tri) {
        let (v, grad_v) = basis.scalar(p);
        let (tau, div_tau) = basis.vector(p);
        let (phi, _) = basis.trial_u(n_u, p);
        for (i, &phi_i) in phi.iter().take(n_u).enumerate() {
            for r in 0..V {
                b[(r, i)] += w * phi_i * v[r] / k;
            }
            for j in 0..VECTOR_TEST_DIM {
                b[(V + j, i)] += w * phi_i * div_tau[j];
            }
        }
        for c in 0..2 {
            for r in 0..V {
                b[(r, sigma + c)] += w * grad_v[r][c];
            }
            for j in 0..VECTOR_TEST_DIM {
                b[(V + j, sigma + c)] += w * tau[j][c];
            }
        }
    }

    let hat_u = layout.hat_u_col();
    let hat_sigma = layout.hat_sigma_col();
    for (i, [a, bv]) in LOCAL_EDGES.iter().enumerate() {
        let [p, q] = tri.edge_endpoints(i);
        let n = tri.outward_normal(i);
        let sign = edge_signs[i] as f64;
        for (x, w, s) in edges.on_segment(p, q) {
            let (v, _) = basis.scalar(x);
            let (tau, _) = basis.vector(x);
            for r in 0..V {
                b[(r, hat_sigma + i)] -= w * sign * v[r];
            }
            for (col, &vertex) in layout.hat_u_vertices.iter().enumerate() {
                let lambda = if vertex == *a {
                    1.0 - s
                } else if vertex == *bv {
                    s
                } else {
                    continue;
                };
                for j in 0..VECTOR_TEST_DIM {
                    b[(V + j, hat_u + col)] -= w * lambda * (tau[j][0] * n[0] + tau[j][1] * n[1]);
                }
            }
        }
    }
    b
}

/// Load vector `(f + u_prev/k, v)` on one element; `τ` rows are zero.
///
/// `u_prev` holds the element's coefficients in the trial `u` basis.
pub fn local_load(tri: &Triangle, k: f64, f: &dyn Fn(Point) -> f64, u_prev: &[f64]) -> Result<DVector<f64>> {
    check_step(k)?;
    let basis = TestBasis::new(tri)?;
    let rule = triangle_rule(DATA_RULE_DEGREE)?;
    Ok(fill_local_load(tri, &basis, &rule, k, f, u_prev))
}

fn fill_local_load(
    tri: &Triangle,
    basis: &TestBasis,
    rule: &TriangleRule,
    k: f64,
    f: &dyn Fn(Point) -> f64,
    u_prev: &[f64],
) -> DVector<f64> {
    let mut l = DVector::zeros(TEST_DIM);
    for (p, w) in rule.on(tri) {
        let (phi, _) = basis.trial_u(u_prev.len(), p);
        let prev: f64 = u_prev.iter().zip(phi).map(|(c, b)| c * b).sum();
        let data = f(p) + prev / k;
        let (v, _) = basis.scalar(p);
        for r in 0..V {
            l[r] += w * data * v[r];
        }
    }
    l
}

/// Gram matrix, trial-to-test matrix and load of one element.
#[derive(Debug, Clone)]
pub struct LocalSystem {
    pub gram: DMatrix<f64>,
    pub b: DMatrix<f64>,
    pub load: DVector<f64>,
}

fn cholesky(gram: DMatrix<f64>) -> Result<Cholesky<f64, Dyn>> {
    Cholesky::new(gram).ok_or_else(|| DpgError::NotPositiveDefinite("element Gram matrix".into()))
}

/// `(B_Kᵀ G_K⁻¹ B_K, B_Kᵀ G_K⁻¹ l_K)`, formed as `ZᵀZ` with `Z = L⁻¹B` so the result is exactly symmetric.
pub fn condense(system: &LocalSystem) -> Result<(DMatrix<f64>, DVector<f64>)> {
    let l = cholesky(system.gram.clone())?.l();
    let z = solve_lower(&l, &system.b);
    let y = solve_lower(&l, &DMatrix::from_column_slice(TEST_DIM, 1, system.load.as_slice()));
    Ok((z.tr_mul(&z), DVector::from_column_slice((z.tr_mul(&y)).as_slice())))
}

fn solve_lower(l: &DMatrix<f64>, rhs: &DMatrix<f64>) -> DMatrix<f64> {
    l.solve_lower_triangular(rhs)
        .expect("Cholesky factor has a positive diagonal")
}

/// Per-element data of the DPG operator for one mesh and time step.
#[derive(Debug, Clone)]
pub struct ElementSystem {
    pub layout: LocalLayout,
    pub triangle: Triangle,
    pub basis: TestBasis,
    pub gram: DMatrix<f64>,
    pub b: DMatrix<f64>,
    /// Lower Cholesky factor of the Gram matrix.
    pub gram_factor: DMatrix<f64>,
    /// `L⁻¹B`.
    pub whitened_b: DMatrix<f64>,
    /// `BᵀG⁻¹B`.
    pub condensed: DMatrix<f64>,
}

impl ElementSystem {
    fn gather(&self, x: &[f64]) -> DVector<f64> {
        DVector::from_iterator(self.layout.len(), self.layout.dofs.iter().map(|&d| x[d]))
    }

    /// `L⁻¹ r` for a test-space functional `r`.
    pub fn whiten(&self, r: &DVector<f64>) -> DVector<f64> {
        let m = solve_lower(
            &self.gram_factor,
            &DMatrix::from_column_slice(TEST_DIM, 1, r.as_slice()),
        );
        DVector::from_column_slice(m.as_slice())
    }

    /// `B_K x_K`: the functional `b_e(x, ·)` on this element's test space.
    pub fn apply_b(&self, x: &[f64]) -> DVector<f64> {
        &self.b * self.gather(x)
    }

    /// Coefficients of the optimal test function `G⁻¹B x_K`.
    pub fn optimal_test(&self, x: &[f64]) -> DVector<f64> {
        let y = self.whiten(&self.apply_b(x));
        self.gram_factor
            .transpose()
            .solve_upper_triangular(&y)
            .expect("Cholesky factor has a positive diagonal")
    }
}

/// Element systems of a whole mesh for a fixed step size.
#[derive(Debug, Clone)]
pub struct LocalSystems {
    pub k: f64,
    pub num_dofs: usize,
    pub n_u: usize,
    pub elements: Vec<ElementSystem>,
}

impl LocalSystems {
    pub fn new(mesh: &Mesh, dofmap: &DofMap, k: f64, parallelism: Parallelism) -> Result<Self> {
        check_step(k)?;
        let rule = triangle_rule(MATRIX_RULE_DEGREE)?;
        let edges = edge_rule(EDGE_RULE_DEGREE)?;
        let elements = parallelism.try_map_indexed(mesh.num_triangles(), |t| {
            let triangle = mesh.triangle(t);
            let degenerate = |_| DpgError::DegenerateElement {
                element: t,
                area: triangle.signed_area(),
            };
            let basis = TestBasis::new(&triangle).map_err(degenerate)?;
            let layout = dofmap.local_layout(mesh, t);
            let signs = mesh.edge_of_triangle[t].map(|r| r.sign);
            let gram = GramBlocks::compute(&triangle).map_err(degenerate)?.gram(k);
            let b = fill_local_b(&triangle, &basis, &rule, &edges, signs, k, &layout);
            let gram_factor = Cholesky::new(gram.clone())
                .ok_or_else(|| DpgError::NotPositiveDefinite(format!("Gram matrix of element {t}")))?
                .l();
            let whitened_b = solve_lower(&gram_factor, &b);
            let condensed = whitened_b.tr_mul(&whitened_b);
            Ok::<_, DpgError>(ElementSystem {
                layout,
                triangle,
                basis,
                gram,
                b,
                gram_factor,
                whitened_b,
                condensed,
            })
        })?;
        Ok(Self {
            k,
            num_dofs: dofmap.total(),
            n_u: dofmap.config.u_dofs_per_element(),
            elements,
        })
    }

    /// Element load vectors for data `f` (already at the new time) and previous `u` coefficients.
    ///
    /// `u_prev` is the `u` block of the previous state (`n_u` values per element).
    pub fn loads(
        &self,
        f: &(dyn Fn(Point) -> f64 + Sync),
        u_prev: &[f64],
        parallelism: Parallelism,
    ) -> Result<Vec<DVector<f64>>> {
        let expected = self.n_u * self.elements.len();
        if u_prev.len() != expected {
            return Err(DpgError::DimensionMismatch {
                what: "previous u coefficients",
                expected,
                got: u_prev.len(),
            });
        }
        let rule = triangle_rule(DATA_RULE_DEGREE)?;
        Ok(parallelism.map_indexed(self.elements.len(), |t| {
            let e = &self.elements[t];
            let prev = &u_prev[t * self.n_u..(t + 1) * self.n_u];
            fill_local_load(&e.triangle, &e.basis, &rule, self.k, f, prev)
        }))
    }

    /// `Σ_K B_Kᵀ G_K⁻¹ l_K`.
    pub fn rhs(&self, loads: &[DVector<f64>]) -> Vec<f64> {
        let mut rhs = vec![0.0; self.num_dofs];
        for (e, l) in self.elements.iter().zip(loads) {
            let local = e.whitened_b.tr_mul(&e.whiten(l));
            for (&d, v) in e.layout.dofs.iter().zip(local.iter()) {
                rhs[d] += v;
            }
        }
        rhs
    }

    /// `S x` with `S = Σ_K B_Kᵀ G_K⁻¹ B_K`.
    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; self.num_dofs];
        for e in &self.elements {
            let local = &e.condensed * e.gather(x);
            for (&d, v) in e.layout.dofs.iter().zip(local.iter()) {
                y[d] += v;
            }
        }
        y
    }

    /// Squared dual norm `Σ_K r_Kᵀ G_K⁻¹ r_K` of element functionals.
    pub fn dual_norm_squared(&self, functionals: &[DVector<f64>]) -> f64 {
        self.elements
            .iter()
            .zip(functionals)
            .map(|(e, r)| e.whiten(r).norm_squared())
            .sum()
    }

    /// Gram-weighted residual `Σ_K (l_K − B_K x)ᵀ G_K⁻¹ (l_K − B_K x)`.
    pub fn residual(&self, x: &[f64], loads: &[DVector<f64>]) -> f64 {
        let r: Vec<DVector<f64>> = self.elements.iter().zip(loads).map(|(e, l)| l - e.apply_b(x)).collect();
        self.dual_norm_squared(&r)
    }

    /// Energy norm `(Σ_K (B_K w)ᵀ G_K⁻¹ (B_K w))^{1/2}` in the enriched test space.
    pub fn energy_norm(&self, w: &[f64]) -> f64 {
        self.elements
            .iter()
            .map(|e| (&e.whitened_b * e.gather(w)).norm_squared())
            .sum::<f64>()
            .sqrt()
    }

    pub fn assemble(&self) -> Result<GlobalSystem> {
        GlobalSystem::assemble(self)
    }
}

/// Factorized condensed system.
pub struct GlobalSystem {
    pub matrix: SparseColMat<usize, f64>,
    factor: Llt<usize, f64>,
}

impl std::fmt::Debug for GlobalSystem {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("GlobalSystem")
            .field("nrows", &self.matrix.nrows())
            .field("nnz", &self.matrix.compute_nnz())
            .finish()
    }
}

impl GlobalSystem {
    pub fn assemble(locals: &LocalSystems) -> Result<Self> {
        let n = locals.num_dofs;
        let mut triplets = Vec::with_capacity(locals.elements.iter().map(|e| e.layout.len().pow(2)).sum());
        for e in &locals.elements {
            for (i, &di) in e.layout.dofs.iter().enumerate() {
                for (j, &dj) in e.layout.dofs.iter().enumerate() {
                    triplets.push(Triplet::new(di, dj, e.condensed[(i, j)]));
                }
            }
        }
        let matrix = SparseColMat::<usize, f64>::try_new_from_triplets(n, n, &triplets)
            .map_err(|e| DpgError::Solver(format!("sparse assembly: {e:?}")))?;
        let factor = matrix
            .sp_cholesky(Side::Lower)
            .map_err(|e| DpgError::NotPositiveDefinite(format!("global DPG system: {e:?}")))?;
        Ok(Self { matrix, factor })
    }

    fn solve_once(&self, rhs: &[f64]) -> Vec<f64> {
        let b = Mat::from_fn(rhs.len(), 1, |i, _| rhs[i]);
        let x = self.factor.solve(&b);
        (0..rhs.len()).map(|i| x[(i, 0)]).collect()
    }

    /// Direct solve followed by iterative refinement while the residual keeps shrinking.
    ///
    /// Fails if the relative residual stays above [`SOLVE_TOLERANCE`].
    pub fn solve(&self, locals: &LocalSystems, rhs: &[f64]) -> Result<Vec<f64>> {
        let norm = |v: &[f64]| v.iter().map(|x| x * x).sum::<f64>().sqrt();
        let rhs_norm = norm(rhs);
        let mut x = self.solve_once(rhs);
        if rhs_norm == 0.0 {
            return Ok(x);
        }
        let residual = |x: &[f64]| -> Vec<f64> {
            let ax = locals.apply(x);
            rhs.iter().zip(&ax).map(|(b, a)| b - a).collect()
        };
        let mut r = residual(&x);
        let mut rel = norm(&r) / rhs_norm;
        for _ in 0..MAX_REFINEMENTS {
            if !rel.is_finite() || rel <= f64::EPSILON {
                break;
            }
            let dx = self.solve_once(&r);
            let candidate: Vec<f64> = x.iter().zip(&dx).map(|(x, d)| x + d).collect();
            let r_new = residual(&candidate);
            let rel_new = norm(&r_new) / rhs_norm;
            if rel_new.partial_cmp(&rel) != Some(std::cmp::Ordering::Less) {
                break;
            }
            (x, r, rel) = (candidate, r_new, rel_new);
        }
        if rel <= SOLVE_TOLERANCE {
            Ok(x)
        } else {
            Err(DpgError::Solver(format!(
                "relative residual {rel:e} above tolerance {SOLVE_TOLERANCE:e}"
            )))
        }
    }
}

/// Build, factor and solve one DPG step.
pub fn assemble_and_solve(
    mesh: &Mesh,
    dofmap: &DofMap,
    k: f64,
    f: &(dyn Fn(Point) -> f64 + Sync),
    u_prev: &[f64],
    parallelism: Parallelism,
) -> Result<Vec<f64>> {
    let locals = LocalSystems::new(mesh, dofmap, k, parallelism)?;
    let global = locals.assemble()?;
    let loads = locals.loads(f, u_prev, parallelism)?;
    global.solve(&locals, &locals.rhs(&loads))
}

/// Energy norm of a discrete trial vector; see [`LocalSystems::energy_norm`].
pub fn energy_norm(mesh: &Mesh, dofmap: &DofMap, k: f64, w: &[f64]) -> Result<f64> {
    if w.len() != dofmap.total() {
        return Err(DpgError::DimensionMismatch {
            what: "trial vector",
            expected: dofmap.total(),
            got: w.len(),
        });
    }
    Ok(LocalSystems::new(mesh, dofmap, k, Parallelism::available())?.energy_norm(w))
}

/// Broken test norm `‖(v,τ)‖²_Y` of arbitrary fields, by element quadrature.
pub struct TestPair<'a> {
    pub v: &'a dyn Fn(Point) -> f64,
    pub grad_v: &'a dyn Fn(Point) -> Point,
    pub tau: &'a dyn Fn(Point) -> Point,
    pub div_tau: &'a dyn Fn(Point) -> f64,
}

pub fn test_norm_squared(mesh: &Mesh, k: f64, pair: &TestPair<'_>) -> Result<f64> {
    check_step(k)?;
    let rule = triangle_rule(crate::fe::quadrature::MAX_RULE_DEGREE)?;
    let mut total = 0.0;
    for t in 0..mesh.num_triangles() {
        for (p, w) in rule.on(&mesh.triangle(t)) {
            let v = (pair.v)(p);
            let g = (pair.grad_v)(p);
            let tau = (pair.tau)(p);
            let d = (pair.div_tau)(p);
            total += w
                * (v * v / (k * k) + (g[0] * g[0] + g[1] * g[1]) / k + (tau[0] * tau[0] + tau[1] * tau[1]) / k + d * d);
        }
    }
    Ok(total)
}
