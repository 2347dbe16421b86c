mod common;

use common::{max_abs_diff, oracle_b, oracle_gram, oracle_load, triangle_points};
use dpg_heat::assembly::{condense, local_b, local_gram, local_load, test_norm_squared, LocalSystem, TestPair};
use dpg_heat::fe::dofmap::{build_dof_map, TrialConfig};
use dpg_heat::mesh::{build_uniform_mesh, Point, Triangle};
use proptest::prelude::*;

const STEPS: [f64; 3] = [1e-4, 1e-2, 1.0];

fn scale(m: &nalgebra::DMatrix<f64>) -> f64 {
    m.iter().fold(0.0_f64, |a, x| a.max(x.abs()))
}

#[test]
fn common_gauss_legendre_is_exact() {
    // ∫₀¹ x^{2m−1} dx with m points.
    for m in 1..=12 {
        let rule = common::gauss_legendre(m);
        let deg = 2 * m - 1;
        let q: f64 = rule.iter().map(|(x, w)| w * x.powi(deg as i32)).sum();
        assert!((q - 1.0 / (deg as f64 + 1.0)).abs() < 1e-15, "m={m}");
    }
}

#[test]
fn local_matrices_match_oracle_on_mesh_elements() {
    let mesh = build_uniform_mesh(3).unwrap();
    for trial in [TrialConfig::piecewise_constant(), TrialConfig::piecewise_linear()] {
        let dofmap = build_dof_map(&mesh, trial);
        for t in 0..mesh.num_triangles() {
            let tri = mesh.triangle(t);
            let layout = dofmap.local_layout(&mesh, t);
            let signs = mesh.edge_of_triangle[t].map(|r| r.sign);
            for k in STEPS {
                let g = local_gram(&tri, k).unwrap();
                let go = oracle_gram(&tri, k);
                assert!(max_abs_diff(&g, &go) <= 1e-12 * scale(&go), "gram t={t} k={k}");
                let b = local_b(&tri, signs, k, &layout).unwrap();
                let bo = oracle_b(&tri, signs, k, layout.n_u, &layout.hat_u_vertices);
                assert!(max_abs_diff(&b, &bo) <= 1e-12 * scale(&bo), "B t={t} k={k}");
            }
        }
    }
}

#[test]
fn local_matrices_match_oracle_on_skewed_triangle() {
    let tri = Triangle::new([[0.1, 0.2], [0.9, 0.35], [0.3, 0.75]]);
    let dofmap_layout = dpg_heat::fe::dofmap::LocalLayout {
        dofs: (0..3 + 2 + 3 + 3).collect(),
        n_u: 3,
        hat_u_vertices: vec![0, 1, 2],
    };
    for signs in [[1, 1, 1], [-1, 1, -1]] {
        for k in STEPS {
            let b = local_b(&tri, signs, k, &dofmap_layout).unwrap();
            let bo = oracle_b(&tri, signs, k, 3, &[0, 1, 2]);
            assert!(max_abs_diff(&b, &bo) <= 1e-12 * scale(&bo));
        }
    }
}

#[test]
fn load_matches_oracle() {
    let tri = Triangle::new([[0.1, 0.2], [0.9, 0.35], [0.3, 0.75]]);
    let f = |p: Point| (3.0 * p[0]).sin() * p[1].exp();
    let k = 0.01;
    // u_prev = 2 (the constant trial function).
    let l = local_load(&tri, k, &f, &[2.0]).unwrap();
    let lo = oracle_load(&tri, |p| f(p) + 2.0 / k);
    let err = (l - &lo).amax();
    // The load quadrature is exact only for polynomial data.
    assert!(err <= 1e-10 * lo.amax(), "{err}");
}

#[test]
fn gram_is_spd_on_all_elements() {
    for n in [1, 2, 8] {
        let mesh = build_uniform_mesh(n).unwrap();
        for t in 0..mesh.num_triangles() {
            for k in STEPS {
                let g = local_gram(&mesh.triangle(t), k).unwrap();
                assert_eq!(g, g.transpose());
                let eig = g.clone().symmetric_eigen();
                assert!(eig.eigenvalues.min() > 0.0, "n={n} t={t} k={k}");
            }
        }
    }
}

#[test]
fn y_norm_identity_for_polynomial_pair() {
    // v ∈ H¹₀, τ polynomial: ‖(v,τ)‖²_Y = ‖v/k + div τ‖² + k⁻¹‖∇v + τ‖².
    let v = |p: Point| p[0] * (1.0 - p[0]) * p[1] * (1.0 - p[1]);
    let grad_v = |p: Point| {
        [
            (1.0 - 2.0 * p[0]) * p[1] * (1.0 - p[1]),
            p[0] * (1.0 - p[0]) * (1.0 - 2.0 * p[1]),
        ]
    };
    let tau = |p: Point| [p[0] * p[0] * p[1] + 0.5, p[1] - 2.0 * p[0] * p[1] * p[1]];
    let div_tau = |p: Point| 2.0 * p[0] * p[1] + 1.0 - 4.0 * p[0] * p[1];
    let pair = TestPair {
        v: &v,
        grad_v: &grad_v,
        tau: &tau,
        div_tau: &div_tau,
    };
    for n in [1, 4] {
        let mesh = build_uniform_mesh(n).unwrap();
        for k in STEPS {
            let lhs = test_norm_squared(&mesh, k, &pair).unwrap();
            let mut rhs = 0.0;
            for t in 0..mesh.num_triangles() {
                for (p, w) in triangle_points(&mesh.triangle(t), 10) {
                    let (g, f) = (
                        v(p) / k + div_tau(p),
                        [grad_v(p)[0] + tau(p)[0], grad_v(p)[1] + tau(p)[1]],
                    );
                    rhs += w * (g * g + (f[0] * f[0] + f[1] * f[1]) / k);
                }
            }
            assert!((lhs - rhs).abs() <= 1e-10 * rhs, "n={n} k={k}: {lhs} vs {rhs}");
        }
    }
}

fn triangle_strategy() -> impl Strategy<Value = Triangle> {
    (-1.0..1.0f64, -1.0..1.0f64, 0.05..2.0f64, 0.05..2.0f64, -1.0..1.0f64)
        .prop_map(|(x, y, a, b, shear)| Triangle::new([[x, y], [x + a, y], [x + shear * b, y + b]]))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn condensed_matrix_symmetric_psd(tri in triangle_strategy(), log_k in -4.0..0.0f64, flip in 0usize..8) {
        let k = 10f64.powf(log_k);
        let signs = [0, 1, 2].map(|i| if flip >> i & 1 == 1 { -1 } else { 1 });
        let layout = dpg_heat::fe::dofmap::LocalLayout {
            dofs: (0..1 + 2 + 2 + 3).collect(),
            n_u: 1,
            hat_u_vertices: vec![0, 2],
        };
        let system = LocalSystem {
            gram: local_gram(&tri, k).unwrap(),
            b: local_b(&tri, signs, k, &layout).unwrap(),
            load: nalgebra::DVector::from_element(26, 1.0),
        };
        let (a, _) = condense(&system).unwrap();
        prop_assert_eq!(&a, &a.transpose());
        let eig = a.symmetric_eigen();
        prop_assert!(eig.eigenvalues.min() >= -1e-9 * eig.eigenvalues.amax());
    }

    #[test]
    fn gram_spd_on_random_elements(tri in triangle_strategy(), log_k in -4.0..0.0f64) {
        let g = local_gram(&tri, 10f64.powf(log_k)).unwrap();
        prop_assert!(g.cholesky().is_some());
    }

    #[test]
    fn condensed_rhs_is_linear(tri in triangle_strategy(), a in -3.0..3.0f64, b in -3.0..3.0f64) {
        let k = 0.01;
        let layout = dpg_heat::fe::dofmap::LocalLayout {
            dofs: (0..1 + 2 + 3 + 3).collect(),
            n_u: 1,
            hat_u_vertices: vec![0, 1, 2],
        };
        let gram = local_gram(&tri, k).unwrap();
        let bm = local_b(&tri, [1, -1, 1], k, &layout).unwrap();
        let l1 = local_load(&tri, k, &|p| p[0] * p[1], &[1.0]).unwrap();
        let l2 = local_load(&tri, k, &|p| (p[0] - p[1]).cos(), &[-0.5]).unwrap();
        let rhs = |load| condense(&LocalSystem { gram: gram.clone(), b: bm.clone(), load }).unwrap().1;
        let combined = rhs(&l1 * a + &l2 * b);
        let separate = rhs(l1) * a + rhs(l2) * b;
        prop_assert!((combined - &separate).amax() <= 1e-9 * separate.amax().max(1.0));
    }
}
