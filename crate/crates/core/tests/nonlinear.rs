use std::sync::Arc;

use polyfv::diagnostics::{check_m_matrix, check_minmax, check_peculiar_structure, interior_cells};
use polyfv::geometry::{pt, Point};
use polyfv::mesh::{CellPointRule, Rect};
use polyfv::nonlinear::{cone_decomposition, Corrected, Mmp, VertexInterpolator};
use polyfv::scheme::{solve_problem, Neighbor, SchemeKind, SolveOptions};
use polyfv::{Mesh, Problem, SparseMatrix, Tensor, TensorField};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn rotated(ratio: f64, angle: f64) -> Tensor {
    let (s, c) = angle.sin_cos();
    let r = Tensor::new(c, -s, s, c);
    r * Tensor::new(ratio, 0.0, 0.0, 1.0) * r.transpose()
}

fn problem(
    t: Tensor,
    f: impl Fn(&Point) -> f64 + Send + Sync + 'static,
    g: impl Fn(&Point) -> f64 + Send + Sync + 'static,
) -> Problem {
    Problem::new(TensorField::Constant(t), Arc::new(f), Arc::new(g))
}

fn quads(n: usize, amp: f64, seed: u64) -> Mesh {
    Mesh::build_cartesian(n, n, Rect::UNIT).unwrap().perturb_random(amp, seed).unwrap()
}

fn triangles(n: usize, amp: f64, seed: u64) -> Mesh {
    Mesh::build_triangular(n, n, Rect::UNIT, CellPointRule::Barycenter).unwrap().perturb_random(amp, seed).unwrap()
}

fn incentred(n: usize, amp: f64, seed: u64) -> Mesh {
    triangles(n, amp, seed).with_lambda_incenters(|_| Tensor::identity()).unwrap()
}

/// Z-matrix with nonnegative row sums where every row reaches a strictly
/// dominant one through nonzero entries: a nonsingular M-matrix.
fn weakly_chained_dominant(a: &SparseMatrix) -> bool {
    let n = a.dim();
    let tol = 1e-12 * a.max_abs();
    if a.triplets().any(|(i, j, v)| i != j && v > tol) {
        return false;
    }
    let sums = a.mul_vec(&vec![1.0; n]);
    if sums.iter().any(|&s| s < -tol) {
        return false;
    }
    let mut ok: Vec<bool> = sums.iter().map(|&s| s > tol).collect();
    loop {
        let mut changed = false;
        for i in 0..n {
            if !ok[i] && a.row(i).any(|(j, v)| j != i && v != 0.0 && ok[j]) {
                ok[i] = true;
                changed = true;
            }
        }
        if !changed {
            return ok.iter().all(|&x| x);
        }
    }
}

#[test]
fn mmp_weights_example() {
    let (a, b) = Mmp::weights(1.0, 3.0);
    assert!((a - 0.75).abs() < 1e-15 && (b - 0.25).abs() < 1e-15);
    assert_eq!(Mmp::weights(0.0, 0.0), (0.5, 0.5));
}

#[test]
fn cone_of_a_square_cell() {
    let mesh = Mesh::build_cartesian(1, 1, Rect::UNIT).unwrap();
    let target = pt(1.0, 0.0);
    let (vs, c) = cone_decomposition(&mesh, 0, &target).unwrap();
    let xk = mesh.cell_point(0);
    let rebuilt = (mesh.vertex(vs[0]) - xk) * c[0] + (mesh.vertex(vs[1]) - xk) * c[1];
    assert!((rebuilt - target).norm() < 1e-14);
    assert!((c[0] - 1.0).abs() < 1e-14 && (c[1] - 1.0).abs() < 1e-14);
}

#[test]
fn constant_boundary_data_converge_at_once() {
    let mesh = incentred(4, 0.2, 2);
    let aniso = problem(rotated(100.0, 0.3), |_| 0.0, |_| 2.0);
    let iso = problem(Tensor::identity(), |_| 0.0, |_| 2.0);
    for (kind, p) in [(SchemeKind::MonoTri, &iso), (SchemeKind::MonoPoly, &aniso), (SchemeKind::Mmp, &aniso)] {
        let sol = solve_problem(&kind, &mesh, p, &SolveOptions::default()).unwrap();
        assert_eq!(sol.iterations, 1, "{}", kind.label());
        assert!(sol.field.cells.iter().all(|u| (u - 2.0).abs() < 1e-12), "{}", kind.label());
    }
}

#[test]
fn correction_bounds_vanish_on_constants() {
    let orthogonal = Mesh::build_cartesian(4, 4, Rect::UNIT).unwrap();
    let perturbed = quads(4, 0.2, 7);
    let diag = problem(Tensor::new(5.0, 0.0, 0.0, 1.0), |_| 0.0, |_| 1.0);
    let full = problem(rotated(50.0, 0.7), |_| 0.0, |_| 1.0);
    for (base, mesh, p) in [(SchemeKind::Tpfa, &orthogonal, &diag), (SchemeKind::hmm(), &perturbed, &full)] {
        let c = Corrected::new(&base, mesh, p).unwrap();
        let u = vec![1.0; mesh.n_cells()];
        assert!(c.lower_bounds(&u).iter().all(|&b| b == 0.0), "{}", base.label());
        assert!(c.base_residuals(&u).iter().all(|r| r.abs() < 1e-12), "{}", base.label());
    }
}

#[test]
fn corrected_hmm_is_positive_where_hmm_is_not() {
    let mesh = triangles(8, 0.3, 0);
    let p = problem(
        Tensor::new(100.0, 0.0, 0.0, 1.0),
        |q| if (q.x - 0.5).abs() < 0.25 && (q.y - 0.5).abs() < 0.25 { 1.0 } else { 0.0 },
        |_| 0.0,
    );
    let plain = solve_problem(&SchemeKind::hmm(), &mesh, &p, &SolveOptions::default()).unwrap();
    let corrected = solve_problem(
        &SchemeKind::Corrected { base: Box::new(SchemeKind::hmm()) },
        &mesh,
        &p,
        &SolveOptions::default(),
    )
    .unwrap();
    assert!(plain.field.min() < 0.0);
    assert!(corrected.field.min() >= 0.0, "min {}", corrected.field.min());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn interpolation_weights_are_convex(tri: bool, n in 2usize..6, amp in 0.0..0.3, seed: u64) {
        let mesh = if tri { triangles(n, amp, seed) } else { quads(n, amp, seed) };
        let split = TensorField::Zoned {
            tensors: vec![Tensor::identity(), Tensor::identity() * 10.0],
            zone_of: Arc::new(|q: &Point| usize::from(q.x > 0.5)),
        };
        for field in [TensorField::identity(), split] {
            let interp = VertexInterpolator::new(&mesh, &field);
            for v in 0..mesh.n_vertices() {
                let w = interp.weights(v);
                prop_assert!(!w.is_empty());
                prop_assert!(w.iter().all(|&(k, x)| x >= 0.0 && mesh.vertex_cells(v).contains(&k)));
                prop_assert!((w.iter().map(|x| x.1).sum::<f64>() - 1.0).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn cone_decomposition_rebuilds_the_target(n in 2usize..5, amp in 0.0..0.3, seed: u64, angle in 0.0..std::f64::consts::TAU) {
        let mesh = quads(n, amp, seed);
        let target = pt(angle.cos(), angle.sin());
        for k in 0..mesh.n_cells() {
            let (vs, c) = cone_decomposition(&mesh, k, &target).unwrap();
            let xk = mesh.cell_point(k);
            prop_assert!(c[0] >= 0.0 && c[1] >= 0.0);
            let rebuilt = (mesh.vertex(vs[0]) - xk) * c[0] + (mesh.vertex(vs[1]) - xk) * c[1];
            prop_assert!((rebuilt - target).norm() < 1e-12);
        }
    }

    #[test]
    fn frozen_monotone_matrices_are_m_matrices(n in 2usize..6, amp in 0.0..0.3, seed: u64, ratio in 1.0..1e3, angle in 0.0..3.2) {
        let aniso = problem(rotated(ratio, angle), |_| 1.0, |q| q.x);
        let iso = problem(Tensor::identity(), |_| 1.0, |q| q.x);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let tri = incentred(n, amp, seed);
        let quad = quads(n, amp, seed);
        for (kind, mesh, p) in [(SchemeKind::MonoTri, &tri, &iso), (SchemeKind::MonoPoly, &quad, &aniso), (SchemeKind::MonoPoly, &tri, &aniso)] {
            let scheme = kind.nonlinear(mesh, p).unwrap();
            let u: Vec<f64> = (0..mesh.n_cells()).map(|_| rng.gen_range(0.0..2.0)).collect();
            let a = scheme.freeze(&u).unwrap().system.matrix;
            let r = check_m_matrix(&a);
            prop_assert!(r.ok, "{}: {:?}", kind.label(), r.violation);
        }
    }

    #[test]
    fn frozen_mmp_matrices_are_m_matrices(n in 2usize..7, amp in 0.0..0.3, seed: u64, ratio in 1.0..1e2, angle in 0.0..3.2) {
        let mesh = quads(n, amp, seed);
        let p = problem(rotated(ratio, angle), |_| 0.0, |q| q.x);
        let scheme = SchemeKind::Mmp.nonlinear(&mesh, &p).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let u: Vec<f64> = (0..mesh.n_cells()).map(|_| rng.gen_range(0.0..1.0)).collect();
        let a = scheme.freeze(&u).unwrap().system.matrix;
        let r = check_peculiar_structure(&a, &interior_cells(&mesh));
        prop_assert!(r.nonpositive_offdiag);
        prop_assert!(weakly_chained_dominant(&a));
    }

    #[test]
    fn monotone_schemes_keep_solutions_nonnegative(seed: u64, ratio in 1.0..1e3, angle in 0.0..3.2) {
        let mesh = incentred(5, 0.25, seed);
        let aniso = problem(rotated(ratio, angle), |q| (q.x - q.y).abs(), |q| q.y * q.y);
        let iso = problem(Tensor::identity(), |q| (q.x - q.y).abs(), |q| q.y * q.y);
        for (kind, p) in [(SchemeKind::MonoTri, &iso), (SchemeKind::MonoPoly, &aniso)] {
            let sol = solve_problem(&kind, &mesh, p, &SolveOptions::default()).unwrap();
            let r = check_minmax(&sol.field.cells, &sol.assembled.source, &sol.assembled.boundary);
            prop_assert!(r.nonnegative_data && r.positive_ok, "{}: min {}", kind.label(), r.min);
        }
    }

    #[test]
    fn mmp_respects_the_boundary_range(seed: u64, ratio in 1.0..1e3, angle in 0.0..3.2) {
        let mesh = quads(5, 0.25, seed);
        let p = problem(rotated(ratio, angle), |_| 0.0, |q| if q.x < 0.5 { 0.0 } else { 1.0 });
        let sol = solve_problem(&SchemeKind::Mmp, &mesh, &p, &SolveOptions::default()).unwrap();
        let r = check_minmax(&sol.field.cells, &sol.assembled.source, &sol.assembled.boundary);
        prop_assert!(r.zero_source && r.minmax_ok, "range [{}, {}]", r.min, r.max);
    }

    #[test]
    fn correction_betas_are_symmetric(seed: u64, ratio in 1.0..1e3, angle in 0.0..3.2) {
        let mesh = quads(4, 0.25, seed);
        let p = problem(rotated(ratio, angle), |_| 1.0, |_| 0.0);
        let c = Corrected::new(&SchemeKind::hmm(), &mesh, &p).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let u: Vec<f64> = (0..mesh.n_cells()).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let lb = c.lower_bounds(&u);
        let betas = c.betas(&u);
        for (k, row) in betas.iter().enumerate() {
            for &(z, b) in row {
                prop_assert!(b >= lb[k]);
                if let Neighbor::Cell(j) = z {
                    let back = betas[j].iter().find(|(y, _)| *y == Neighbor::Cell(k)).map(|x| x.1);
                    prop_assert_eq!(back, Some(b));
                }
            }
        }
    }
}
