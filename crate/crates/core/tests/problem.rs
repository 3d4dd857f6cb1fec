use std::sync::Arc;

use polyfv::experiment::{cell_means, implicit_euler};
use polyfv::geometry::Point;
use polyfv::mesh::Rect;
use polyfv::problem::rotational_tensor;
use polyfv::scheme::{solve_problem, SchemeKind, SolveOptions};
use polyfv::sparse::SolveMethod;
use polyfv::{ManufacturedCase, Mesh, Problem, TensorField};
use proptest::prelude::*;

fn all_cases() -> Vec<ManufacturedCase> {
    vec![
        ManufacturedCase::affine(1.0, 2.0, 3.0),
        ManufacturedCase::Affine { a: -1.0, b: 0.5, c: 0.0, tensor: [2.0, 0.5, 1.0] },
        ManufacturedCase::BubbleIso,
        ManufacturedCase::BubbleAniso { ratio: 1e3 },
        ManufacturedCase::SineIso,
    ]
}

#[test]
fn manufactured_cases_satisfy_their_pde() {
    for case in all_cases() {
        case.self_check().unwrap();
        assert!(case.pde_residual(7) < 1e-8, "{}", case.name());
    }
}

#[test]
fn invalid_cases_are_rejected() {
    let bad = ManufacturedCase::Affine { a: 0.0, b: 0.0, c: 0.0, tensor: [1.0, 2.0, 1.0] };
    assert!(bad.validate().is_err());
    assert!(ManufacturedCase::IndicatorTransient { delta: -1.0 }.validate().is_err());
}

#[test]
fn boundary_values_are_edge_means() {
    let mesh = Mesh::build_cartesian(1, 1, Rect::UNIT).unwrap();
    let bottom = (0..mesh.n_edges()).find(|&e| mesh.edge_midpoint(e).y == 0.0).unwrap();
    for (g, mean) in [
        (Arc::new(|p: &Point| p.x) as Arc<dyn Fn(&Point) -> f64 + Send + Sync>, 0.5),
        (Arc::new(|p: &Point| p.x * p.x), 1.0 / 3.0),
    ] {
        let p = Problem::new(TensorField::identity(), Arc::new(|_: &Point| 0.0), g);
        let bd = p.discretize_boundary(&mesh);
        assert!((bd.edge(bottom) - mean).abs() < 1e-14);
    }
}

#[test]
fn one_long_time_step_reaches_the_steady_state() {
    let case = ManufacturedCase::IndicatorTransient { delta: 1e-2 };
    let mesh = Mesh::build_cartesian(8, 8, Rect::UNIT).unwrap().perturb_random(0.2, 3).unwrap();
    let problem = case.problem();
    let assembled = SchemeKind::hmm().assemble_linear(&mesh, &problem).unwrap();
    let u0 = cell_means(&mesh, case.initial().unwrap().as_ref());
    let dt = 1e6;
    let (_, u1) = implicit_euler(&mesh, &assembled, &u0, dt, 1).unwrap();
    // Steady problem with the mass term moved into the source.
    let mut sys = assembled.system.clone();
    for k in 0..mesh.n_cells() {
        sys.rhs[k] += mesh.cell_area(k) * u0[k] / dt;
    }
    let steady = polyfv::sparse::solve_with(&sys, SolveMethod::Auto).unwrap().x;
    let diff = u1.iter().zip(&steady).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    assert!(diff < 1e-6, "{diff:e}");
    let plain = solve_problem(&SchemeKind::hmm(), &mesh, &problem, &SolveOptions::default()).unwrap();
    assert!(u1.iter().zip(&plain.field.free).all(|(a, b)| (a - b).abs() < 1e-6));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn rotational_tensor_has_radial_eigenvalue_delta(x in -2.0..2.0, y in -2.0..2.0, delta in 1e-4..1e2) {
        prop_assume!(x * x + y * y > 1e-6);
        let t = rotational_tensor(x, y, delta);
        prop_assert!((t[(0, 1)] - t[(1, 0)]).abs() < 1e-15);
        let r = Point::new(x, y).normalize();
        let tang = Point::new(-r.y, r.x);
        prop_assert!((t * r - r * delta).norm() < 1e-12 * delta.max(1.0));
        prop_assert!((t * tang - tang).norm() < 1e-12 * delta.max(1.0));
    }

    #[test]
    fn affine_boundary_means_are_midpoint_values(a in -3.0..3.0, b in -3.0..3.0, c in -3.0..3.0, n in 1usize..5) {
        let mesh = Mesh::build_cartesian(n, n + 1, Rect::UNIT).unwrap().perturb_random(0.2, n as u64).unwrap();
        let p = ManufacturedCase::affine(a, b, c).problem();
        let bd = p.discretize_boundary(&mesh);
        for e in mesh.boundary_edges() {
            let m = mesh.edge_midpoint(e);
            prop_assert!((bd.edge(e) - (a * m.x + b * m.y + c)).abs() < 1e-12);
        }
    }
}
