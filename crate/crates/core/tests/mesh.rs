use polyfv::geometry::{incenter, pt, Point};
use polyfv::mesh::{check_orthogonality, read_mesh, write_mesh, CellPointRule, Rect};
use polyfv::{Mesh, Tensor};
use proptest::prelude::*;

fn build(tri: bool, nx: usize, ny: usize, amp: f64, seed: u64) -> Mesh {
    let m = if tri {
        Mesh::build_triangular(nx, ny, Rect::UNIT, CellPointRule::Barycenter).unwrap()
    } else {
        Mesh::build_cartesian(nx, ny, Rect::UNIT).unwrap()
    };
    m.perturb_random(amp, seed).unwrap()
}

#[test]
fn counts_follow_euler() {
    let m = Mesh::build_cartesian(3, 2, Rect::UNIT).unwrap();
    assert_eq!((m.n_cells(), m.n_vertices(), m.n_edges()), (6, 12, 17));
    let t = Mesh::build_triangular(3, 2, Rect::UNIT, CellPointRule::Incenter).unwrap();
    assert_eq!((t.n_cells(), t.n_vertices(), t.n_edges()), (12, 12, 23));
    assert_eq!(t.boundary_edges().count(), 10);
}

#[test]
fn incenter_of_the_unit_right_triangle() {
    let c = incenter(&pt(0.0, 0.0), &pt(1.0, 0.0), &pt(0.0, 1.0));
    let r = 1.0 / (2.0 + 2f64.sqrt());
    assert!((c - pt(r, r)).norm() < 1e-14);
}

#[test]
fn unit_square_cell_has_four_subcells_of_triangle_area_one_eighth() {
    let m = Mesh::build_cartesian(1, 1, Rect::UNIT).unwrap();
    for v in 0..m.n_vertices() {
        let ir = m.interaction_region(v);
        assert_eq!(ir.subcells.len(), 1);
        assert!((ir.subcells[0].triangle_area - 0.125).abs() < 1e-15);
        assert!((ir.area() - 0.25).abs() < 1e-15);
    }
    let m = Mesh::build_cartesian(2, 2, Rect::UNIT).unwrap();
    let centre = (0..m.n_vertices()).find(|&v| !m.is_boundary_vertex(v)).unwrap();
    assert_eq!(m.interaction_region(centre).subcells.len(), 4);
}

#[test]
fn subcell_gradient_reproduces_affine_data() {
    let m = Mesh::build_cartesian(2, 2, Rect::UNIT).unwrap().perturb_random(0.2, 5).unwrap();
    let f = |p: &Point| 0.3 - 1.5 * p.x + 2.0 * p.y;
    for ir in m.interaction_regions() {
        for s in &ir.subcells {
            let g = s.gradient(f(&m.cell_point(s.cell)), f(&s.midpoints[0]), f(&s.midpoints[1]));
            assert!((g - pt(-1.5, 2.0)).norm() < 1e-12);
        }
    }
}

#[test]
fn orthogonality_depends_on_tensor() {
    let m = Mesh::build_cartesian(4, 4, Rect::UNIT).unwrap();
    let diag = vec![Tensor::new(3.0, 0.0, 0.0, 1.0); m.n_cells()];
    assert!(check_orthogonality(&m, &diag).is_orthogonal());
    let full = vec![Tensor::new(2.0, 0.5, 0.5, 1.0); m.n_cells()];
    let r = check_orthogonality(&m, &full);
    assert!(!r.is_orthogonal());
    assert!(r.fraction > 0.0);
}

#[test]
fn io_rejects_garbage() {
    assert!(read_mesh("not a mesh").is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn areas_partition_the_domain(tri: bool, nx in 1usize..7, ny in 1usize..7, amp in 0.0..0.3, seed: u64) {
        let m = build(tri, nx, ny, amp, seed);
        let total: f64 = m.cell_areas().iter().sum();
        prop_assert!((total - 1.0).abs() < 1e-12);
        prop_assert!(m.cell_areas().iter().all(|&a| a > 0.0));
        let diamonds: f64 = m.diamonds().iter().map(|d| d.area).sum();
        prop_assert!((diamonds - 1.0).abs() < 1e-12);
        let regions: f64 = m.interaction_regions().iter().map(|r| r.area()).sum();
        prop_assert!((regions - 1.0).abs() < 1e-12);
    }

    #[test]
    fn cell_normals_close(tri: bool, nx in 1usize..6, ny in 1usize..6, amp in 0.0..0.3, seed: u64) {
        let m = build(tri, nx, ny, amp, seed);
        for k in 0..m.n_cells() {
            let s = m.cell_edges(k).iter().fold(Point::zeros(), |acc, &e| acc + m.normal(k, e) * m.edge_length(e));
            prop_assert!(s.norm() < 1e-12);
        }
        for e in 0..m.n_edges() {
            let edge = m.edge(e);
            if let Some(l) = edge.right {
                prop_assert!((m.normal(edge.left, e) + m.normal(l, e)).norm() < 1e-14);
            }
        }
    }

    #[test]
    fn perturbation_is_seeded_and_keeps_the_boundary(nx in 2usize..6, ny in 2usize..6, amp in 0.0..0.3, seed: u64) {
        let base = Mesh::build_cartesian(nx, ny, Rect::UNIT).unwrap();
        let a = base.perturb_random(amp, seed).unwrap();
        let b = base.perturb_random(amp, seed).unwrap();
        prop_assert_eq!(a.vertices(), b.vertices());
        for v in 0..base.n_vertices() {
            if base.is_boundary_vertex(v) {
                prop_assert_eq!(a.vertex(v), base.vertex(v));
            }
        }
        let still = base.perturb_random(0.0, seed).unwrap();
        prop_assert_eq!(still.vertices(), base.vertices());
    }

    #[test]
    fn text_round_trip(tri: bool, nx in 1usize..5, ny in 1usize..5, amp in 0.0..0.3, seed: u64) {
        let m = build(tri, nx, ny, amp, seed);
        let back = read_mesh(&write_mesh(&m)).unwrap();
        prop_assert_eq!(back.cells(), m.cells());
        for (p, q) in back.vertices().iter().zip(m.vertices()) {
            prop_assert!((p - q).norm() < 1e-15);
        }
        for (p, q) in back.cell_points().iter().zip(m.cell_points()) {
            prop_assert!((p - q).norm() < 1e-15);
        }
    }

    #[test]
    fn diamond_gradient_is_exact_for_affine(nx in 1usize..5, ny in 1usize..5, amp in 0.0..0.3, seed: u64, a in -3.0..3.0, b in -3.0..3.0) {
        let m = build(false, nx, ny, amp, seed);
        let f = |p: &Point| a * p.x + b * p.y + 1.0;
        for d in m.diamonds() {
            let [v0, v1] = d.vertices;
            let g = d.gradient([f(&d.x_k), f(&d.x_l), f(&m.vertex(v0)), f(&m.vertex(v1))]);
            prop_assert!((g - pt(a, b)).norm() < 1e-10);
        }
    }
}
