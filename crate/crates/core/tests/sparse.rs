use nalgebra::{DMatrix, DVector};
use polyfv::sparse::{
    is_spd, reverse_cuthill_mckee, solve_with, write_matrix_market, SolveError, SolveMethod, SpdReport,
};
use polyfv::{LinearSystem, SparseMatrix};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Random superdiagonal plus `extra` scattered entries.
fn random_entries(n: usize, extra: usize, rng: &mut ChaCha8Rng) -> Vec<(usize, usize, f64)> {
    let mut t = Vec::new();
    for i in 0..n.saturating_sub(1) {
        t.push((i, i + 1, rng.gen_range(-1.0..1.0)));
    }
    for _ in 0..extra {
        t.push((rng.gen_range(0..n), rng.gen_range(0..n), rng.gen_range(-1.0..1.0)));
    }
    t
}

fn spd_matrix(n: usize, seed: u64) -> SparseMatrix {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut t = Vec::new();
    let mut rowsum = vec![0.0; n];
    for (i, j, v) in random_entries(n, n, &mut rng) {
        if i != j {
            t.push((i, j, v));
            t.push((j, i, v));
            rowsum[i] += v.abs();
            rowsum[j] += v.abs();
        }
    }
    for (i, s) in rowsum.iter().enumerate() {
        t.push((i, i, s + rng.gen_range(0.1..1.0)));
    }
    SparseMatrix::from_triplets(n, &t).unwrap()
}

fn dense_oracle(a: &SparseMatrix, b: &[f64]) -> Vec<f64> {
    let n = a.dim();
    let m = DMatrix::from_fn(n, n, |i, j| a.get(i, j));
    m.lu().solve(&DVector::from_column_slice(b)).unwrap().iter().copied().collect()
}

fn max_diff(x: &[f64], y: &[f64]) -> f64 {
    x.iter().zip(y).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max)
}

#[test]
fn tridiagonal_example() {
    let a = SparseMatrix::from_dense(&[vec![2.0, -1.0, 0.0], vec![-1.0, 2.0, -1.0], vec![0.0, -1.0, 2.0]]).unwrap();
    let sys = LinearSystem::new(a, vec![1.0; 3]).unwrap();
    for method in [SolveMethod::Auto, SolveMethod::Direct, SolveMethod::Cg] {
        let x = solve_with(&sys, method).unwrap().x;
        assert!(max_diff(&x, &[1.5, 2.0, 1.5]) < 1e-12, "{method:?}");
    }
}

#[test]
fn singular_and_indefinite_matrices() {
    let singular = SparseMatrix::from_dense(&[vec![1.0, 1.0], vec![1.0, 1.0]]).unwrap();
    let sys = LinearSystem::new(singular, vec![1.0, 0.0]).unwrap();
    assert!(matches!(solve_with(&sys, SolveMethod::Direct), Err(SolveError::Singular { .. })));
    let indefinite = SparseMatrix::from_dense(&[vec![1.0, 2.0], vec![2.0, 1.0]]).unwrap();
    match is_spd(&indefinite) {
        SpdReport::Indefinite { witness, quadratic_form } => {
            let q: f64 = witness.iter().zip(indefinite.mul_vec(&witness)).map(|(a, b)| a * b).sum();
            assert!(q <= 0.0 && (q - quadratic_form).abs() < 1e-12);
        }
        other => panic!("{other:?}"),
    }
    let skew = SparseMatrix::from_dense(&[vec![1.0, 2.0], vec![0.0, 1.0]]).unwrap();
    assert!(matches!(is_spd(&skew), SpdReport::NotSymmetric { .. }));
}

#[test]
fn matrix_market_lists_every_entry() {
    let a = spd_matrix(6, 1);
    let text = write_matrix_market(&a);
    let mut lines = text.lines();
    assert!(lines.next().unwrap().starts_with("%%MatrixMarket"));
    assert_eq!(lines.next().unwrap(), format!("6 6 {}", a.nnz()));
    assert_eq!(lines.count(), a.nnz());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn spd_solves_agree_with_dense_lu(n in 1usize..40, seed: u64) {
        let a = spd_matrix(n, seed);
        prop_assert!(is_spd(&a).is_spd());
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 1);
        let b: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let oracle = dense_oracle(&a, &b);
        let sys = LinearSystem::new(a, b).unwrap();
        for method in [SolveMethod::Auto, SolveMethod::Direct, SolveMethod::Cg] {
            let x = solve_with(&sys, method).unwrap().x;
            prop_assert!(max_diff(&x, &oracle) < 1e-8, "{:?}", method);
        }
    }

    #[test]
    fn nonsymmetric_solves_agree_with_dense_lu(n in 1usize..40, seed: u64) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut t = random_entries(n, 2 * n, &mut rng);
        for i in 0..n {
            t.push((i, i, 4.0 + rng.gen_range(0.0..1.0)));
        }
        let a = SparseMatrix::from_triplets(n, &t).unwrap();
        let b: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let oracle = dense_oracle(&a, &b);
        let sys = LinearSystem::new(a, b).unwrap();
        let x = solve_with(&sys, SolveMethod::Auto).unwrap().x;
        prop_assert!(max_diff(&x, &oracle) < 1e-9);
    }

    #[test]
    fn solves_are_deterministic(n in 1usize..30, seed: u64) {
        let a = spd_matrix(n, seed);
        let sys = LinearSystem::new(a, vec![1.0; n]).unwrap();
        let x = solve_with(&sys, SolveMethod::Auto).unwrap().x;
        let y = solve_with(&sys, SolveMethod::Auto).unwrap().x;
        prop_assert_eq!(x, y);
    }

    #[test]
    fn duplicates_sum_and_rcm_permutes(n in 1usize..30, seed: u64) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let t = random_entries(n, 3 * n, &mut rng);
        let a = SparseMatrix::from_triplets(n, &t).unwrap();
        let mut dense = vec![vec![0.0; n]; n];
        for &(i, j, v) in &t {
            dense[i][j] += v;
        }
        for i in 0..n {
            for j in 0..n {
                prop_assert!((a.get(i, j) - dense[i][j]).abs() < 1e-15);
            }
        }
        let mut p = reverse_cuthill_mckee(&a);
        p.sort_unstable();
        prop_assert_eq!(p, (0..n).collect::<Vec<_>>());
    }
}
