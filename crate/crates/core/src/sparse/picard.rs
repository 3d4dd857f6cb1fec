use super::solve::{solve_with, SolveMethod};
use super::{norm2, LinearSystem, SolveError};
use crate::tolerances::{PICARD_MAXIT, PICARD_RESIDUAL_REL, PICARD_TOL};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PicardOptions {
    pub tol: f64,
    pub maxit: usize,
    /// Relaxation factor `ω ∈ (0, 1]`: `u ← ω u* + (1 - ω) u`.
    pub relaxation: f64,
    /// Anderson acceleration depth; `Some(0)` is the plain fixed-point
    /// iteration and `None` leaves the choice to the caller's scheme.
    pub anderson: Option<usize>,
    pub method: SolveMethod,
}

impl Default for PicardOptions {
    fn default() -> Self {
        PicardOptions {
            tol: PICARD_TOL,
            maxit: PICARD_MAXIT,
            relaxation: 1.0,
            anderson: None,
            method: SolveMethod::Auto,
        }
    }
}

#[derive(Debug, Clone)]
pub struct PicardOutcome {
    pub solution: Vec<f64>,
    pub iterations: usize,
    /// `‖u^{n+1} - u^n‖₂` for each iteration.
    pub history: Vec<f64>,
    /// The system frozen at the returned solution.
    pub system: LinearSystem,
}

/// Fixed-point iteration `A(u^n) u^{n+1} = b(u^n)`.
///
/// Stops when `‖u^{n+1} - u^n‖ ≤ tol (‖u^{n+1}‖ + 1e-30)` (or the frozen
/// system did not change) and `u^{n+1}` solves the system frozen at itself: `|r_i| ≤ PICARD_RESIDUAL_REL · max_j(|b_j| + Σ_l |a_jl u_l|)`.
pub fn picard_solve<E: From<SolveError>>(
    mut freeze: impl FnMut(&[f64]) -> Result<LinearSystem, E>,
    u0: Vec<f64>,
    opts: &PicardOptions,
) -> Result<PicardOutcome, E> {
    let omega = opts.relaxation;
    let mut u = u0;
    let mut sys = freeze(&u)?;
    let mut history = Vec::new();
    let mut anderson = opts.anderson.filter(|&d| d > 0).map(Anderson::new);
    for it in 1..=opts.maxit {
        let star = solve_with(&sys, opts.method)?.x;
        let relaxed: Vec<f64> = star.iter().zip(&u).map(|(s, o)| omega * s + (1.0 - omega) * o).collect();
        let next = match anderson.as_mut() {
            Some(acc) => acc.step(&u, relaxed),
            None => relaxed,
        };
        let inc = norm2(&next.iter().zip(&u).map(|(a, b)| a - b).collect::<Vec<_>>());
        history.push(inc);
        u = next;
        let frozen = freeze(&u)?;
        let unchanged = frozen == sys && omega == 1.0 && anderson.is_none();
        sys = frozen;
        let by_increment = inc <= opts.tol * (norm2(&u) + 1e-30);
        if (by_increment || unchanged) && frozen_residual_small(&sys, &u) {
            return Ok(PicardOutcome { solution: u, iterations: it, history, system: sys });
        }
    }
    Err(SolveError::PicardNotConverged { iterations: opts.maxit, last_iterate: u, history }.into())
}

/// Anderson mixing of the fixed-point map `G`: keeps the last `depth`
/// differences of `G(u)` and of `f = G(u) - u`.
struct Anderson {
    depth: usize,
    prev: Option<(Vec<f64>, Vec<f64>)>,
    df: Vec<Vec<f64>>,
    dg: Vec<Vec<f64>>,
}

impl Anderson {
    fn new(depth: usize) -> Self {
        Anderson { depth, prev: None, df: Vec::new(), dg: Vec::new() }
    }

    fn step(&mut self, u: &[f64], g: Vec<f64>) -> Vec<f64> {
        let f: Vec<f64> = g.iter().zip(u).map(|(a, b)| a - b).collect();
        if let Some((pg, pf)) = self.prev.take() {
            self.df.push(f.iter().zip(&pf).map(|(a, b)| a - b).collect());
            self.dg.push(g.iter().zip(&pg).map(|(a, b)| a - b).collect());
            if self.df.len() > self.depth {
                self.df.remove(0);
                self.dg.remove(0);
            }
        }
        self.prev = Some((g.clone(), f.clone()));
        if self.df.is_empty() {
            return g;
        }
        let n = f.len();
        let m = self.df.len();
        let a = nalgebra::DMatrix::from_fn(n, m, |i, j| self.df[j][i]);
        let Ok(gamma) = a.svd(true, true).solve(&nalgebra::DVector::from_column_slice(&f), 1e-12) else {
            return g;
        };
        let mut out = g;
        for (j, dg) in self.dg.iter().enumerate() {
            for (o, d) in out.iter_mut().zip(dg) {
                *o -= gamma[j] * d;
            }
        }
        out
    }
}

fn frozen_residual_small(sys: &LinearSystem, u: &[f64]) -> bool {
    let scale = (0..sys.dim())
        .map(|i| sys.rhs[i].abs() + sys.matrix.row(i).map(|(j, a)| (a * u[j]).abs()).sum::<f64>())
        .fold(0.0, f64::max);
    sys.residual(u).iter().all(|r| r.abs() <= PICARD_RESIDUAL_REL * scale)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sparse::SparseMatrix;

    #[test]
    fn scalar_fixed_point() {
        let freeze = |x: &[f64]| LinearSystem::new(SparseMatrix::identity(1), vec![(x[0] + 2.0) / 2.0]);
        let out = picard_solve(freeze, vec![0.0], &PicardOptions::default()).unwrap();
        assert!((out.solution[0] - 2.0).abs() < 1e-7);
        assert!(out.history.windows(2).all(|w| w[1] <= w[0]));
    }

    #[test]
    fn linear_problem_takes_one_iteration() {
        let a = SparseMatrix::from_dense(&[vec![2.0, -1.0], vec![-1.0, 2.0]]).unwrap();
        let freeze = |_: &[f64]| LinearSystem::new(a.clone(), vec![1.0, 1.0]);
        let out = picard_solve(freeze, vec![0.0, 0.0], &PicardOptions::default()).unwrap();
        assert_eq!(out.iterations, 1);
    }

    #[test]
    fn iteration_cap_returns_last_iterate() {
        // Alternates between two systems with different solutions.
        let freeze = |x: &[f64]| LinearSystem::new(SparseMatrix::identity(1), vec![if x[0] > 0.5 { 0.0 } else { 1.0 }]);
        let opts = PicardOptions { maxit: 7, ..Default::default() };
        match picard_solve(freeze, vec![0.0], &opts) {
            Err(SolveError::PicardNotConverged { iterations, last_iterate, history }) => {
                assert_eq!(iterations, 7);
                assert_eq!(history.len(), 7);
                assert_eq!(last_iterate.len(), 1);
            }
            other => panic!("{other:?}"),
        }
    }
}
