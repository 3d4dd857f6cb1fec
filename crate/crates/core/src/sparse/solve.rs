use serde::{Deserialize, Serialize};

use super::factor::{BandLu, EnvelopeCholesky};
use super::ordering::reverse_cuthill_mckee;
use super::{dot, norm2, LinearSystem, SolveError, SparseMatrix};
use crate::tolerances::{SOLVE_RESIDUAL_REL, SPD_PIVOT_REL};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SolveMethod {
    /// Cholesky for symmetric matrices, LU otherwise or when Cholesky breaks down.
    #[default]
    Auto,
    /// LU with partial pivoting.
    Direct,
    /// Jacobi-preconditioned conjugate gradient.
    Cg,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Factorization {
    Cholesky,
    Lu,
    Cg,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolveReport {
    pub x: Vec<f64>,
    pub used: Factorization,
    pub residual: f64,
    pub iterations: usize,
}

fn residual_bound(a: &SparseMatrix, b: &[f64], x: &[f64]) -> f64 {
    SOLVE_RESIDUAL_REL * (norm2(b) + a.frobenius_norm() * norm2(x))
}

fn check_square(sys: &LinearSystem) -> Result<(), SolveError> {
    if sys.matrix.dim() != sys.rhs.len() {
        return Err(SolveError::DimensionMismatch { matrix: sys.matrix.dim(), vector: sys.rhs.len() });
    }
    Ok(())
}

/// Direct solve followed by up to three refinement steps.
fn refine(
    sys: &LinearSystem,
    apply: impl Fn(&[f64]) -> Vec<f64>,
    used: Factorization,
) -> Result<SolveReport, SolveError> {
    let mut x = apply(&sys.rhs);
    let mut r = sys.residual(&x);
    let mut steps = 0;
    while norm2(&r) > 0.1 * residual_bound(&sys.matrix, &sys.rhs, &x) && steps < 3 {
        let d = apply(&r);
        for (xi, di) in x.iter_mut().zip(&d) {
            *xi += di;
        }
        r = sys.residual(&x);
        steps += 1;
    }
    let residual = norm2(&r);
    let bound = residual_bound(&sys.matrix, &sys.rhs, &x);
    if !(residual <= bound) {
        return Err(SolveError::ResidualTooLarge { residual, bound });
    }
    Ok(SolveReport { x, used, residual, iterations: steps })
}

pub fn solve(sys: &LinearSystem) -> Result<Vec<f64>, SolveError> {
    solve_with(sys, SolveMethod::Auto).map(|r| r.x)
}

/// Solves `A x = b`; the result satisfies `‖b - Ax‖ ≤ 1e-10 (‖b‖ + ‖A‖_F ‖x‖)`.
pub fn solve_with(sys: &LinearSystem, method: SolveMethod) -> Result<SolveReport, SolveError> {
    check_square(sys)?;
    let a = &sys.matrix;
    if a.dim() == 0 {
        return Ok(SolveReport { x: Vec::new(), used: Factorization::Lu, residual: 0.0, iterations: 0 });
    }
    match method {
        SolveMethod::Cg => conjugate_gradient(sys),
        SolveMethod::Direct => {
            let perm = reverse_cuthill_mckee(a);
            let lu = BandLu::factor(a, &perm)?;
            refine(sys, |b| lu.solve(b), Factorization::Lu)
        }
        SolveMethod::Auto => {
            let perm = reverse_cuthill_mckee(a);
            if a.is_symmetric() {
                let tol = SPD_PIVOT_REL * max_diag(a);
                if let Ok(ch) = EnvelopeCholesky::factor(a, &perm, tol) {
                    if let Ok(r) = refine(sys, |b| ch.solve(b), Factorization::Cholesky) {
                        return Ok(r);
                    }
                }
            }
            let lu = BandLu::factor(a, &perm)?;
            refine(sys, |b| lu.solve(b), Factorization::Lu)
        }
    }
}

fn max_diag(a: &SparseMatrix) -> f64 {
    a.diagonal().iter().fold(0.0f64, |m, d| m.max(d.abs()))
}

fn conjugate_gradient(sys: &LinearSystem) -> Result<SolveReport, SolveError> {
    let a = &sys.matrix;
    let n = a.dim();
    let inv_diag: Vec<f64> = a.diagonal().iter().map(|&d| if d != 0.0 { 1.0 / d } else { 1.0 }).collect();
    let mut x = vec![0.0; n];
    let mut r = sys.rhs.clone();
    let mut z: Vec<f64> = r.iter().zip(&inv_diag).map(|(r, d)| r * d).collect();
    let mut p = z.clone();
    let mut rz = dot(&r, &z);
    let fro = a.frobenius_norm();
    let nb = norm2(&sys.rhs);
    let maxit = 10 * n;
    for it in 0..=maxit {
        if norm2(&r) <= 0.5 * SOLVE_RESIDUAL_REL * (nb + fro * norm2(&x)) {
            let residual = norm2(&sys.residual(&x));
            let bound = residual_bound(a, &sys.rhs, &x);
            if residual <= bound {
                return Ok(SolveReport { x, used: Factorization::Cg, residual, iterations: it });
            }
            r = sys.residual(&x);
        }
        if it == maxit {
            break;
        }
        let ap = a.mul_vec(&p);
        let pap = dot(&p, &ap);
        if pap <= 0.0 {
            return Err(SolveError::NotPositiveDefinite { pivot: it, value: pap });
        }
        let alpha = rz / pap;
        for i in 0..n {
            x[i] += alpha * p[i];
            r[i] -= alpha * ap[i];
        }
        for i in 0..n {
            z[i] = r[i] * inv_diag[i];
        }
        let rz_new = dot(&r, &z);
        let beta = rz_new / rz;
        rz = rz_new;
        for i in 0..n {
            p[i] = z[i] + beta * p[i];
        }
    }
    Err(SolveError::CgNotConverged { iterations: maxit })
}

#[derive(Debug, Clone, PartialEq)]
pub enum SpdReport {
    Spd,
    /// `(i, j)` with `a_ij ≠ a_ji`.
    NotSymmetric {
        row: usize,
        col: usize,
    },
    /// A direction `d` with `dᵀ A d = quadratic_form ≤ pivot threshold`.
    Indefinite {
        witness: Vec<f64>,
        quadratic_form: f64,
    },
}

impl SpdReport {
    pub fn is_spd(&self) -> bool {
        matches!(self, SpdReport::Spd)
    }
}

/// Symmetry check followed by Cholesky with pivots above `1e-14 max a_ii`.
pub fn is_spd(a: &SparseMatrix) -> SpdReport {
    if let Some((row, col)) = a.asymmetry_witness(1e-12) {
        return SpdReport::NotSymmetric { row, col };
    }
    let perm = reverse_cuthill_mckee(a);
    match EnvelopeCholesky::factor(a, &perm, SPD_PIVOT_REL * max_diag(a)) {
        Ok(_) => SpdReport::Spd,
        Err(b) => {
            let q = dot(&b.witness, &a.mul_vec(&b.witness));
            SpdReport::Indefinite { witness: b.witness, quadratic_form: q }
        }
    }
}
