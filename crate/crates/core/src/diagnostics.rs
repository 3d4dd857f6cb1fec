//! Structural and numerical checks on assembled schemes and their solutions.

use std::collections::{HashMap, VecDeque};

use serde::Serialize;

use crate::geometry::{segment_mean, Point, GAUSS3};
use crate::hmm::LocalHmm;
use crate::mesh::Mesh;
use crate::problem::{BoundaryData, ManufacturedCase, Problem};
use crate::scheme::{solve_problem, AssembledSystem, Dof, Neighbor, SchemeError, SchemeKind, SolveOptions};
use crate::sparse::{is_spd, reverse_cuthill_mckee, EnvelopeCholesky, SparseMatrix, SpdReport};
use crate::tolerances::{EIG_TOL, FLUX_LAW_TOL, MINMAX_TOL, M_MATRIX_OFFDIAG_REL, SPD_PIVOT_REL};

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum MMatrixViolation {
    NonPositiveDiagonal { row: usize, value: f64 },
    PositiveOffDiagonal { row: usize, col: usize, value: f64 },
    NotColumnDominant { col: usize, excess: f64 },
    NoStrictColumn,
    Disconnected { unreachable: usize },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MMatrixReport {
    pub ok: bool,
    pub violation: Option<MMatrixViolation>,
}

/// Positive diagonal, nonpositive off-diagonals, column diagonal dominance
/// (strict in at least one column) and a connected graph.
pub fn check_m_matrix(a: &SparseMatrix) -> MMatrixReport {
    let fail = |v| MMatrixReport { ok: false, violation: Some(v) };
    let n = a.dim();
    let scale = a.max_abs();
    let tol = M_MATRIX_OFFDIAG_REL * scale;
    let diag = a.diagonal();
    if let Some((row, &value)) = diag.iter().enumerate().find(|(_, &d)| d <= 0.0) {
        return fail(MMatrixViolation::NonPositiveDiagonal { row, value });
    }
    let mut off = vec![0.0; n];
    for (i, j, v) in a.triplets() {
        if i != j {
            if v > tol {
                return fail(MMatrixViolation::PositiveOffDiagonal { row: i, col: j, value: v });
            }
            off[j] += v.abs();
        }
    }
    let dominance_tol = 1e-12 * scale;
    let mut strict = false;
    for j in 0..n {
        let excess = diag[j] - off[j];
        if excess < -dominance_tol {
            return fail(MMatrixViolation::NotColumnDominant { col: j, excess });
        }
        strict |= excess > dominance_tol;
    }
    if n > 0 && !strict {
        return fail(MMatrixViolation::NoStrictColumn);
    }
    let unreachable = n - reachable_from_first(a);
    if unreachable > 0 {
        return fail(MMatrixViolation::Disconnected { unreachable });
    }
    MMatrixReport { ok: true, violation: None }
}

/// Size of the component of row 0 in the symmetrised adjacency graph.
fn reachable_from_first(a: &SparseMatrix) -> usize {
    let n = a.dim();
    if n == 0 {
        return 0;
    }
    let mut adj = vec![Vec::new(); n];
    for (i, j, v) in a.triplets() {
        if i != j && v != 0.0 {
            adj[i].push(j);
            adj[j].push(i);
        }
    }
    let mut seen = vec![false; n];
    let mut queue = VecDeque::from([0]);
    seen[0] = true;
    let mut count = 1;
    while let Some(i) = queue.pop_front() {
        for &j in &adj[i] {
            if !seen[j] {
                seen[j] = true;
                count += 1;
                queue.push_back(j);
            }
        }
    }
    count
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SpdEigReport {
    pub symmetric: bool,
    pub asymmetry: Option<(usize, usize)>,
    /// Smallest eigenvalue of the symmetric part `(A + Aᵀ)/2`.
    pub min_eigenvalue: f64,
    pub iterations: usize,
    /// Direction with nonpositive quadratic form when the factorization breaks down.
    pub witness: Option<Vec<f64>>,
}

impl SpdEigReport {
    pub fn spd(&self) -> bool {
        self.symmetric && self.witness.is_none() && self.min_eigenvalue > 0.0
    }
}

/// Symmetry check, Cholesky-based definiteness test and inverse iteration
/// for the smallest eigenvalue (shifted below the Gershgorin bound when the
/// matrix is indefinite).
pub fn check_spd_min_eig(a: &SparseMatrix) -> SpdEigReport {
    let asymmetry = a.asymmetry_witness(1e-12);
    let sym = if asymmetry.is_some() { symmetric_part(a) } else { a.clone() };
    let witness = match is_spd(&sym) {
        SpdReport::Indefinite { witness, .. } => Some(witness),
        _ => None,
    };
    let (min_eigenvalue, iterations) = smallest_eigenvalue(&sym, witness.is_some());
    SpdEigReport { symmetric: asymmetry.is_none(), asymmetry, min_eigenvalue, iterations, witness }
}

fn symmetric_part(a: &SparseMatrix) -> SparseMatrix {
    let t: Vec<_> = a.triplets().chain(a.transpose().triplets()).map(|(i, j, v)| (i, j, 0.5 * v)).collect();
    SparseMatrix::from_triplets(a.dim(), &t).expect("indices of a valid matrix")
}

fn smallest_eigenvalue(a: &SparseMatrix, indefinite: bool) -> (f64, usize) {
    let n = a.dim();
    if n == 0 {
        return (f64::INFINITY, 0);
    }
    let scale = a.max_abs().max(f64::MIN_POSITIVE);
    let shift = if indefinite {
        let mut radius = vec![0.0; n];
        for (i, j, v) in a.triplets() {
            if i != j {
                radius[i] += v.abs();
            }
        }
        let lower = a.diagonal().iter().zip(&radius).map(|(d, r)| d - r).fold(f64::INFINITY, f64::min);
        lower - 0.01 * scale
    } else {
        0.0
    };
    let shifted = a.add_diagonal(&vec![-shift; n]);
    let perm = reverse_cuthill_mckee(&shifted);
    let chol = match EnvelopeCholesky::factor(&shifted, &perm, SPD_PIVOT_REL * scale) {
        Ok(c) => c,
        // Positive but below the pivot threshold.
        Err(_) => return (0.0, 0),
    };
    let mut x: Vec<f64> = (0..n).map(|i| 1.0 + 0.5 * ((i as f64) * 0.7548).sin()).collect();
    normalize(&mut x);
    let mut lambda = f64::NAN;
    let maxit = 20_000;
    for it in 1..=maxit {
        let mut y = chol.solve(&x);
        normalize(&mut y);
        let ay = a.mul_vec(&y);
        let rq: f64 = y.iter().zip(&ay).map(|(p, q)| p * q).sum();
        // For a symmetric matrix some eigenvalue lies within |Ay - rq y| of rq.
        let res = ay.iter().zip(&y).map(|(p, q)| (p - rq * q).powi(2)).sum::<f64>().sqrt();
        let done = res <= EIG_TOL * rq.abs().max(1e-300) || (rq == lambda && it > 1);
        lambda = rq;
        x = y;
        if done {
            return (lambda, it);
        }
    }
    (lambda, maxit)
}

fn normalize(x: &mut [f64]) {
    let n = x.iter().map(|v| v * v).sum::<f64>().sqrt();
    if n > 0.0 {
        x.iter_mut().for_each(|v| *v /= n);
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FluxLawReport {
    /// `max |F_{K,σ} + F_{L,σ}|` (pair fluxes included) and where it occurs.
    pub conservativity: f64,
    pub conservativity_edge: Option<usize>,
    /// `max |Σ_σ F_{K,σ} - ∫_K f|` over cells (and dual cells for dual schemes).
    pub balance: f64,
    pub balance_cell: Option<usize>,
    pub scale: f64,
    pub ok: bool,
}

/// Conservativity and balance of the fluxes of `assembled` at the free unknowns `free`.
pub fn check_flux_laws(mesh: &Mesh, assembled: &AssembledSystem, free: &[f64]) -> FluxLawReport {
    let fluxes = assembled.fluxes.evaluate(free);
    let mut conservativity = 0.0;
    let mut conservativity_edge = None;
    for e in mesh.interior_edges() {
        let edge = mesh.edge(e);
        let (k, l) = (edge.left, edge.right.unwrap());
        let r = (fluxes.cell[k][mesh.local_edge(k, e).unwrap()] + fluxes.cell[l][mesh.local_edge(l, e).unwrap()]).abs();
        if r > conservativity {
            conservativity = r;
            conservativity_edge = Some(e);
        }
    }
    let pairs: HashMap<(usize, Neighbor), f64> =
        assembled.fluxes.pair_fluxes.iter().zip(&fluxes.pairs).map(|(p, &v)| ((p.cell, p.other), v)).collect();
    for (&(k, z), &v) in &pairs {
        if let Neighbor::Cell(j) = z {
            let back = pairs.get(&(j, Neighbor::Cell(k))).copied().unwrap_or(0.0);
            conservativity = f64::max(conservativity, (v + back).abs());
        }
    }

    let mut totals: Vec<f64> = fluxes.cell.iter().map(|f| f.iter().sum()).collect();
    for (p, &v) in assembled.fluxes.pair_fluxes.iter().zip(&fluxes.pairs) {
        totals[p.cell] += v;
    }
    let mut balance = 0.0;
    let mut balance_cell = None;
    for (k, (t, s)) in totals.iter().zip(&assembled.source).enumerate() {
        let r = (t - s).abs();
        if r > balance {
            balance = r;
            balance_cell = Some(k);
        }
    }
    let mut scale = assembled.source.iter().fold(1.0f64, |m, s| m.max(s.abs()));
    scale = fluxes.cell.iter().flatten().fold(scale, |m, f| m.max(f.abs()));

    if let Some(dual_source) = &assembled.dual_source {
        let mut dual = vec![0.0; mesh.n_vertices()];
        for (e, f) in fluxes.dual.iter().enumerate() {
            let [a, b] = mesh.edge(e).vertices;
            dual[a] += f;
            dual[b] -= f;
            scale = scale.max(f.abs());
        }
        for v in (0..mesh.n_vertices()).filter(|&v| assembled.layout.vertex(v).is_some()) {
            let r = (dual[v] - dual_source[v]).abs();
            if r > balance {
                balance = r;
                balance_cell = None;
            }
        }
    }
    let ok = conservativity <= FLUX_LAW_TOL * scale && balance <= FLUX_LAW_TOL * scale;
    FluxLawReport { conservativity, conservativity_edge, balance, balance_cell, scale, ok }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExactnessReport {
    /// `‖A u_I - b‖∞` with `u_I` the exact solution at every unknown.
    pub residual: f64,
    pub scale: f64,
    pub ok: bool,
}

/// Interpolates the exact (affine) solution of `problem` at the unknowns of
/// `kind` and measures the residual of the system (frozen at the
/// interpolant for nonlinear schemes).
pub fn check_linear_exactness(
    kind: &SchemeKind,
    mesh: &Mesh,
    problem: &Problem,
) -> Result<ExactnessReport, SchemeError> {
    let exact = problem
        .exact
        .as_ref()
        .ok_or_else(|| SchemeError::Precondition("linear exactness needs an exact solution".into()))?;
    if !problem.tensor.is_constant() {
        return Err(SchemeError::Precondition("linear exactness needs a constant tensor".into()));
    }
    let cells: Vec<f64> = mesh.cell_points().iter().map(|p| (exact.u)(p)).collect();
    let assembled = if kind.is_nonlinear() {
        kind.nonlinear(mesh, problem)?.freeze(&cells)?
    } else {
        kind.assemble_linear(mesh, problem)?
    };
    let u: Vec<f64> = assembled
        .layout
        .dofs()
        .iter()
        .map(|d| match *d {
            Dof::Cell(k) => cells[k],
            Dof::Edge(e) => (exact.u)(&mesh.edge_midpoint(e)),
            Dof::Vertex(v) => (exact.u)(&mesh.vertex(v)),
        })
        .collect();
    let sys = &assembled.system;
    let residual = sys.residual(&u).iter().fold(0.0f64, |m, r| m.max(r.abs()));
    let umax = u.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    let bmax = sys.rhs.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    let scale = (sys.matrix.max_abs() * umax).max(bmax).max(f64::MIN_POSITIVE);
    Ok(ExactnessReport { residual, scale, ok: residual < 1e-9 * scale })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MinMaxReport {
    pub min: f64,
    pub max: f64,
    /// Boundary data range.
    pub bounds: (f64, f64),
    /// `f ≥ 0` and `u_b ≥ 0`: the minimum principle applies.
    pub nonnegative_data: bool,
    /// `f = 0`: the maximum principle applies.
    pub zero_source: bool,
    pub positive_ok: bool,
    pub minmax_ok: bool,
}

/// Discrete minimum and maximum principles for cell values `u`, given the
/// cell source integrals and the boundary data. Flags hold vacuously when
/// their hypothesis fails.
pub fn check_minmax(u: &[f64], source: &[f64], boundary: &BoundaryData) -> MinMaxReport {
    let min = u.iter().cloned().fold(f64::INFINITY, f64::min);
    let max = u.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let (lo, hi) = boundary.range();
    let bounds = if lo.is_finite() { (lo, hi) } else { (0.0, 0.0) };
    let scale = bounds.0.abs().max(bounds.1.abs()).max(max.abs()).max(min.abs()).max(1.0);
    let tol = MINMAX_TOL * scale;
    let nonnegative_data = source.iter().all(|&s| s >= 0.0) && bounds.0 >= 0.0;
    let zero_source = source.iter().all(|&s| s == 0.0);
    MinMaxReport {
        min,
        max,
        bounds,
        nonnegative_data,
        zero_source,
        positive_ok: !nonnegative_data || min >= -tol,
        minmax_ok: !zero_source || (min >= bounds.0 - tol && max <= bounds.1 + tol),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PeculiarReport {
    pub symmetric: bool,
    pub nonpositive_offdiag: bool,
    /// Zero row sums on the rows flagged as interior.
    pub zero_row_sums: bool,
    pub max_row_sum: f64,
}

impl PeculiarReport {
    /// The `Σ_L τ_{K,L} (u_K - u_L)` structure with `τ_{K,L} = τ_{L,K} ≥ 0`.
    pub fn holds(&self) -> bool {
        self.symmetric && self.nonpositive_offdiag && self.zero_row_sums
    }
}

/// `interior[i]` marks the rows whose balance involves no boundary data.
pub fn check_peculiar_structure(a: &SparseMatrix, interior: &[bool]) -> PeculiarReport {
    let scale = a.max_abs();
    let tol = M_MATRIX_OFFDIAG_REL * scale;
    let nonpositive_offdiag = a.triplets().all(|(i, j, v)| i == j || v <= tol);
    let max_row_sum = (0..a.dim())
        .filter(|&i| interior.get(i).copied().unwrap_or(false))
        .map(|i| a.row(i).map(|(_, v)| v).sum::<f64>().abs())
        .fold(0.0, f64::max);
    PeculiarReport {
        symmetric: a.check_symmetric(1e-12),
        nonpositive_offdiag,
        zero_row_sums: max_row_sum <= 1e-12 * scale.max(f64::MIN_POSITIVE),
        max_row_sum,
    }
}

/// Cells without boundary edges.
pub fn interior_cells(mesh: &Mesh) -> Vec<bool> {
    (0..mesh.n_cells()).map(|k| !mesh.touches_boundary(k)).collect()
}

/// Both sides of the discrete energy identity of a cell-centred two-point
/// scheme with `u_b = 0`: `(Σ_K u_K Σ_σ F_{K,σ}, Σ_K u_K ∫_K f)`.
/// With two-point fluxes the left side is
/// `Σ_int τ (u_K - u_L)² + Σ_ext τ u_K²`.
pub fn energy_identity(mesh: &Mesh, transmissibilities: &[f64], u: &[f64], source: &[f64]) -> (f64, f64) {
    let lhs = (0..mesh.n_edges())
        .map(|e| {
            let edge = mesh.edge(e);
            let d = u[edge.left] - edge.right.map_or(0.0, |l| u[l]);
            transmissibilities[e] * d * d
        })
        .sum();
    let rhs = u.iter().zip(source).map(|(a, b)| a * b).sum();
    (lhs, rhs)
}

/// Residual of the discrete Stokes formula on one cell for `q(x) = g·x + c`
/// and the flux vector `gv`:
/// `[(Λ∇q)^I, G] + ∫_K q DIV G - Σ_σ G_σ (1/|σ|)∫_σ q`.
pub fn stokes_consistency_residual(mesh: &Mesh, local: &LocalHmm, g: Point, c: f64, gv: &[f64]) -> f64 {
    let k = local.cell;
    let edges = mesh.cell_edges(k);
    let q = |p: &Point| g.dot(p) + c;
    let interp: Vec<f64> =
        edges.iter().map(|&e| mesh.edge_length(e) * (local.tensor * g).dot(&mesh.normal(k, e))).collect();
    let lhs = local.inner(&interp, gv);
    let div: f64 = gv.iter().sum::<f64>() / local.area;
    let cell_integral = local.area * q(&mesh.cell_centroid(k));
    let edge_terms: f64 = edges.iter().zip(gv).map(|(&e, gs)| gs * q(&mesh.edge_midpoint(e))).sum();
    lhs + cell_integral * div - edge_terms
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LevelErrors {
    pub h: f64,
    pub n_cells: usize,
    /// `(Σ_K |K| (u_K - ū(x_K))²)^½`.
    pub error_u: f64,
    /// `(Σ_σ d_σ/|σ| (F_{K,σ} - F̄_{K,σ})²)^½`, one term per edge.
    pub error_flux: f64,
    pub iterations: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConvergenceStudy {
    pub levels: Vec<LevelErrors>,
    /// `log₂(e_k / e_{k+1})`; `None` when both errors are at rounding level.
    pub orders_u: Vec<Option<f64>>,
    pub orders_flux: Vec<Option<f64>>,
}

impl ConvergenceStudy {
    pub fn final_order_u(&self) -> Option<f64> {
        self.orders_u.last().copied().flatten()
    }

    pub fn final_order_flux(&self) -> Option<f64> {
        self.orders_flux.last().copied().flatten()
    }
}

/// Errors of one solve against the exact solution of `problem`.
pub fn level_errors(
    mesh: &Mesh,
    problem: &Problem,
    cells: &[f64],
    cell_fluxes: &[Vec<f64>],
) -> Result<(f64, f64), SchemeError> {
    let exact = problem
        .exact
        .as_ref()
        .ok_or_else(|| SchemeError::Precondition("error computation needs an exact solution".into()))?;
    let error_u = (0..mesh.n_cells())
        .map(|k| mesh.cell_area(k) * ((cells[k] - (exact.u)(&mesh.cell_point(k))).powi(2)))
        .sum::<f64>()
        .sqrt();
    let error_flux = (0..mesh.n_edges())
        .map(|e| {
            let edge = mesh.edge(e);
            let k = edge.left;
            let n = mesh.normal(k, e);
            let (a, b) = mesh.edge_endpoints(e);
            let flux = |p: &Point| -(problem.tensor.eval(p) * (exact.grad)(p)).dot(&n);
            let exact_flux = mesh.edge_length(e) * segment_mean(&a, &b, &flux, &GAUSS3);
            let other = edge.right.map_or(mesh.edge_midpoint(e), |l| mesh.cell_point(l));
            let w = (other - mesh.cell_point(k)).norm() / mesh.edge_length(e);
            let local = mesh.local_edge(k, e).unwrap();
            w * (cell_fluxes[k][local] - exact_flux).powi(2)
        })
        .sum::<f64>()
        .sqrt();
    Ok((error_u, error_flux))
}

/// Solves the case on each mesh (coarse to fine) and reports errors and orders.
pub fn convergence_study(
    kind: &SchemeKind,
    case: &ManufacturedCase,
    meshes: &[Mesh],
    opts: &SolveOptions,
) -> Result<ConvergenceStudy, SchemeError> {
    if meshes.len() < 2 {
        return Err(SchemeError::Precondition("a convergence study needs at least two meshes".into()));
    }
    let problem = case.problem();
    let levels = meshes
        .iter()
        .map(|mesh| {
            let sol = solve_problem(kind, mesh, &problem, opts)?;
            let (error_u, error_flux) = level_errors(mesh, &problem, &sol.field.cells, &sol.fluxes.cell)?;
            Ok(LevelErrors { h: mesh.h(), n_cells: mesh.n_cells(), error_u, error_flux, iterations: sol.iterations })
        })
        .collect::<Result<Vec<_>, SchemeError>>()?;
    let orders = |f: fn(&LevelErrors) -> f64| -> Vec<Option<f64>> {
        levels.windows(2).map(|w| observed_order(f(&w[0]), f(&w[1]))).collect()
    };
    let orders_u = orders(|l| l.error_u);
    let orders_flux = orders(|l| l.error_flux);
    Ok(ConvergenceStudy { levels, orders_u, orders_flux })
}

/// `log₂(coarse / fine)`, or `None` when both errors are at rounding level.
pub fn observed_order(coarse: f64, fine: f64) -> Option<f64> {
    if coarse <= 1e-12 && fine <= 1e-12 {
        None
    } else {
        Some((coarse / fine).log2())
    }
}

/// Everything known about one solve.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DiagnosticsReport {
    pub scheme: String,
    pub mesh: String,
    pub m_matrix: MMatrixReport,
    pub spd: SpdEigReport,
    pub transmissibility: PeculiarReport,
    pub flux_laws: FluxLawReport,
    /// Only for constant tensors.
    pub exactness: Option<ExactnessReport>,
    pub minmax: MinMaxReport,
    pub iterations: usize,
}

impl DiagnosticsReport {
    pub fn m_matrix(&self) -> bool {
        self.m_matrix.ok
    }

    pub fn spd(&self) -> bool {
        self.spd.spd()
    }

    pub fn symmetric_nonneg_transmissibility(&self) -> bool {
        self.transmissibility.holds()
    }

    pub fn conservative(&self) -> bool {
        self.flux_laws.ok
    }

    pub fn linearly_exact(&self) -> Option<bool> {
        self.exactness.as_ref().map(|e| e.ok)
    }

    pub fn minmax_ok(&self) -> bool {
        self.minmax.minmax_ok
    }

    pub fn positive_ok(&self) -> bool {
        self.minmax.positive_ok
    }
}

/// Runs every check on a solved problem. Linear exactness is measured with
/// the affine solution `x - y` under the problem's tensor when it is constant.
pub fn diagnose(
    kind: &SchemeKind,
    mesh: &Mesh,
    mesh_label: &str,
    problem: &Problem,
    solution: &crate::scheme::SchemeSolution,
) -> Result<DiagnosticsReport, SchemeError> {
    let a = &solution.assembled;
    let matrix = &a.system.matrix;
    let interior: Vec<bool> = {
        let cells = interior_cells(mesh);
        (0..matrix.dim()).map(|i| cells.get(i).copied().unwrap_or(false)).collect()
    };
    let exactness = match &problem.tensor {
        crate::problem::TensorField::Constant(t) => {
            let case = ManufacturedCase::Affine { a: 1.0, b: -1.0, c: 0.0, tensor: [t[(0, 0)], t[(0, 1)], t[(1, 1)]] };
            Some(check_linear_exactness(kind, mesh, &case.problem())?)
        }
        _ => None,
    };
    Ok(DiagnosticsReport {
        scheme: kind.label(),
        mesh: mesh_label.to_string(),
        m_matrix: check_m_matrix(matrix),
        spd: check_spd_min_eig(matrix),
        transmissibility: check_peculiar_structure(matrix, &interior),
        flux_laws: check_flux_laws(mesh, a, &solution.field.free),
        exactness,
        minmax: check_minmax(&solution.field.cells, &a.source, &a.boundary),
        iterations: solution.iterations,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::Rect;

    fn dense(rows: &[&[f64]]) -> SparseMatrix {
        SparseMatrix::from_dense(&rows.iter().map(|r| r.to_vec()).collect::<Vec<_>>()).unwrap()
    }

    #[test]
    fn m_matrix_small_examples() {
        assert!(check_m_matrix(&dense(&[&[2.0, -1.0], &[-1.0, 2.0]])).ok);
        let r = check_m_matrix(&dense(&[&[1.0, 0.5], &[0.5, 1.0]]));
        assert!(matches!(r.violation, Some(MMatrixViolation::PositiveOffDiagonal { .. })));
        let r = check_m_matrix(&dense(&[&[1.0, 0.0], &[0.0, 1.0]]));
        assert!(matches!(r.violation, Some(MMatrixViolation::Disconnected { unreachable: 1 })));
        let r = check_m_matrix(&dense(&[&[1.0, -1.0], &[-1.0, 1.0]]));
        assert_eq!(r.violation, Some(MMatrixViolation::NoStrictColumn));
    }

    #[test]
    fn eigenvalue_examples() {
        let d = check_spd_min_eig(&dense(&[&[1.0, 0.0, 0.0], &[0.0, 2.0, 0.0], &[0.0, 0.0, 3.0]]));
        assert!(d.spd() && (d.min_eigenvalue - 1.0).abs() < 1e-7);
        let r = check_spd_min_eig(&dense(&[&[1.0, 2.0], &[2.0, 1.0]]));
        assert!(!r.spd() && r.witness.is_some());
        assert!((r.min_eigenvalue + 1.0).abs() < 1e-6);
        let n = check_spd_min_eig(&dense(&[&[2.0, 1.0], &[0.0, 2.0]]));
        assert!(!n.symmetric && n.min_eigenvalue > 0.0);
    }

    #[test]
    fn minmax_flags_are_vacuous_without_hypothesis() {
        let bd = BoundaryData { edge_values: vec![Some(0.0), Some(1.0)], vertex_values: vec![] };
        let r = check_minmax(&[0.5, 1.2], &[0.0, 0.0], &bd);
        assert!(r.positive_ok && !r.minmax_ok);
        let r = check_minmax(&[-0.5, 1.2], &[-1.0, 0.0], &bd);
        assert!(r.positive_ok && r.minmax_ok);
    }

    #[test]
    fn affine_order_is_exact() {
        assert_eq!(observed_order(1e-15, 1e-16), None);
        assert!((observed_order(4.0, 1.0).unwrap() - 2.0).abs() < 1e-15);
        let m = Mesh::build_cartesian(2, 2, Rect::UNIT).unwrap();
        let err = convergence_study(&SchemeKind::Tpfa, &ManufacturedCase::SineIso, &[m], &SolveOptions::default());
        assert!(err.is_err());
    }
}
