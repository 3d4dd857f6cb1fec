//! Hybrid mimetic mixed scheme: cell and edge unknowns, a consistent cell
//! gradient plus a stabilised Taylor residual, and flux recovery through the
//! equivalent mixed finite volume inner product.

use nalgebra::{DMatrix, DVector, Matrix2};
use serde::{Deserialize, Serialize};

use crate::geometry::{Point, Tensor};
use crate::mesh::Mesh;
use crate::problem::Problem;
use crate::scheme::{AssembledSystem, DofLayout, FluxOperator, LinearForm, SchemeError};
use crate::sparse::{LinearSystem, TripletBuilder};

/// Choice of the stabilisation matrix `B̃_K`.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StabilizationRule {
    /// `diag(tr(Λ_K)/2 · |σ| / d(x_K, x̄_σ))`.
    #[default]
    DefaultTrace,
    /// The default matrix times `factor > 0`.
    Scaled { factor: f64 },
    /// `B̃_K = 0`, only accepted on triangles.
    Zero,
    /// A fixed symmetric positive definite matrix, one row per local edge.
    User { matrix: Vec<Vec<f64>> },
}

/// Builds `B̃_K` for cell `k`.
pub fn build_stabilization(
    mesh: &Mesh,
    k: usize,
    tensor: &Tensor,
    rule: &StabilizationRule,
) -> Result<DMatrix<f64>, SchemeError> {
    let edges = mesh.cell_edges(k);
    let n = edges.len();
    let default = || {
        let tr = 0.5 * tensor.trace();
        DMatrix::from_diagonal(&DVector::from_iterator(
            n,
            edges.iter().map(|&e| tr * mesh.edge_length(e) / (mesh.edge_midpoint(e) - mesh.cell_point(k)).norm()),
        ))
    };
    match rule {
        StabilizationRule::DefaultTrace => Ok(default()),
        StabilizationRule::Scaled { factor } => {
            if !(*factor > 0.0) {
                return Err(SchemeError::Precondition(format!("stabilization factor {factor} must be positive")));
            }
            Ok(default() * *factor)
        }
        StabilizationRule::Zero => {
            if n != 3 {
                return Err(SchemeError::Precondition(format!("zero stabilization on non-triangular cell {k}")));
            }
            Ok(DMatrix::zeros(3, 3))
        }
        StabilizationRule::User { matrix } => {
            if matrix.len() != n || matrix.iter().any(|r| r.len() != n) {
                return Err(SchemeError::Precondition(format!("user stabilization must be {n}x{n} on cell {k}")));
            }
            let m = DMatrix::from_fn(n, n, |i, j| matrix[i][j]);
            let sym = (&m - m.transpose()).amax() <= 1e-12 * m.amax();
            if !sym || m.clone().cholesky().is_none() {
                return Err(SchemeError::Precondition(format!("user stabilization is not SPD on cell {k}")));
            }
            Ok(m)
        }
    }
}

/// Local operators of one cell. Local unknowns are `(u_K, u_σ1, ..., u_σn)`.
#[derive(Debug, Clone)]
pub struct LocalHmm {
    pub cell: usize,
    pub area: f64,
    pub tensor: Tensor,
    /// Cell gradient, 2 × (n+1).
    pub gradient: DMatrix<f64>,
    /// Taylor residuals `S_{K,σ}`, n × (n+1).
    pub residual: DMatrix<f64>,
    pub stabilization: DMatrix<f64>,
    /// Local bilinear form `|K| Λ∇u·∇v + S(v)ᵀ B̃ S(u)`, (n+1) × (n+1).
    pub form: DMatrix<f64>,
    /// The form on the increments `δ_σ = u_K - u_σ`, so that `F = A δ`.
    pub increments_form: DMatrix<f64>,
    /// `v_K(F) = V F`, 2 × n.
    pub v_op: DMatrix<f64>,
    /// `T_{K,σ}(F) = (T F)_σ`, n × n.
    pub t_op: DMatrix<f64>,
    /// Mixed stabilisation `B_K` induced by `B̃_K`.
    pub mixed_stabilization: DMatrix<f64>,
    /// Mixed inner product matrix `[F, G]_K = Gᵀ M F`.
    pub inner_product: DMatrix<f64>,
}

fn symmetrize(m: &DMatrix<f64>) -> DMatrix<f64> {
    (m + m.transpose()) * 0.5
}

/// `∇_K u = (1/|K|) Σ |σ| (u_σ - u_K) n_{K,σ}`.
pub fn hmm_cell_gradient(mesh: &Mesh, k: usize, u_k: f64, u_edges: &[f64]) -> Point {
    mesh.cell_edges(k)
        .iter()
        .zip(u_edges)
        .map(|(&e, &u)| mesh.normal(k, e) * (mesh.edge_length(e) * (u - u_k)))
        .sum::<Point>()
        / mesh.cell_area(k)
}

pub fn local_hmm(mesh: &Mesh, k: usize, tensor: &Tensor, rule: &StabilizationRule) -> Result<LocalHmm, SchemeError> {
    let edges = mesh.cell_edges(k);
    let n = edges.len();
    let area = mesh.cell_area(k);
    let xk = mesh.cell_point(k);
    let lam = DMatrix::from_fn(2, 2, |i, j| tensor[(i, j)]);

    let mut gradient = DMatrix::zeros(2, n + 1);
    for (i, &e) in edges.iter().enumerate() {
        let w = mesh.normal(k, e) * (mesh.edge_length(e) / area);
        gradient[(0, i + 1)] = w.x;
        gradient[(1, i + 1)] = w.y;
        gradient[(0, 0)] -= w.x;
        gradient[(1, 0)] -= w.y;
    }
    let mut residual = DMatrix::zeros(n, n + 1);
    for (i, &e) in edges.iter().enumerate() {
        let d = mesh.edge_midpoint(e) - xk;
        residual[(i, 0)] = -1.0;
        residual[(i, i + 1)] = 1.0;
        for j in 0..=n {
            residual[(i, j)] -= d.x * gradient[(0, j)] + d.y * gradient[(1, j)];
        }
    }
    let stabilization = build_stabilization(mesh, k, tensor, rule)?;
    let form = symmetrize(
        &(gradient.transpose() * &lam * &gradient * area + residual.transpose() * &stabilization * &residual),
    );
    let increments_form = form.view((1, 1), (n, n)).into_owned();
    if increments_form.clone().cholesky().is_none() {
        return Err(SchemeError::Precondition(format!(
            "local HMM form of cell {k} is not positive definite (stabilization {rule:?})"
        )));
    }

    // Mixed operators: v_K(F) = -(1/|K|) Λ⁻¹ Σ F_σ (x̄_σ - x_K),
    // T_σ(F) = F_σ/|σ| + Λ v_K(F)·n_σ.
    let lam_inv = tensor.try_inverse().ok_or(SchemeError::SingularLocalSystem { what: "cell", index: k })?;
    let mut v_op = DMatrix::zeros(2, n);
    for (j, &e) in edges.iter().enumerate() {
        let w = lam_inv * (mesh.edge_midpoint(e) - xk) * (-1.0 / area);
        v_op[(0, j)] = w.x;
        v_op[(1, j)] = w.y;
    }
    let mut t_op = DMatrix::zeros(n, n);
    for (i, &e) in edges.iter().enumerate() {
        let ln = tensor * mesh.normal(k, e);
        t_op[(i, i)] += 1.0 / mesh.edge_length(e);
        for j in 0..n {
            t_op[(i, j)] += ln.x * v_op[(0, j)] + ln.y * v_op[(1, j)];
        }
    }
    let consistency = symmetrize(&(v_op.transpose() * &lam * &v_op * area));
    let a_inv =
        increments_form.clone().try_inverse().ok_or(SchemeError::SingularLocalSystem { what: "cell", index: k })?;
    let a_inv = symmetrize(&a_inv);
    // B_K solves Tᵀ B T = A⁻¹ - |K| Vᵀ Λ V on the range of T, and is the
    // identity on its orthogonal complement.
    let rest = &a_inv - &consistency;
    // ker T holds the consistent fluxes |σ| Λ g·n_σ; with Q an orthonormal
    // basis of it, T⁺ = (TᵀT + QQᵀ)⁻¹ Tᵀ.
    let mut kernel = DMatrix::zeros(n, 2);
    for (i, &e) in edges.iter().enumerate() {
        let ln = tensor * mesh.normal(k, e) * mesh.edge_length(e);
        kernel[(i, 0)] = ln.x;
        kernel[(i, 1)] = ln.y;
    }
    let q = kernel.qr().q();
    let gram = t_op.transpose() * &t_op + &q * q.transpose();
    let t_pinv =
        gram.cholesky().ok_or(SchemeError::SingularLocalSystem { what: "cell", index: k })?.solve(&t_op.transpose());
    let complement = DMatrix::identity(n, n) - &t_op * &t_pinv;
    let mixed_stabilization = symmetrize(&(t_pinv.transpose() * &rest * &t_pinv + complement));
    let inner_product = symmetrize(&(&consistency + t_op.transpose() * &mixed_stabilization * &t_op));

    Ok(LocalHmm {
        cell: k,
        area,
        tensor: *tensor,
        gradient,
        residual,
        stabilization,
        form,
        increments_form,
        v_op,
        t_op,
        mixed_stabilization,
        inner_product,
    })
}

impl LocalHmm {
    /// `[F, G]_K`.
    pub fn inner(&self, f: &[f64], g: &[f64]) -> f64 {
        let f = DVector::from_column_slice(f);
        let g = DVector::from_column_slice(g);
        (g.transpose() * &self.inner_product * f)[(0, 0)]
    }

    /// `v_K(F)`.
    pub fn v(&self, f: &[f64]) -> Point {
        let r = &self.v_op * DVector::from_column_slice(f);
        Point::new(r[0], r[1])
    }

    /// Solves `[F, G]_K = Σ_σ (u_K - u_σ) G_σ` for `F`: the matrix mapping
    /// increments to fluxes.
    pub fn flux_matrix(&self) -> Result<DMatrix<f64>, SchemeError> {
        self.inner_product
            .clone()
            .try_inverse()
            .ok_or(SchemeError::SingularLocalSystem { what: "cell", index: self.cell })
    }
}

fn lambda_matrix(t: &Tensor) -> Matrix2<f64> {
    *t
}

/// Assembles the hybrid system over cells and interior edges.
pub fn assemble_hmm(mesh: &Mesh, problem: &Problem, rule: &StabilizationRule) -> Result<AssembledSystem, SchemeError> {
    if matches!(rule, StabilizationRule::Zero) {
        return Err(SchemeError::Precondition(
            "zero stabilization leaves the cell unknowns of the hybrid system undetermined".into(),
        ));
    }
    let tensors = problem.cell_tensors(mesh)?;
    let boundary = problem.discretize_boundary(mesh);
    let source = problem.source_integrals(mesh);
    let layout = DofLayout::cells_and_interior_edges(mesh);
    let n = layout.len();
    let mut b = TripletBuilder::new(n);
    let mut rhs = vec![0.0; n];
    rhs[..mesh.n_cells()].copy_from_slice(&source);
    let mut cell_fluxes = Vec::with_capacity(mesh.n_cells());

    for k in 0..mesh.n_cells() {
        let local = local_hmm(mesh, k, &lambda_matrix(&tensors[k]), rule)?;
        let edges = mesh.cell_edges(k);
        // Local unknown j -> free index or fixed value.
        let slots: Vec<Result<usize, f64>> = std::iter::once(Ok(k))
            .chain(edges.iter().map(|&e| layout.edge(e).ok_or_else(|| boundary.edge(e))))
            .collect();
        for (i, si) in slots.iter().enumerate() {
            let Ok(row) = *si else { continue };
            for (j, sj) in slots.iter().enumerate() {
                let a = local.form[(i, j)];
                match *sj {
                    Ok(col) => b.add(row, col, a),
                    Err(value) => rhs[row] -= a * value,
                }
            }
        }
        let fm = local.flux_matrix()?;
        let forms = (0..edges.len())
            .map(|i| {
                let mut f = LinearForm::default();
                for j in 0..edges.len() {
                    let c = fm[(i, j)];
                    f.add(k, c);
                    match slots[j + 1] {
                        Ok(col) => f.add(col, -c),
                        Err(value) => f.constant -= c * value,
                    }
                }
                f.compress()
            })
            .collect();
        cell_fluxes.push(forms);
    }
    let system = LinearSystem::new(b.finalize()?, rhs)?;
    Ok(AssembledSystem {
        system,
        layout,
        fluxes: FluxOperator { cell_fluxes, ..Default::default() },
        boundary,
        source,
        dual_source: None,
    })
}

/// The hybrid system with the interior edge unknowns eliminated:
/// `Σ_σ F_{K,σ} = Σ_L S_{KL} u_L + Σ_g W_{Kg} u_g`.
#[derive(Debug, Clone)]
pub struct CondensedHmm {
    pub cell_matrix: DMatrix<f64>,
    /// Columns indexed by edge; only boundary edges are nonzero.
    pub boundary_matrix: DMatrix<f64>,
    /// `F_{K,σ}` as forms of the cell unknowns, boundary data in the constants.
    pub cell_fluxes: Vec<Vec<LinearForm>>,
}

pub fn condense_hmm(mesh: &Mesh, problem: &Problem, rule: &StabilizationRule) -> Result<CondensedHmm, SchemeError> {
    let tensors = problem.cell_tensors(mesh)?;
    let boundary = problem.discretize_boundary(mesh);
    let layout = DofLayout::cells_and_interior_edges(mesh);
    let nc = mesh.n_cells();
    let ne = layout.len() - nc;
    let n_edges = mesh.n_edges();
    let mut a_cc = DMatrix::zeros(nc, nc);
    let mut a_ce = DMatrix::zeros(nc, ne);
    let mut a_ee = DMatrix::zeros(ne, ne);
    let mut b_cb = DMatrix::zeros(nc, n_edges);
    let mut b_eb = DMatrix::zeros(ne, n_edges);
    let mut locals = Vec::with_capacity(nc);
    for k in 0..nc {
        let local = local_hmm(mesh, k, &tensors[k], rule)?;
        // Local index -> (is_cell, free index) or boundary edge.
        let slots: Vec<Result<(bool, usize), usize>> = std::iter::once(Ok((true, k)))
            .chain(mesh.cell_edges(k).iter().map(|&e| layout.edge(e).map(|i| (false, i - nc)).ok_or(e)))
            .collect();
        for (i, si) in slots.iter().enumerate() {
            let Ok((row_cell, row)) = *si else { continue };
            for (j, sj) in slots.iter().enumerate() {
                let v = local.form[(i, j)];
                match (row_cell, *sj) {
                    (true, Ok((true, c))) => a_cc[(row, c)] += v,
                    (true, Ok((false, c))) => a_ce[(row, c)] += v,
                    (false, Ok((false, c))) => a_ee[(row, c)] += v,
                    (false, Ok((true, _))) => {}
                    (true, Err(g)) => b_cb[(row, g)] += v,
                    (false, Err(g)) => b_eb[(row, g)] += v,
                }
            }
        }
        locals.push(local.flux_matrix()?);
    }
    let chol = a_ee.cholesky().ok_or(SchemeError::SingularLocalSystem { what: "edge block", index: 0 })?;
    let e_c = -chol.solve(&a_ce.transpose());
    let e_b = -chol.solve(&b_eb);
    let cell_matrix = symmetrize(&(&a_cc + &a_ce * &e_c));
    let boundary_matrix = &b_cb + &a_ce * &e_b;
    let ub = DVector::from_iterator(n_edges, boundary.edge_values.iter().map(|v| v.unwrap_or(0.0)));
    let e_const = &e_b * &ub;

    // u_σ as a form of the cell unknowns.
    let edge_form = |e: usize| -> LinearForm {
        match layout.edge(e) {
            Some(i) => {
                let r = i - nc;
                let mut f = LinearForm { terms: Vec::new(), constant: e_const[r] };
                for c in 0..nc {
                    f.add(c, e_c[(r, c)]);
                }
                f
            }
            None => LinearForm { terms: Vec::new(), constant: boundary.edge(e) },
        }
    };
    let edge_forms: Vec<LinearForm> = (0..n_edges).map(edge_form).collect();
    let cell_fluxes = (0..nc)
        .map(|k| {
            let edges = mesh.cell_edges(k);
            let fm = &locals[k];
            (0..edges.len())
                .map(|i| {
                    let mut f = LinearForm::default();
                    for (j, &e) in edges.iter().enumerate() {
                        f.add(k, fm[(i, j)]);
                        f.add_form(&edge_forms[e], -fm[(i, j)]);
                    }
                    f.compress()
                })
                .collect()
        })
        .collect();
    Ok(CondensedHmm { cell_matrix, boundary_matrix, cell_fluxes })
}
