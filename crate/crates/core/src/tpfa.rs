//! Two-point flux approximation on orthogonal meshes.

use crate::mesh::{check_orthogonality, Mesh};
use crate::problem::Problem;
use crate::scheme::{cell_balance_system, AssembledSystem, DofLayout, FluxOperator, LinearForm, SchemeError};

/// Interior transmissibility `|σ| λ_K λ_L / (λ_K d_L + λ_L d_K)`, where
/// `d_K = d(x_K, x_σ)` and `d_L = d(x_L, x_σ)`.
pub fn two_point_transmissibility(len: f64, d_k: f64, d_l: f64, lam_k: f64, lam_l: f64) -> f64 {
    len * lam_k * lam_l / (lam_k * d_l + lam_l * d_k)
}

/// Boundary transmissibility `λ_K |σ| / d(x_K, σ)`.
pub fn boundary_transmissibility(len: f64, d_k: f64, lam_k: f64) -> f64 {
    lam_k * len / d_k
}

/// Half-transmissibility `|σ| / s_K` of cell `k` on edge `e`, where
/// `x_K + s_K Λ_K n_{K,σ}` lies on `σ`. Equals `|σ| λ_K / d(x_K, σ)` for `Λ_K = λ_K Id`.
fn half_transmissibility(mesh: &Mesh, k: usize, e: usize, tensor: &crate::Tensor) -> f64 {
    let (_, s) = mesh.tensor_foot(k, e, tensor);
    mesh.edge_length(e) / s
}

/// Transmissibility of every edge.
pub fn transmissibilities(mesh: &Mesh, problem: &Problem) -> Result<Vec<f64>, SchemeError> {
    let tensors = problem.cell_tensors(mesh)?;
    let report = check_orthogonality(mesh, &tensors);
    if !report.is_orthogonal() {
        return Err(SchemeError::NonOrthogonal { edges: report.violations });
    }
    Ok(mesh
        .edges()
        .iter()
        .enumerate()
        .map(|(e, edge)| {
            let ck = half_transmissibility(mesh, edge.left, e, &tensors[edge.left]);
            match edge.right {
                None => ck,
                Some(l) => {
                    let cl = half_transmissibility(mesh, l, e, &tensors[l]);
                    ck * cl / (ck + cl)
                }
            }
        })
        .collect())
}

/// `Σ_σ τ_σ (u_K - u_L) + Σ_{σ ext} τ_σ (u_K - u_σ) = ∫_K f`.
pub fn assemble_tpfa(mesh: &Mesh, problem: &Problem) -> Result<AssembledSystem, SchemeError> {
    let tau = transmissibilities(mesh, problem)?;
    let boundary = problem.discretize_boundary(mesh);
    let source = problem.source_integrals(mesh);
    let cell_fluxes = (0..mesh.n_cells())
        .map(|k| {
            mesh.cell_edges(k)
                .iter()
                .map(|&e| {
                    let t = tau[e];
                    let mut f = LinearForm::default();
                    f.add(k, t);
                    match mesh.edge(e).other(k) {
                        Some(l) => f.add(l, -t),
                        None => f.constant = -t * boundary.edge(e),
                    }
                    f
                })
                .collect()
        })
        .collect();
    let fluxes = FluxOperator { cell_fluxes, ..Default::default() };
    let system = cell_balance_system(&fluxes, &source)?;
    Ok(AssembledSystem { system, layout: DofLayout::cells(mesh), fluxes, boundary, source, dual_source: None })
}
