//! Nonlinear schemes: monotone two-point fluxes, the multi-point minimum
//! maximum preserving scheme and the nonlinear correction of linear schemes.
//! Each is exposed as a frozen-coefficient assembler driven by Picard
//! iteration.

mod correction;
mod interp;
mod mmp;
mod monotone;

use crate::geometry::{Point, Tensor};
use crate::mesh::Mesh;
use crate::problem::Problem;
use crate::scheme::{AssembledSystem, SchemeError, SchemeKind};

pub use correction::{CellStencil, Corrected};
pub use interp::VertexInterpolator;
pub use mmp::{one_sided, Interpolation, Mmp, OneSided};
pub use monotone::{cone_decomposition, MonotonePolygonal, MonotoneTriangular};

/// What a frozen system is guaranteed to satisfy.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Guarantee {
    /// Linear scheme, no structural guarantee beyond the scheme's own.
    None,
    /// Every frozen matrix is an M-matrix; nonnegative data give nonnegative solutions.
    Monotone,
    /// Frozen fluxes are `Σ τ_{K,Z}(u_K - u_Z)`, `τ ≥ 0`; solutions with `f = 0`
    /// stay within the boundary data range.
    MinMax,
}

/// `A(U) u = B(U)`: the system frozen at the iterate `U` (cell values).
pub trait NonlinearScheme {
    fn freeze(&self, u: &[f64]) -> Result<AssembledSystem, SchemeError>;
    /// Constant vector at the midpoint of the boundary data range.
    fn initial_guess(&self) -> Vec<f64>;
    fn guarantee(&self) -> Guarantee;
    /// Anderson depth used when the Picard options leave it open.
    fn anderson_depth(&self) -> usize {
        0
    }
}

/// A linear scheme seen as a (trivially) nonlinear one.
pub struct LinearScheme {
    assembled: AssembledSystem,
}

impl LinearScheme {
    pub fn new(assembled: AssembledSystem) -> Self {
        LinearScheme { assembled }
    }
}

impl NonlinearScheme for LinearScheme {
    fn freeze(&self, _u: &[f64]) -> Result<AssembledSystem, SchemeError> {
        Ok(self.assembled.clone())
    }

    fn initial_guess(&self) -> Vec<f64> {
        midpoint_guess(&self.assembled)
    }

    fn guarantee(&self) -> Guarantee {
        Guarantee::None
    }
}

pub(crate) fn midpoint_guess(a: &AssembledSystem) -> Vec<f64> {
    let (lo, hi) = a.boundary.range();
    let m = if lo.is_finite() { 0.5 * (lo + hi) } else { 0.0 };
    vec![m; a.system.dim()]
}

pub fn build<'a>(
    kind: &SchemeKind,
    mesh: &'a Mesh,
    problem: &'a Problem,
) -> Result<Box<dyn NonlinearScheme + 'a>, SchemeError> {
    Ok(match kind {
        SchemeKind::MonoTri => Box::new(MonotoneTriangular::new(mesh, problem)?),
        SchemeKind::MonoPoly => Box::new(MonotonePolygonal::new(mesh, problem)?),
        SchemeKind::Mmp => Box::new(Mmp::new(mesh, problem)?),
        SchemeKind::Corrected { base } => Box::new(Corrected::new(base, mesh, problem)?),
        other => Box::new(LinearScheme::new(other.assemble_linear(mesh, problem)?)),
    })
}

/// `s > 0` with `x_K + s d` on the line of edge `e`.
pub(crate) fn ray_to_edge_line(mesh: &Mesh, k: usize, e: usize, d: &Point) -> Result<f64, SchemeError> {
    let n = mesh.normal(k, e);
    let dn = d.dot(&n);
    let dist = (mesh.edge_midpoint(e) - mesh.cell_point(k)).dot(&n);
    if dn <= 0.0 || dist <= 0.0 {
        return Err(SchemeError::InterpolationSupport { cell: k, edge: e });
    }
    Ok(dist / dn)
}

/// Two-point boundary flux `|σ| (u_K - u_b(y)) / s` with `y = x_K + s Λ_K n`
/// (clamped to the edge): returns `(|σ|/s, u_b(y))`.
pub(crate) fn boundary_two_point(
    mesh: &Mesh,
    problem: &Problem,
    k: usize,
    e: usize,
    tensor: &Tensor,
) -> Result<(f64, f64), SchemeError> {
    let d = tensor * mesh.normal(k, e);
    let s = ray_to_edge_line(mesh, k, e, &d)?;
    let y = mesh.cell_point(k) + d * s;
    let (a, b) = mesh.edge_endpoints(e);
    let t = ((y - a).dot(&(b - a)) / (b - a).norm_squared()).clamp(0.0, 1.0);
    let y = a + (b - a) * t;
    Ok((mesh.edge_length(e) / s, (problem.boundary)(&y)))
}

/// Cell-centred frozen system from per-cell flux forms.
pub(crate) fn cell_system(
    mesh: &Mesh,
    problem: &Problem,
    fluxes: crate::scheme::FluxOperator,
) -> Result<AssembledSystem, SchemeError> {
    let source = problem.source_integrals(mesh);
    let system = crate::scheme::cell_balance_system(&fluxes, &source)?;
    Ok(AssembledSystem {
        system,
        layout: crate::scheme::DofLayout::cells(mesh),
        fluxes,
        boundary: problem.discretize_boundary(mesh),
        source,
        dual_source: None,
    })
}
