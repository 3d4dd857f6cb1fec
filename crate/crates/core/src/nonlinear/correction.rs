//! Nonlinear correction of a coercive cell-centred linear scheme:
//! `S_K(u) = A_K(u) + Σ_Z β_{K,Z}(u) (u_K - u_Z)` with symmetric `β ≥ lower bounds`.

use super::{cell_system, Guarantee, NonlinearScheme};
use crate::mesh::Mesh;
use crate::problem::{BoundaryData, Problem};
use crate::scheme::{AssembledSystem, FluxOperator, LinearForm, Neighbor, PairFlux, SchemeError, SchemeKind};
use crate::tolerances::CORRECTION_EPS_REL;

/// `A_K(u) = Σ_{Z ∈ V(K)} a_{K,Z} (u_K - u_Z)`.
#[derive(Debug, Clone, PartialEq)]
pub struct CellStencil {
    pub rows: Vec<Vec<(Neighbor, f64)>>,
}

impl CellStencil {
    /// First pair `(K, Z)` with `Z ∈ V(K)` but `K ∉ V(Z)`.
    pub fn asymmetry(&self) -> Option<(usize, usize)> {
        self.rows.iter().enumerate().find_map(|(k, row)| {
            row.iter().find_map(|&(z, _)| match z {
                Neighbor::Cell(j) if !self.rows[j].iter().any(|&(y, _)| y == Neighbor::Cell(k)) => Some((k, j)),
                _ => None,
            })
        })
    }

    pub fn scale(&self) -> f64 {
        self.rows.iter().flatten().fold(0.0, |m, &(_, a)| m.max(a.abs()))
    }
}

/// Base schemes admitted by the correction.
fn base_operator(
    base: &SchemeKind,
    mesh: &Mesh,
    problem: &Problem,
) -> Result<(CellStencil, Vec<Vec<LinearForm>>), SchemeError> {
    match base {
        SchemeKind::Tpfa => {
            let tau = crate::tpfa::transmissibilities(mesh, problem)?;
            let assembled = crate::tpfa::assemble_tpfa(mesh, problem)?;
            let rows = (0..mesh.n_cells())
                .map(|k| {
                    mesh.cell_edges(k)
                        .iter()
                        .map(|&e| match mesh.edge(e).other(k) {
                            Some(l) => (Neighbor::Cell(l), tau[e]),
                            None => (Neighbor::BoundaryEdge(e), tau[e]),
                        })
                        .collect()
                })
                .collect();
            Ok((CellStencil { rows }, assembled.fluxes.cell_fluxes))
        }
        SchemeKind::Hmm { stabilization } => {
            let c = crate::hmm::condense_hmm(mesh, problem, stabilization)?;
            let s = &c.cell_matrix;
            let w = &c.boundary_matrix;
            let tol = 1e-14 * s.amax();
            let rows = (0..mesh.n_cells())
                .map(|k| {
                    let cells = (0..mesh.n_cells())
                        .filter(|&j| j != k && s[(k, j)].abs() > tol)
                        .map(|j| (Neighbor::Cell(j), -s[(k, j)]));
                    let edges = mesh
                        .boundary_edges()
                        .filter(|&g| w[(k, g)].abs() > tol)
                        .map(|g| (Neighbor::BoundaryEdge(g), -w[(k, g)]));
                    cells.chain(edges).collect()
                })
                .collect();
            Ok((CellStencil { rows }, c.cell_fluxes))
        }
        other => Err(SchemeError::Precondition(format!(
            "the correction needs a coercive cell-centred base (tpfa or hmm), got {}",
            other.label()
        ))),
    }
}

pub struct Corrected<'a> {
    mesh: &'a Mesh,
    problem: &'a Problem,
    bd: BoundaryData,
    stencil: CellStencil,
    base_fluxes: Vec<Vec<LinearForm>>,
    /// Neighbouring pairs (sharing an edge) get `β > 0`.
    neighbours: Vec<Vec<Neighbor>>,
    eps: f64,
}

impl<'a> Corrected<'a> {
    pub fn new(base: &SchemeKind, mesh: &'a Mesh, problem: &'a Problem) -> Result<Self, SchemeError> {
        let (stencil, base_fluxes) = base_operator(base, mesh, problem)?;
        if let Some((k, z)) = stencil.asymmetry() {
            return Err(SchemeError::Precondition(format!(
                "base stencil is not symmetric: {z} in V({k}) but not conversely"
            )));
        }
        let neighbours = (0..mesh.n_cells())
            .map(|k| {
                mesh.cell_edges(k)
                    .iter()
                    .map(|&e| mesh.edge(e).other(k).map_or(Neighbor::BoundaryEdge(e), Neighbor::Cell))
                    .collect()
            })
            .collect();
        let eps = CORRECTION_EPS_REL * stencil.scale();
        Ok(Corrected { mesh, problem, bd: problem.discretize_boundary(mesh), stencil, base_fluxes, neighbours, eps })
    }

    pub fn stencil(&self) -> &CellStencil {
        &self.stencil
    }

    fn value(&self, z: Neighbor, u: &[f64]) -> f64 {
        match z {
            Neighbor::Cell(c) => u[c],
            Neighbor::BoundaryEdge(e) => self.bd.edge(e),
        }
    }

    /// `A_K(u)` for every cell.
    pub fn base_residuals(&self, u: &[f64]) -> Vec<f64> {
        self.stencil
            .rows
            .iter()
            .enumerate()
            .map(|(k, row)| row.iter().map(|&(z, a)| a * (u[k] - self.value(z, u))).sum())
            .collect()
    }

    /// `lb_K = |A_K(u)| / Σ_Y |u_K - u_Y|`, zero when the denominator vanishes.
    pub fn lower_bounds(&self, u: &[f64]) -> Vec<f64> {
        let a = self.base_residuals(u);
        self.stencil
            .rows
            .iter()
            .enumerate()
            .map(|(k, row)| {
                let d: f64 = row.iter().map(|&(z, _)| (u[k] - self.value(z, u)).abs()).sum();
                if d > 0.0 {
                    a[k].abs() / d
                } else {
                    0.0
                }
            })
            .collect()
    }

    /// `β_{K,Z}(u)` over `V(K)`, symmetric in cell pairs.
    pub fn betas(&self, u: &[f64]) -> Vec<Vec<(Neighbor, f64)>> {
        let lb = self.lower_bounds(u);
        self.stencil
            .rows
            .iter()
            .enumerate()
            .map(|(k, row)| {
                row.iter()
                    .map(|&(z, _)| {
                        let mut b = match z {
                            Neighbor::Cell(j) => lb[k].max(lb[j]),
                            Neighbor::BoundaryEdge(_) => lb[k],
                        };
                        if self.neighbours[k].contains(&z) {
                            b += self.eps;
                        }
                        (z, b)
                    })
                    .collect()
            })
            .collect()
    }

    /// `½ Σ_{K,Z} β_{K,Z} (u_K - u_Z)²` over cell pairs plus the boundary terms.
    pub fn correction_energy(&self, u: &[f64], beta_at: &[f64]) -> f64 {
        self.betas(beta_at)
            .iter()
            .enumerate()
            .flat_map(|(k, row)| row.iter().map(move |&(z, b)| (k, z, b)))
            .map(|(k, z, b)| {
                let d = u[k] - self.value(z, u);
                match z {
                    Neighbor::Cell(_) => 0.5 * b * d * d,
                    Neighbor::BoundaryEdge(_) => b * d * d,
                }
            })
            .sum()
    }
}

impl NonlinearScheme for Corrected<'_> {
    fn freeze(&self, u: &[f64]) -> Result<AssembledSystem, SchemeError> {
        let pair_fluxes = self
            .betas(u)
            .into_iter()
            .enumerate()
            .flat_map(|(k, row)| row.into_iter().map(move |(z, b)| (k, z, b)))
            .filter(|&(_, _, b)| b > 0.0)
            .map(|(k, z, b)| {
                let mut f = LinearForm::default();
                f.add(k, b);
                match z {
                    Neighbor::Cell(j) => f.add(j, -b),
                    Neighbor::BoundaryEdge(e) => f.constant = -b * self.bd.edge(e),
                }
                PairFlux { cell: k, other: z, form: f }
            })
            .collect();
        let fluxes = FluxOperator { cell_fluxes: self.base_fluxes.clone(), dual_fluxes: Vec::new(), pair_fluxes };
        cell_system(self.mesh, self.problem, fluxes)
    }

    fn initial_guess(&self) -> Vec<f64> {
        let (lo, hi) = self.bd.range();
        vec![if lo.is_finite() { 0.5 * (lo + hi) } else { 0.0 }; self.mesh.n_cells()]
    }

    fn guarantee(&self) -> Guarantee {
        Guarantee::MinMax
    }

    /// The plain iteration contracts very slowly here.
    fn anderson_depth(&self) -> usize {
        10
    }
}
