//! Shared plumbing for all schemes: unknown layouts, flux operators,
//! assembled systems and the solve dispatcher.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::hmm::StabilizationRule;
use crate::mesh::{Mesh, MeshError};
use crate::nonlinear::{self, NonlinearScheme};
use crate::problem::{BoundaryData, Problem, ProblemError};
use crate::sparse::{picard_solve, solve_with, LinearSystem, PicardOptions, SolveError, SolveMethod};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SchemeError {
    #[error(transparent)]
    Mesh(#[from] MeshError),
    #[error(transparent)]
    Problem(#[from] ProblemError),
    #[error(transparent)]
    Solve(#[from] SolveError),
    #[error("mesh is not orthogonal for this tensor on {} edge(s), first {:?}", edges.len(), edges.first())]
    NonOrthogonal { edges: Vec<usize> },
    #[error("local system around {what} {index} is singular")]
    SingularLocalSystem { what: &'static str, index: usize },
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("no interpolation support for the flux of cell {cell} on edge {edge}")]
    InterpolationSupport { cell: usize, edge: usize },
    #[error("internal error: {0}")]
    Internal(String),
}

/// One discrete unknown.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Dof {
    Cell(usize),
    Edge(usize),
    Vertex(usize),
}

/// Numbering of the free unknowns: cells first, then edges or vertices.
#[derive(Debug, Clone, PartialEq)]
pub struct DofLayout {
    dofs: Vec<Dof>,
    edge_index: Vec<Option<usize>>,
    vertex_index: Vec<Option<usize>>,
    n_cells: usize,
}

impl DofLayout {
    pub fn cells(mesh: &Mesh) -> Self {
        DofLayout {
            dofs: (0..mesh.n_cells()).map(Dof::Cell).collect(),
            edge_index: vec![None; mesh.n_edges()],
            vertex_index: vec![None; mesh.n_vertices()],
            n_cells: mesh.n_cells(),
        }
    }

    pub fn cells_and_interior_edges(mesh: &Mesh) -> Self {
        let mut l = Self::cells(mesh);
        for e in mesh.interior_edges() {
            l.edge_index[e] = Some(l.dofs.len());
            l.dofs.push(Dof::Edge(e));
        }
        l
    }

    pub fn cells_and_interior_vertices(mesh: &Mesh) -> Self {
        let mut l = Self::cells(mesh);
        for v in (0..mesh.n_vertices()).filter(|&v| !mesh.is_boundary_vertex(v)) {
            l.vertex_index[v] = Some(l.dofs.len());
            l.dofs.push(Dof::Vertex(v));
        }
        l
    }

    pub fn len(&self) -> usize {
        self.dofs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.dofs.is_empty()
    }

    pub fn n_cells(&self) -> usize {
        self.n_cells
    }

    pub fn dofs(&self) -> &[Dof] {
        &self.dofs
    }

    pub fn cell(&self, k: usize) -> usize {
        k
    }

    pub fn edge(&self, e: usize) -> Option<usize> {
        self.edge_index[e]
    }

    pub fn vertex(&self, v: usize) -> Option<usize> {
        self.vertex_index[v]
    }

    pub fn has_edges(&self) -> bool {
        self.edge_index.iter().any(Option::is_some)
    }

    pub fn has_vertices(&self) -> bool {
        self.vertex_index.iter().any(Option::is_some)
    }
}

/// `Σ c_j u_j + constant` over the free unknowns.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct LinearForm {
    pub terms: Vec<(usize, f64)>,
    pub constant: f64,
}

impl LinearForm {
    pub fn eval(&self, u: &[f64]) -> f64 {
        self.terms.iter().map(|&(j, c)| c * u[j]).sum::<f64>() + self.constant
    }

    pub fn add(&mut self, j: usize, c: f64) {
        if c != 0.0 {
            self.terms.push((j, c));
        }
    }

    pub fn add_form(&mut self, other: &LinearForm, scale: f64) {
        for &(j, c) in &other.terms {
            self.add(j, scale * c);
        }
        self.constant += scale * other.constant;
    }

    pub fn scaled(&self, s: f64) -> LinearForm {
        let mut f = LinearForm::default();
        f.add_form(self, s);
        f
    }

    /// Merges repeated indices.
    pub fn compress(mut self) -> Self {
        self.terms.sort_unstable_by_key(|t| t.0);
        let mut out: Vec<(usize, f64)> = Vec::with_capacity(self.terms.len());
        for (j, c) in self.terms {
            match out.last_mut() {
                Some(last) if last.0 == j => last.1 += c,
                _ => out.push((j, c)),
            }
        }
        out.retain(|t| t.1 != 0.0);
        self.terms = out;
        self
    }
}

/// The other end of a pairwise correction flux.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Neighbor {
    Cell(usize),
    BoundaryEdge(usize),
}

#[derive(Debug, Clone, PartialEq)]
pub struct PairFlux {
    pub cell: usize,
    pub other: Neighbor,
    pub form: LinearForm,
}

/// Discrete fluxes as linear forms of the free unknowns.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct FluxOperator {
    /// `F_{K,σ}` for each cell and local edge.
    pub cell_fluxes: Vec<Vec<LinearForm>>,
    /// Dual fluxes `F_{v,τ}` per edge, from `vertices[0]` towards `vertices[1]`.
    pub dual_fluxes: Vec<LinearForm>,
    /// Extra cell-to-cell fluxes added by a nonlinear correction.
    pub pair_fluxes: Vec<PairFlux>,
}

/// Flux values for one solution.
#[derive(Debug, Clone, PartialEq)]
pub struct Fluxes {
    pub cell: Vec<Vec<f64>>,
    pub dual: Vec<f64>,
    pub pairs: Vec<f64>,
}

impl FluxOperator {
    pub fn evaluate(&self, u: &[f64]) -> Fluxes {
        Fluxes {
            cell: self.cell_fluxes.iter().map(|fs| fs.iter().map(|f| f.eval(u)).collect()).collect(),
            dual: self.dual_fluxes.iter().map(|f| f.eval(u)).collect(),
            pairs: self.pair_fluxes.iter().map(|p| p.form.eval(u)).collect(),
        }
    }
}

/// Output of an assembly: the system, the meaning of its unknowns and the
/// flux operator needed to post-process a solution.
#[derive(Debug, Clone)]
pub struct AssembledSystem {
    pub system: LinearSystem,
    pub layout: DofLayout,
    pub fluxes: FluxOperator,
    pub boundary: BoundaryData,
    /// `∫_K f` per cell.
    pub source: Vec<f64>,
    /// `∫_{P_v} f` per vertex, for dual schemes.
    pub dual_source: Option<Vec<f64>>,
}

impl AssembledSystem {
    pub fn solve(&self, method: SolveMethod) -> Result<SolutionField, SchemeError> {
        let x = solve_with(&self.system, method)?.x;
        Ok(self.field(x))
    }

    pub fn field(&self, x: Vec<f64>) -> SolutionField {
        SolutionField::new(&self.layout, &self.boundary, x)
    }
}

/// Solution values: free unknowns plus reconstructed cell, edge and vertex values.
#[derive(Debug, Clone, PartialEq)]
pub struct SolutionField {
    pub free: Vec<f64>,
    pub cells: Vec<f64>,
    /// All edges (boundary values from the data), for hybrid schemes.
    pub edges: Option<Vec<f64>>,
    /// All vertices (boundary values from the data), for dual schemes.
    pub vertices: Option<Vec<f64>>,
}

impl SolutionField {
    pub fn new(layout: &DofLayout, boundary: &BoundaryData, free: Vec<f64>) -> Self {
        let cells = free[..layout.n_cells()].to_vec();
        let edges = layout.has_edges().then(|| {
            (0..boundary.edge_values.len())
                .map(|e| match layout.edge(e) {
                    Some(i) => free[i],
                    None => boundary.edge_values[e].unwrap_or(f64::NAN),
                })
                .collect()
        });
        let vertices = layout.has_vertices().then(|| {
            (0..boundary.vertex_values.len())
                .map(|v| match layout.vertex(v) {
                    Some(i) => free[i],
                    None => boundary.vertex_values[v].unwrap_or(f64::NAN),
                })
                .collect()
        });
        SolutionField { free, cells, edges, vertices }
    }

    pub fn min(&self) -> f64 {
        self.cells.iter().cloned().fold(f64::INFINITY, f64::min)
    }

    pub fn max(&self) -> f64 {
        self.cells.iter().cloned().fold(f64::NEG_INFINITY, f64::max)
    }
}

/// Scheme selector, as written in configuration files.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "SchemeSpec", into = "SchemeSpec")]
pub enum SchemeKind {
    Tpfa,
    MpfaO,
    MpfaL,
    Hmm { stabilization: StabilizationRule },
    Ddfv,
    MonoTri,
    MonoPoly,
    Mmp,
    Corrected { base: Box<SchemeKind> },
}

/// Flat configuration form of [`SchemeKind`].
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct SchemeSpec {
    name: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    stabilization: Option<StabilizationRule>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    base: Option<Box<SchemeSpec>>,
}

impl TryFrom<SchemeSpec> for SchemeKind {
    type Error = String;

    fn try_from(s: SchemeSpec) -> Result<Self, String> {
        let kind = match s.name.as_str() {
            "tpfa" => SchemeKind::Tpfa,
            "mpfa_o" => SchemeKind::MpfaO,
            "mpfa_l" => SchemeKind::MpfaL,
            "hmm" => SchemeKind::Hmm { stabilization: s.stabilization.clone().unwrap_or_default() },
            "ddfv" => SchemeKind::Ddfv,
            "mono_tri" => SchemeKind::MonoTri,
            "mono_poly" => SchemeKind::MonoPoly,
            "mmp" => SchemeKind::Mmp,
            "corrected" => {
                let base = s.base.ok_or("corrected scheme needs a base")?;
                return Ok(SchemeKind::Corrected { base: Box::new(SchemeKind::try_from(*base)?) });
            }
            other => return Err(format!("unknown scheme {other:?}")),
        };
        if s.stabilization.is_some() && !matches!(kind, SchemeKind::Hmm { .. }) {
            return Err(format!("scheme {} takes no stabilization", s.name));
        }
        if s.base.is_some() {
            return Err(format!("scheme {} takes no base", s.name));
        }
        Ok(kind)
    }
}

impl From<SchemeKind> for SchemeSpec {
    fn from(k: SchemeKind) -> Self {
        let name = match &k {
            SchemeKind::Corrected { .. } => "corrected".to_string(),
            other => other.label(),
        };
        match k {
            SchemeKind::Hmm { stabilization } => SchemeSpec { name, stabilization: Some(stabilization), base: None },
            SchemeKind::Corrected { base } => {
                SchemeSpec { name, stabilization: None, base: Some(Box::new((*base).into())) }
            }
            _ => SchemeSpec { name, stabilization: None, base: None },
        }
    }
}

impl SchemeKind {
    pub fn hmm() -> Self {
        SchemeKind::Hmm { stabilization: StabilizationRule::DefaultTrace }
    }

    pub fn label(&self) -> String {
        match self {
            SchemeKind::Tpfa => "tpfa".into(),
            SchemeKind::MpfaO => "mpfa_o".into(),
            SchemeKind::MpfaL => "mpfa_l".into(),
            SchemeKind::Hmm { .. } => "hmm".into(),
            SchemeKind::Ddfv => "ddfv".into(),
            SchemeKind::MonoTri => "mono_tri".into(),
            SchemeKind::MonoPoly => "mono_poly".into(),
            SchemeKind::Mmp => "mmp".into(),
            SchemeKind::Corrected { base } => format!("corrected_{}", base.label()),
        }
    }

    pub fn is_nonlinear(&self) -> bool {
        matches!(self, SchemeKind::MonoTri | SchemeKind::MonoPoly | SchemeKind::Mmp | SchemeKind::Corrected { .. })
    }

    /// Assembles a linear scheme.
    pub fn assemble_linear(&self, mesh: &Mesh, problem: &Problem) -> Result<AssembledSystem, SchemeError> {
        match self {
            SchemeKind::Tpfa => crate::tpfa::assemble_tpfa(mesh, problem),
            SchemeKind::MpfaO => crate::mpfa::assemble_mpfa_o(mesh, problem),
            SchemeKind::MpfaL => crate::mpfa::assemble_mpfa_l(mesh, problem),
            SchemeKind::Hmm { stabilization } => crate::hmm::assemble_hmm(mesh, problem, stabilization),
            SchemeKind::Ddfv => crate::ddfv::assemble_ddfv(mesh, problem),
            other => Err(SchemeError::Precondition(format!("{} is not a linear scheme", other.label()))),
        }
    }

    /// Builds the frozen-coefficient assembler of a nonlinear scheme.
    pub fn nonlinear<'a>(
        &self,
        mesh: &'a Mesh,
        problem: &'a Problem,
    ) -> Result<Box<dyn NonlinearScheme + 'a>, SchemeError> {
        nonlinear::build(self, mesh, problem)
    }
}

/// Options of [`solve_problem`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolveOptions {
    pub method: SolveMethod,
    pub picard: PicardOptions,
}

impl Default for SolveOptions {
    fn default() -> Self {
        SolveOptions { method: SolveMethod::Auto, picard: PicardOptions::default() }
    }
}

#[derive(Debug, Clone)]
pub struct SchemeSolution {
    pub field: SolutionField,
    pub fluxes: Fluxes,
    /// The system whose solution is `field` (frozen at `field` for nonlinear schemes).
    pub assembled: AssembledSystem,
    pub iterations: usize,
    pub history: Vec<f64>,
}

/// Discretises and solves `problem` on `mesh` with `kind`.
pub fn solve_problem(
    kind: &SchemeKind,
    mesh: &Mesh,
    problem: &Problem,
    opts: &SolveOptions,
) -> Result<SchemeSolution, SchemeError> {
    if kind.is_nonlinear() {
        let scheme = kind.nonlinear(mesh, problem)?;
        solve_nonlinear(scheme.as_ref(), None, &opts.picard)
    } else {
        let assembled = kind.assemble_linear(mesh, problem)?;
        let field = assembled.solve(opts.method)?;
        let fluxes = assembled.fluxes.evaluate(&field.free);
        Ok(SchemeSolution { field, fluxes, assembled, iterations: 1, history: Vec::new() })
    }
}

/// Picard iteration on a nonlinear scheme, starting from `u0` or the
/// scheme's default guess.
pub fn solve_nonlinear(
    scheme: &dyn NonlinearScheme,
    u0: Option<Vec<f64>>,
    opts: &PicardOptions,
) -> Result<SchemeSolution, SchemeError> {
    let opts = &PicardOptions { anderson: Some(opts.anderson.unwrap_or_else(|| scheme.anderson_depth())), ..*opts };
    let mut last: Option<AssembledSystem> = None;
    let start = u0.unwrap_or_else(|| scheme.initial_guess());
    let out = picard_solve(
        |u: &[f64]| {
            let a = scheme.freeze(u)?;
            let sys = a.system.clone();
            last = Some(a);
            Ok::<_, SchemeError>(sys)
        },
        start,
        opts,
    )?;
    let assembled = last.ok_or_else(|| SchemeError::Internal("no frozen system".into()))?;
    let field = assembled.field(out.solution);
    let fluxes = assembled.fluxes.evaluate(&field.free);
    Ok(SchemeSolution { field, fluxes, assembled, iterations: out.iterations, history: out.history })
}

/// Builds a system whose rows are the cell balances `Σ_σ F_{K,σ} = ∫_K f`
/// from per-cell flux forms over cell unknowns.
pub(crate) fn cell_balance_system(fluxes: &FluxOperator, source: &[f64]) -> Result<LinearSystem, SolveError> {
    let n = source.len();
    let mut b = crate::sparse::TripletBuilder::new(n);
    let mut rhs = source.to_vec();
    for (k, forms) in fluxes.cell_fluxes.iter().enumerate() {
        for f in forms {
            for &(j, c) in &f.terms {
                b.add(k, j, c);
            }
            rhs[k] -= f.constant;
        }
    }
    for p in &fluxes.pair_fluxes {
        for &(j, c) in &p.form.terms {
            b.add(p.cell, j, c);
        }
        rhs[p.cell] -= p.form.constant;
    }
    LinearSystem::new(b.finalize()?, rhs)
}
