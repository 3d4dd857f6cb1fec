//! Diffusion tensors, data functions and the manufactured test cases.

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geometry::{is_spd_tensor, segment_mean, triangle_quadrature, Point, Tensor, GAUSS2};
use crate::mesh::Mesh;
use crate::tolerances::PDE_RESIDUAL_TOL;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ProblemError {
    #[error("diffusion tensor of cell {cell} is not symmetric positive definite")]
    NotSpd { cell: usize },
    #[error("manufactured case '{case}' has PDE residual {residual:e}")]
    PdeResidual { case: String, residual: f64 },
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
}

pub type ScalarFn = Arc<dyn Fn(&Point) -> f64 + Send + Sync>;
pub type VectorFn = Arc<dyn Fn(&Point) -> Point + Send + Sync>;

/// `[δx² + y², (δ-1)xy; (δ-1)xy, x² + δy²] / (x² + y²)`, with eigenvalues
/// `δ` (radial) and `1` (tangential).
pub fn rotational_tensor(x: f64, y: f64, delta: f64) -> Tensor {
    let (x, y) = if x * x + y * y < 1e-24 { (x + 1e-12, y) } else { (x, y) };
    let r2 = x * x + y * y;
    let off = (delta - 1.0) * x * y;
    Tensor::new(delta * x * x + y * y, off, off, x * x + delta * y * y) / r2
}

#[derive(Clone)]
pub enum TensorField {
    Constant(Tensor),
    Rotational {
        delta: f64,
    },
    /// Piecewise field; `zone_of` maps a point to an index into `tensors`.
    Zoned {
        tensors: Vec<Tensor>,
        zone_of: Arc<dyn Fn(&Point) -> usize + Send + Sync>,
    },
    Custom(Arc<dyn Fn(&Point) -> Tensor + Send + Sync>),
}

impl fmt::Debug for TensorField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TensorField::Constant(t) => write!(f, "Constant({t:?})"),
            TensorField::Rotational { delta } => write!(f, "Rotational {{ delta: {delta} }}"),
            TensorField::Zoned { tensors, .. } => write!(f, "Zoned({} zones)", tensors.len()),
            TensorField::Custom(_) => write!(f, "Custom"),
        }
    }
}

/// How the cell tensor `Λ_K` is taken from the field.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CellTensorRule {
    #[default]
    AtCellPoint,
    CellAverage,
}

impl TensorField {
    pub fn identity() -> Self {
        TensorField::Constant(Tensor::identity())
    }

    pub fn diagonal(a: f64, b: f64) -> Self {
        TensorField::Constant(Tensor::new(a, 0.0, 0.0, b))
    }

    pub fn eval(&self, p: &Point) -> Tensor {
        match self {
            TensorField::Constant(t) => *t,
            TensorField::Rotational { delta } => rotational_tensor(p.x, p.y, *delta),
            TensorField::Zoned { tensors, zone_of } => tensors[zone_of(p)],
            TensorField::Custom(f) => f(p),
        }
    }

    pub fn zone(&self, p: &Point) -> usize {
        match self {
            TensorField::Zoned { zone_of, .. } => zone_of(p),
            _ => 0,
        }
    }

    pub fn is_constant(&self) -> bool {
        matches!(self, TensorField::Constant(_))
    }

    /// One tensor per cell, each checked for symmetry and definiteness.
    pub fn cell_tensors(&self, mesh: &Mesh, rule: CellTensorRule) -> Result<Vec<Tensor>, ProblemError> {
        (0..mesh.n_cells())
            .map(|k| {
                let t = match rule {
                    CellTensorRule::AtCellPoint => self.eval(&mesh.cell_point(k)),
                    CellTensorRule::CellAverage => {
                        let mut acc = Tensor::zeros();
                        for i in 0..2 {
                            for j in 0..2 {
                                acc[(i, j)] = cell_integral(mesh, k, &|p| self.eval(p)[(i, j)]);
                            }
                        }
                        acc / mesh.cell_area(k)
                    }
                };
                if is_spd_tensor(&t) {
                    Ok(t)
                } else {
                    Err(ProblemError::NotSpd { cell: k })
                }
            })
            .collect()
    }
}

/// `∫_K f`, using the edge-midpoint rule on the triangles `(x_K, v_i, v_{i+1})`.
pub fn cell_integral(mesh: &Mesh, k: usize, f: &dyn Fn(&Point) -> f64) -> f64 {
    let poly = mesh.cell_polygon(k);
    let x = mesh.cell_point(k);
    let n = poly.len();
    (0..n).map(|i| triangle_quadrature(&x, &poly[i], &poly[(i + 1) % n], f)).sum()
}

/// Dirichlet data on boundary edges (2-point Gauss mean) and boundary vertices.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundaryData {
    pub edge_values: Vec<Option<f64>>,
    pub vertex_values: Vec<Option<f64>>,
}

impl BoundaryData {
    pub fn edge(&self, e: usize) -> f64 {
        self.edge_values[e].expect("not a boundary edge")
    }

    pub fn vertex(&self, v: usize) -> f64 {
        self.vertex_values[v].expect("not a boundary vertex")
    }

    /// Smallest and largest boundary value.
    pub fn range(&self) -> (f64, f64) {
        self.edge_values
            .iter()
            .chain(self.vertex_values.iter())
            .flatten()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &v| (a.min(v), b.max(v)))
    }
}

#[derive(Clone)]
pub struct ExactSolution {
    pub u: ScalarFn,
    pub grad: VectorFn,
}

/// Data of `-div(Λ∇u) = f` in Ω, `u = u_b` on ∂Ω.
#[derive(Clone)]
pub struct Problem {
    pub tensor: TensorField,
    pub tensor_rule: CellTensorRule,
    pub source: ScalarFn,
    pub boundary: ScalarFn,
    pub exact: Option<ExactSolution>,
}

impl fmt::Debug for Problem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Problem")
            .field("tensor", &self.tensor)
            .field("tensor_rule", &self.tensor_rule)
            .field("has_exact", &self.exact.is_some())
            .finish()
    }
}

impl Problem {
    pub fn new(tensor: TensorField, source: ScalarFn, boundary: ScalarFn) -> Self {
        Problem { tensor, tensor_rule: CellTensorRule::AtCellPoint, source, boundary, exact: None }
    }

    pub fn with_exact(mut self, exact: ExactSolution) -> Self {
        self.exact = Some(exact);
        self
    }

    pub fn cell_tensors(&self, mesh: &Mesh) -> Result<Vec<Tensor>, ProblemError> {
        self.tensor.cell_tensors(mesh, self.tensor_rule)
    }

    /// `∫_K f` for every cell.
    pub fn source_integrals(&self, mesh: &Mesh) -> Vec<f64> {
        (0..mesh.n_cells()).map(|k| cell_integral(mesh, k, &*self.source)).collect()
    }

    pub fn discretize_boundary(&self, mesh: &Mesh) -> BoundaryData {
        let edge_values = (0..mesh.n_edges())
            .map(|e| {
                mesh.is_boundary_edge(e).then(|| {
                    let (a, b) = mesh.edge_endpoints(e);
                    segment_mean(&a, &b, &*self.boundary, &GAUSS2)
                })
            })
            .collect();
        let vertex_values = (0..mesh.n_vertices())
            .map(|v| mesh.is_boundary_vertex(v).then(|| (self.boundary)(&mesh.vertex(v))))
            .collect();
        BoundaryData { edge_values, vertex_values }
    }
}

/// Closed-form test cases on the unit square.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "case", rename_all = "snake_case", deny_unknown_fields)]
pub enum ManufacturedCase {
    /// `u = a x + b y + c` with a constant tensor `[[t11, t12], [t12, t22]]`.
    Affine {
        a: f64,
        b: f64,
        c: f64,
        #[serde(default = "identity_entries")]
        tensor: [f64; 3],
    },
    /// `u = x(1-x) y(1-y)`, `Λ = Id`.
    BubbleIso,
    /// `u = x(1-x) y(1-y)`, `Λ = diag(ratio, 1)`.
    BubbleAniso { ratio: f64 },
    /// `u = sin(πx) sin(πy)`, `Λ = Id`.
    SineIso,
    /// `u_0 = 1` on `(1/4, 3/4)²`, `u_b = 0`, rotational tensor.
    IndicatorTransient {
        #[serde(default = "default_delta")]
        delta: f64,
    },
}

fn identity_entries() -> [f64; 3] {
    [1.0, 0.0, 1.0]
}

fn default_delta() -> f64 {
    1e-3
}

impl ManufacturedCase {
    pub fn affine(a: f64, b: f64, c: f64) -> Self {
        ManufacturedCase::Affine { a, b, c, tensor: identity_entries() }
    }

    pub fn name(&self) -> &'static str {
        match self {
            ManufacturedCase::Affine { .. } => "affine",
            ManufacturedCase::BubbleIso => "bubble_iso",
            ManufacturedCase::BubbleAniso { .. } => "bubble_aniso",
            ManufacturedCase::SineIso => "sine_iso",
            ManufacturedCase::IndicatorTransient { .. } => "indicator_transient",
        }
    }

    pub fn tensor_field(&self) -> TensorField {
        match self {
            ManufacturedCase::Affine { tensor: t, .. } => TensorField::Constant(Tensor::new(t[0], t[1], t[1], t[2])),
            ManufacturedCase::BubbleIso | ManufacturedCase::SineIso => TensorField::identity(),
            ManufacturedCase::BubbleAniso { ratio } => TensorField::diagonal(*ratio, 1.0),
            ManufacturedCase::IndicatorTransient { delta } => TensorField::Rotational { delta: *delta },
        }
    }

    pub fn validate(&self) -> Result<(), ProblemError> {
        let t = match self.tensor_field() {
            TensorField::Constant(t) => t,
            _ => Tensor::identity(),
        };
        if !is_spd_tensor(&t) {
            return Err(ProblemError::InvalidParameter(format!("{}: tensor is not positive definite", self.name())));
        }
        if let ManufacturedCase::IndicatorTransient { delta } = self {
            if !(*delta > 0.0) {
                return Err(ProblemError::InvalidParameter("anisotropy ratio must be positive".into()));
            }
        }
        Ok(())
    }

    /// Exact solution, when the case has one.
    pub fn exact(&self) -> Option<ExactSolution> {
        match *self {
            ManufacturedCase::Affine { a, b, c, .. } => Some(ExactSolution {
                u: Arc::new(move |p| a * p.x + b * p.y + c),
                grad: Arc::new(move |_| Point::new(a, b)),
            }),
            ManufacturedCase::BubbleIso | ManufacturedCase::BubbleAniso { .. } => Some(ExactSolution {
                u: Arc::new(|p| p.x * (1.0 - p.x) * p.y * (1.0 - p.y)),
                grad: Arc::new(|p| {
                    Point::new((1.0 - 2.0 * p.x) * p.y * (1.0 - p.y), p.x * (1.0 - p.x) * (1.0 - 2.0 * p.y))
                }),
            }),
            ManufacturedCase::SineIso => Some(ExactSolution {
                u: Arc::new(|p| (PI * p.x).sin() * (PI * p.y).sin()),
                grad: Arc::new(|p| {
                    Point::new(PI * (PI * p.x).cos() * (PI * p.y).sin(), PI * (PI * p.x).sin() * (PI * p.y).cos())
                }),
            }),
            ManufacturedCase::IndicatorTransient { .. } => None,
        }
    }

    /// Hessian of the exact solution, used by the PDE self-check.
    fn hessian(&self, p: &Point) -> Option<Tensor> {
        match self {
            ManufacturedCase::Affine { .. } => Some(Tensor::zeros()),
            ManufacturedCase::BubbleIso | ManufacturedCase::BubbleAniso { .. } => {
                let xy = (1.0 - 2.0 * p.x) * (1.0 - 2.0 * p.y);
                Some(Tensor::new(-2.0 * p.y * (1.0 - p.y), xy, xy, -2.0 * p.x * (1.0 - p.x)))
            }
            ManufacturedCase::SineIso => {
                let (sx, cx) = (PI * p.x).sin_cos();
                let (sy, cy) = (PI * p.y).sin_cos();
                let d = -PI * PI * sx * sy;
                let o = PI * PI * cx * cy;
                Some(Tensor::new(d, o, o, d))
            }
            ManufacturedCase::IndicatorTransient { .. } => None,
        }
    }

    pub fn source(&self) -> ScalarFn {
        match *self {
            ManufacturedCase::Affine { .. } | ManufacturedCase::IndicatorTransient { .. } => Arc::new(|_| 0.0),
            ManufacturedCase::BubbleIso => Arc::new(|p| 2.0 * p.y * (1.0 - p.y) + 2.0 * p.x * (1.0 - p.x)),
            ManufacturedCase::BubbleAniso { ratio } => {
                Arc::new(move |p| 2.0 * ratio * p.y * (1.0 - p.y) + 2.0 * p.x * (1.0 - p.x))
            }
            ManufacturedCase::SineIso => Arc::new(|p| 2.0 * PI * PI * (PI * p.x).sin() * (PI * p.y).sin()),
        }
    }

    /// Initial datum of the transient case.
    pub fn initial(&self) -> Option<ScalarFn> {
        match self {
            ManufacturedCase::IndicatorTransient { .. } => Some(Arc::new(|p| {
                let inside = |t: f64| t > 0.25 && t < 0.75;
                if inside(p.x) && inside(p.y) {
                    1.0
                } else {
                    0.0
                }
            })),
            _ => None,
        }
    }

    pub fn problem(&self) -> Problem {
        let boundary: ScalarFn = match self.exact() {
            Some(ex) => ex.u.clone(),
            None => Arc::new(|_| 0.0),
        };
        let mut p = Problem::new(self.tensor_field(), self.source(), boundary);
        p.exact = self.exact();
        p
    }

    /// Largest `|f + Λ:D²u|` over 100 random points of the unit square.
    pub fn pde_residual(&self, seed: u64) -> f64 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let t = self.tensor_field();
        let f = self.source();
        let mut worst: f64 = 0.0;
        for _ in 0..100 {
            let p = Point::new(rng.gen(), rng.gen());
            if let Some(h) = self.hessian(&p) {
                let lam = t.eval(&p);
                let div = lam.component_mul(&h).sum();
                worst = worst.max((f(&p) + div).abs());
            }
        }
        worst
    }

    pub fn self_check(&self) -> Result<(), ProblemError> {
        self.validate()?;
        let residual = self.pde_residual(0x5eed);
        if residual < PDE_RESIDUAL_TOL {
            Ok(())
        } else {
            Err(ProblemError::PdeResidual { case: self.name().into(), residual })
        }
    }
}
