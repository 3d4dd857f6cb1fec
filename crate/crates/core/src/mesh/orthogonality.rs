use super::Mesh;
use crate::geometry::{Point, Tensor};
use crate::tolerances::ORTHOGONALITY_REL;

#[derive(Debug, Clone, PartialEq)]
pub struct OrthogonalityReport {
    /// Edges failing the condition, in increasing order.
    pub violations: Vec<usize>,
    /// Fraction of edges satisfying the condition.
    pub fraction: f64,
}

impl OrthogonalityReport {
    pub fn is_orthogonal(&self) -> bool {
        self.violations.is_empty()
    }
}

impl Mesh {
    /// Intersection of the line through `x_K` directed by `Λ_K n_{K,σ}` with
    /// the line of `σ`, and the parameter `s` along that direction.
    pub fn tensor_foot(&self, k: usize, e: usize, tensor: &Tensor) -> (Point, f64) {
        let n = self.normal(k, e);
        let dir = tensor * n;
        let s = self.distance_to_edge_line(k, e) / dir.dot(&n);
        (self.cell_point(k) + dir * s, s)
    }

    /// Position of `p` along edge `e` in units of its length (0 and 1 at the ends).
    pub fn edge_coordinate(&self, e: usize, p: &Point) -> f64 {
        let (a, b) = self.edge_endpoints(e);
        (p - a).dot(&(b - a)) / (b - a).norm_squared()
    }
}

/// Checks, edge by edge, that the `Λ_K^{-1}`-orthogonal lines from the cell
/// points meet `σ` at a common point (one half-line for boundary edges).
pub fn check_orthogonality(mesh: &Mesh, tensors: &[Tensor]) -> OrthogonalityReport {
    let mut violations = Vec::new();
    for (e, edge) in mesh.edges().iter().enumerate() {
        let len = mesh.edge_length(e);
        let tol = ORTHOGONALITY_REL * len;
        let on_edge = |p: &Point| {
            let t = mesh.edge_coordinate(e, p);
            (-ORTHOGONALITY_REL..=1.0 + ORTHOGONALITY_REL).contains(&t)
        };
        let (pk, sk) = mesh.tensor_foot(edge.left, e, &tensors[edge.left]);
        let ok = match edge.right {
            None => sk > 0.0 && on_edge(&pk),
            Some(l) => {
                let (pl, sl) = mesh.tensor_foot(l, e, &tensors[l]);
                sk > 0.0 && sl > 0.0 && (pk - pl).norm() <= tol && on_edge(&pk)
            }
        };
        if !ok {
            violations.push(e);
        }
    }
    let fraction = 1.0 - violations.len() as f64 / mesh.n_edges() as f64;
    OrthogonalityReport { violations, fraction }
}
