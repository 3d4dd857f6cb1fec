//! Structured mesh generators and random vertex perturbation.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{Mesh, MeshError};
use crate::geometry::{incenter, tensor_sqrt, Point, Tensor};

/// Axis-aligned rectangle `[x0, x1] × [y0, y1]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Rect {
    pub x0: f64,
    pub x1: f64,
    pub y0: f64,
    pub y1: f64,
}

impl Rect {
    pub const UNIT: Rect = Rect { x0: 0.0, x1: 1.0, y0: 0.0, y1: 1.0 };

    pub fn new(x0: f64, x1: f64, y0: f64, y1: f64) -> Self {
        Rect { x0, x1, y0, y1 }
    }

    fn validate(&self) -> Result<(), MeshError> {
        if !(self.x1 > self.x0 && self.y1 > self.y0) {
            return Err(MeshError::InvalidParameter(format!("empty rectangle {self:?}")));
        }
        Ok(())
    }
}

/// How the cell points of a triangular mesh are placed.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum CellPointRule {
    Barycenter,
    Incenter,
    /// Incenter for the metric induced by a constant tensor.
    LambdaIncenter(Tensor),
}

fn grid_vertices(nx: usize, ny: usize, rect: &Rect) -> Vec<Point> {
    let mut v = Vec::with_capacity((nx + 1) * (ny + 1));
    for j in 0..=ny {
        let y = rect.y0 + (rect.y1 - rect.y0) * j as f64 / ny as f64;
        for i in 0..=nx {
            let x = rect.x0 + (rect.x1 - rect.x0) * i as f64 / nx as f64;
            v.push(Point::new(x, y));
        }
    }
    v
}

fn check_counts(nx: usize, ny: usize) -> Result<(), MeshError> {
    if nx == 0 || ny == 0 {
        return Err(MeshError::InvalidParameter(format!("grid size {nx}x{ny}")));
    }
    Ok(())
}

impl Mesh {
    /// `nx × ny` rectangles with barycentric cell points.
    pub fn build_cartesian(nx: usize, ny: usize, rect: Rect) -> Result<Mesh, MeshError> {
        check_counts(nx, ny)?;
        rect.validate()?;
        let id = |i: usize, j: usize| j * (nx + 1) + i;
        let cells = (0..ny)
            .flat_map(|j| (0..nx).map(move |i| vec![id(i, j), id(i + 1, j), id(i + 1, j + 1), id(i, j + 1)]))
            .collect();
        Mesh::new(grid_vertices(nx, ny, &rect), cells, None)
    }

    /// Each rectangle of an `nx × ny` grid split along its anti-diagonal.
    pub fn build_triangular(nx: usize, ny: usize, rect: Rect, rule: CellPointRule) -> Result<Mesh, MeshError> {
        check_counts(nx, ny)?;
        rect.validate()?;
        let id = |i: usize, j: usize| j * (nx + 1) + i;
        let mut cells = Vec::with_capacity(2 * nx * ny);
        for j in 0..ny {
            for i in 0..nx {
                cells.push(vec![id(i, j), id(i + 1, j), id(i, j + 1)]);
                cells.push(vec![id(i + 1, j), id(i + 1, j + 1), id(i, j + 1)]);
            }
        }
        let mesh = Mesh::new(grid_vertices(nx, ny, &rect), cells, None)?;
        match rule {
            CellPointRule::Barycenter => Ok(mesh),
            CellPointRule::Incenter => mesh.with_lambda_incenters(|_| Tensor::identity()),
            CellPointRule::LambdaIncenter(t) => mesh.with_lambda_incenters(|_| t),
        }
    }

    /// Moves every interior vertex by a uniform random offset in the disc of
    /// radius `amplitude` times its shortest incident edge. Boundary vertices
    /// stay fixed and cell points are reset to barycenters.
    pub fn perturb_random(&self, amplitude: f64, seed: u64) -> Result<Mesh, MeshError> {
        if !(0.0..0.5).contains(&amplitude) {
            return Err(MeshError::InvalidParameter(format!("perturbation amplitude {amplitude} not in [0, 0.5)")));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut vertices = self.vertices().to_vec();
        for (v, p) in vertices.iter_mut().enumerate() {
            if self.is_boundary_vertex(v) {
                continue;
            }
            let shortest = self.vertex_edges(v).iter().map(|&e| self.edge_length(e)).fold(f64::INFINITY, f64::min);
            let r = amplitude * shortest;
            let offset = loop {
                let d = Point::new(rng.gen_range(-1.0..=1.0), rng.gen_range(-1.0..=1.0));
                if d.norm_squared() <= 1.0 {
                    break d * r;
                }
            };
            *p += offset;
        }
        Mesh::new(vertices, self.cells().to_vec(), None)
    }
}

/// Incenter of a triangle in the metric where `tensor` becomes the identity.
pub(crate) fn lambda_incenter(poly: &[Point], tensor: &Tensor) -> Result<Point, MeshError> {
    if poly.len() != 3 {
        return Err(MeshError::InvalidParameter("incenters need triangular cells".into()));
    }
    if !crate::geometry::is_spd_tensor(tensor) {
        return Err(MeshError::InvalidParameter("incenter metric is not positive definite".into()));
    }
    let root = tensor_sqrt(tensor);
    let inv = root.try_inverse().ok_or_else(|| MeshError::InvalidParameter("singular metric".into()))?;
    let y: Vec<Point> = poly.iter().map(|p| inv * p).collect();
    Ok(root * incenter(&y[0], &y[1], &y[2]))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::pt;

    #[test]
    fn cartesian_counts() {
        let m = Mesh::build_cartesian(10, 10, Rect::UNIT).unwrap();
        assert_eq!(m.n_cells(), 100);
        assert_eq!(m.n_edges(), 220);
        assert!((m.cell_areas().iter().sum::<f64>() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn triangular_barycenters() {
        let m = Mesh::build_triangular(1, 1, Rect::UNIT, CellPointRule::Barycenter).unwrap();
        assert!((m.cell_point(0) - pt(1.0 / 3.0, 1.0 / 3.0)).norm() < 1e-15);
        assert!((m.cell_point(1) - pt(2.0 / 3.0, 2.0 / 3.0)).norm() < 1e-15);
        let m = Mesh::build_triangular(2, 2, Rect::UNIT, CellPointRule::Barycenter).unwrap();
        assert_eq!((m.n_cells(), m.n_edges()), (8, 16));
    }

    #[test]
    fn incenter_rule() {
        let m = Mesh::build_triangular(1, 1, Rect::UNIT, CellPointRule::Incenter).unwrap();
        let a = pt(0.0, 0.0);
        let b = pt(1.0, 0.0);
        let c = pt(0.0, 1.0);
        let (la, lb, lc) = ((b - c).norm(), (c - a).norm(), (a - b).norm());
        let want = (a * la + b * lb + c * lc) / (la + lb + lc);
        assert!((m.cell_point(0) - want).norm() < 1e-15);
    }

    #[test]
    fn lambda_incenter_identity_matches_incenter() {
        let p = [pt(0.0, 0.0), pt(2.0, 0.3), pt(0.4, 1.1)];
        let a = lambda_incenter(&p, &Tensor::identity()).unwrap();
        assert!((a - incenter(&p[0], &p[1], &p[2])).norm() < 1e-14);
    }

    #[test]
    fn perturbation_rejects_large_amplitude() {
        let m = Mesh::build_cartesian(4, 4, Rect::UNIT).unwrap();
        assert!(matches!(m.perturb_random(0.5, 1), Err(MeshError::InvalidParameter(_))));
    }

    #[test]
    fn perturbation_is_deterministic_and_bounded() {
        let m = Mesh::build_cartesian(6, 6, Rect::UNIT).unwrap();
        let a = m.perturb_random(0.3, 7).unwrap();
        let b = m.perturb_random(0.3, 7).unwrap();
        assert_eq!(a.vertices(), b.vertices());
        for v in 0..m.n_vertices() {
            let d = (a.vertex(v) - m.vertex(v)).norm();
            if m.is_boundary_vertex(v) {
                assert_eq!(d, 0.0);
            } else {
                assert!(d <= 0.3 / 6.0 + 1e-15);
            }
        }
    }
}
