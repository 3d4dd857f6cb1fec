//! Diamond cells (one per edge) and interaction regions (one per vertex).

use super::{Mesh, MeshError};
use crate::geometry::{cross, perp, polygon_signed_area, signed_triangle_area, Point};

/// The diamond `D_σ` spanned by the edge `σ = [v, v']` and the points
/// `x_K`, `x_L` (the edge midpoint on the boundary).
#[derive(Debug, Clone)]
pub struct Diamond {
    pub edge: usize,
    pub cells: (usize, Option<usize>),
    /// Edge endpoints, counter-clockwise for `cells.0`.
    pub vertices: [usize; 2],
    pub x_k: Point,
    pub x_l: Point,
    pub area: f64,
    /// Areas of `D ∩ K` and `D ∩ L`.
    pub half_areas: [f64; 2],
    /// Areas of the parts of `D` in the dual cells of `vertices[0]` and `vertices[1]`.
    pub dual_areas: [f64; 2],
    /// `n_{K,σ}`.
    pub n_sigma: Point,
    /// Unit normal to `τ = [x_K, x_L]` pointing from `v` towards `v'`.
    pub n_tau: Point,
    pub len_sigma: f64,
    pub len_tau: f64,
}

impl Diamond {
    /// Coefficients of `(u_K, u_L, u_v, u_v')` in the diamond gradient.
    pub fn gradient_coefficients(&self) -> [Point; 4] {
        let s = self.n_sigma * (self.len_sigma / (2.0 * self.area));
        let t = self.n_tau * (self.len_tau / (2.0 * self.area));
        [-s, s, -t, t]
    }

    /// Diamond gradient of the four values `(u_K, u_L, u_v, u_v')`.
    pub fn gradient(&self, u: [f64; 4]) -> Point {
        let c = self.gradient_coefficients();
        c[0] * u[0] + c[1] * u[1] + c[2] * u[2] + c[3] * u[3]
    }
}

/// The part of cell `K` around vertex `v`: `(x_K, x̄_in, v, x̄_out)`, where the
/// edge `in` arrives at `v` and `out` leaves it counter-clockwise.
#[derive(Debug, Clone)]
pub struct SubCell {
    pub cell: usize,
    pub vertex: usize,
    /// `[edge_in, edge_out]`.
    pub edges: [usize; 2],
    pub midpoints: [Point; 2],
    /// Area `T` of the triangle `(x_K, x̄_in, x̄_out)`.
    pub triangle_area: f64,
    /// Area of the quadrilateral `(x_K, x̄_in, v, x̄_out)`.
    pub area: f64,
    /// Outward normals `ν` of the triangle sides `[x_K, x̄_in]` and `[x_K, x̄_out]`,
    /// with the lengths of those sides.
    pub nu: [Point; 2],
}

impl SubCell {
    /// Gradient coefficients of `(u_K, u_in, u_out)`.
    pub fn gradient_coefficients(&self) -> [Point; 3] {
        let f = -1.0 / (2.0 * self.triangle_area);
        let c_in = self.nu[1] * f;
        let c_out = self.nu[0] * f;
        [-(c_in + c_out), c_in, c_out]
    }

    pub fn gradient(&self, u_k: f64, u_in: f64, u_out: f64) -> Point {
        let c = self.gradient_coefficients();
        c[0] * u_k + c[1] * u_in + c[2] * u_out
    }
}

#[derive(Debug, Clone)]
pub struct InteractionRegion {
    pub vertex: usize,
    /// Sub-cells in counter-clockwise order around the vertex.
    pub subcells: Vec<SubCell>,
}

impl InteractionRegion {
    pub fn area(&self) -> f64 {
        self.subcells.iter().map(|s| s.area).sum()
    }
}

impl Mesh {
    pub fn diamond(&self, e: usize) -> Diamond {
        let edge = self.edge(e);
        let k = edge.left;
        let [va, vb] = edge.vertices;
        let (a, b) = (self.vertex(va), self.vertex(vb));
        let x_k = self.cell_point(k);
        let x_l = match edge.right {
            Some(l) => self.cell_point(l),
            None => self.edge_midpoint(e),
        };
        let len_sigma = self.edge_length(e);
        let n_sigma = self.normal(k, e);
        let tau = x_l - x_k;
        let len_tau = tau.norm();
        let dk = self.distance_to_edge_line(k, e);
        let dl = (x_l - self.edge_midpoint(e)).dot(&n_sigma);
        let area = 0.5 * cross(&tau, &(b - a));
        let jt = perp(&tau);
        Diamond {
            edge: e,
            cells: (k, edge.right),
            vertices: [va, vb],
            x_k,
            x_l,
            area,
            half_areas: [0.5 * len_sigma * dk, 0.5 * len_sigma * dl],
            dual_areas: [0.5 * (x_k - a).dot(&jt), 0.5 * (b - x_k).dot(&jt)],
            n_sigma,
            n_tau: jt / len_tau,
            len_sigma,
            len_tau,
        }
    }

    pub fn diamonds(&self) -> Vec<Diamond> {
        (0..self.n_edges()).map(|e| self.diamond(e)).collect()
    }

    /// Diamonds with each vertex's dual part checked for positive area.
    pub fn checked_diamonds(&self) -> Result<Vec<Diamond>, MeshError> {
        let ds = self.diamonds();
        for d in &ds {
            for (i, &a) in d.dual_areas.iter().enumerate() {
                if a <= 0.0 {
                    return Err(MeshError::OverlappingDualCell { vertex: d.vertices[i] });
                }
            }
        }
        Ok(ds)
    }

    pub fn interaction_region(&self, v: usize) -> InteractionRegion {
        let p = self.vertex(v);
        let subcells = self
            .vertex_cells(v)
            .iter()
            .map(|&k| {
                let e_in = self.edge_in(k, v);
                let e_out = self.edge_out(k, v);
                let m_in = self.edge_midpoint(e_in);
                let m_out = self.edge_midpoint(e_out);
                let x = self.cell_point(k);
                let cw = |d: Point| Point::new(d.y, -d.x);
                SubCell {
                    cell: k,
                    vertex: v,
                    edges: [e_in, e_out],
                    midpoints: [m_in, m_out],
                    triangle_area: signed_triangle_area(&x, &m_in, &m_out),
                    area: polygon_signed_area(&[x, m_in, p, m_out]),
                    nu: [cw(m_in - x), cw(x - m_out)],
                }
            })
            .collect();
        InteractionRegion { vertex: v, subcells }
    }

    pub fn interaction_regions(&self) -> Vec<InteractionRegion> {
        (0..self.n_vertices()).map(|v| self.interaction_region(v)).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::pt;
    use crate::mesh::Rect;

    #[test]
    fn diamond_area_example() {
        let v = vec![pt(-1.0, -0.5), pt(0.0, -0.5), pt(1.0, -0.5), pt(-1.0, 0.5), pt(0.0, 0.5), pt(1.0, 0.5)];
        let cells = vec![vec![0, 1, 4, 3], vec![1, 2, 5, 4]];
        let m = Mesh::new(v, cells, Some(vec![pt(-0.5, 0.0), pt(0.5, 0.0)])).unwrap();
        let e = m.interior_edges().next().unwrap();
        let d = m.diamond(e);
        assert!((d.area - 0.5).abs() < 1e-15);
        assert!((d.half_areas[0] + d.half_areas[1] - d.area).abs() < 1e-15);
    }

    #[test]
    fn subcell_example() {
        let v = vec![pt(-1.0, -1.0), pt(1.0, -1.0), pt(1.0, 1.0), pt(-1.0, 1.0)];
        let m = Mesh::new(v, vec![vec![0, 1, 2, 3]], None).unwrap();
        let r = m.interaction_region(0);
        let s = &r.subcells[0];
        // x_K = (0,0), x̄_in = (-1,0), x̄_out = (0,-1) at vertex (-1,-1).
        assert!((s.triangle_area - 0.5).abs() < 1e-15);
        assert!((s.nu[0] - pt(0.0, 1.0)).norm() < 1e-15);
        assert!((s.nu[1] - pt(1.0, 0.0)).norm() < 1e-15);
        let g = s.gradient(0.0, -1.0, 0.0);
        assert!((g - pt(1.0, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn interior_vertex_has_four_subcells() {
        let m = Mesh::build_cartesian(2, 2, Rect::UNIT).unwrap();
        assert_eq!(m.interaction_region(4).subcells.len(), 4);
        assert_eq!(m.interaction_region(0).subcells.len(), 1);
    }
}
