//! Monotone schemes with nonlinear two-point fluxes `F = α u_K - β u_L`.

use super::{boundary_two_point, cell_system, Guarantee, NonlinearScheme, VertexInterpolator};
use crate::geometry::{cross, perp, signed_triangle_area, Point, Tensor};
use crate::mesh::Mesh;
use crate::problem::Problem;
use crate::scheme::{AssembledSystem, FluxOperator, LinearForm, SchemeError};

struct Boundary {
    cell: usize,
    edge: usize,
    trans: f64,
    value: f64,
}

fn boundary_data(mesh: &Mesh, problem: &Problem, tensors: &[Tensor]) -> Result<Vec<Boundary>, SchemeError> {
    mesh.boundary_edges()
        .map(|e| {
            let k = mesh.edge(e).left;
            let (trans, value) = boundary_two_point(mesh, problem, k, e, &tensors[k])?;
            Ok(Boundary { cell: k, edge: e, trans, value })
        })
        .collect()
}

/// Vertex values used in the convex weights: boundary data on the boundary,
/// interpolated inside, clamped at zero.
fn vertex_values(mesh: &Mesh, interp: &VertexInterpolator, boundary: &[Option<f64>], u: &[f64]) -> Vec<f64> {
    (0..mesh.n_vertices()).map(|v| boundary[v].unwrap_or_else(|| interp.value(v, u)).max(0.0)).collect()
}

fn two_point_fluxes(
    mesh: &Mesh,
    edges: impl Iterator<Item = (usize, f64, f64)>,
    boundary: &[Boundary],
) -> FluxOperator {
    let mut cell_fluxes: Vec<Vec<LinearForm>> =
        (0..mesh.n_cells()).map(|k| vec![LinearForm::default(); mesh.cell_edges(k).len()]).collect();
    for (e, alpha, beta) in edges {
        let edge = mesh.edge(e);
        let (k, l) = (edge.left, edge.right.expect("interior edge"));
        let mut f = LinearForm::default();
        f.add(k, alpha);
        f.add(l, -beta);
        cell_fluxes[l][mesh.local_edge(l, e).unwrap()] = f.scaled(-1.0);
        cell_fluxes[k][mesh.local_edge(k, e).unwrap()] = f;
    }
    for b in boundary {
        let mut f = LinearForm::default();
        f.add(b.cell, b.trans);
        f.constant = -b.trans * b.value;
        cell_fluxes[b.cell][mesh.local_edge(b.cell, b.edge).unwrap()] = f;
    }
    FluxOperator { cell_fluxes, ..Default::default() }
}

struct TriEdge {
    edge: usize,
    vertices: [usize; 2],
    /// Coefficients of `u_K` and `u_L` in `F^i`.
    p: [f64; 2],
    q: [f64; 2],
    area: [f64; 2],
}

/// Triangular meshes with incenter cell points and `Λ = Id`: the fluxes of
/// the two triangles `(v_i, x_K, x_L)` are combined so that the vertex terms
/// cancel.
pub struct MonotoneTriangular<'a> {
    mesh: &'a Mesh,
    problem: &'a Problem,
    interp: VertexInterpolator,
    boundary_vertices: Vec<Option<f64>>,
    edges: Vec<TriEdge>,
    boundary: Vec<Boundary>,
}

impl<'a> MonotoneTriangular<'a> {
    pub fn new(mesh: &'a Mesh, problem: &'a Problem) -> Result<Self, SchemeError> {
        let tensors = problem.cell_tensors(mesh)?;
        for k in 0..mesh.n_cells() {
            if mesh.cell_vertices(k).len() != 3 {
                return Err(SchemeError::Precondition(format!("cell {k} is not a triangle")));
            }
            if (tensors[k] - Tensor::identity()).amax() > 1e-12 {
                return Err(SchemeError::Precondition(format!("tensor of cell {k} is not the identity")));
            }
            let d: Vec<f64> = mesh.cell_edges(k).iter().map(|&e| mesh.distance_to_edge_line(k, e)).collect();
            let (lo, hi) = d.iter().fold((f64::INFINITY, 0.0f64), |(a, b), &x| (a.min(x), b.max(x)));
            if hi - lo > 1e-9 * hi {
                return Err(SchemeError::Precondition(format!("cell point of cell {k} is not the incenter")));
            }
        }
        let edges = mesh
            .interior_edges()
            .map(|e| {
                let edge = mesh.edge(e);
                let (xk, xl) = (mesh.cell_point(edge.left), mesh.cell_point(edge.right.unwrap()));
                let n = mesh.normal(edge.left, e) * mesh.edge_length(e);
                let mut te = TriEdge { edge: e, vertices: edge.vertices, p: [0.0; 2], q: [0.0; 2], area: [0.0; 2] };
                for i in 0..2 {
                    let v = mesh.vertex(edge.vertices[i]);
                    let a = signed_triangle_area(&v, &xk, &xl);
                    te.p[i] = -perp(&(v - xl)).dot(&n) / (2.0 * a);
                    te.q[i] = -perp(&(xk - v)).dot(&n) / (2.0 * a);
                    te.area[i] = a;
                }
                if te.area[0] * te.area[1] >= 0.0 {
                    return Err(SchemeError::Precondition(format!("edge {e}: vertices on one side of [x_K, x_L]")));
                }
                te.area = te.area.map(f64::abs);
                Ok(te)
            })
            .collect::<Result<_, _>>()?;
        let bd = problem.discretize_boundary(mesh);
        Ok(MonotoneTriangular {
            mesh,
            problem,
            interp: VertexInterpolator::new(mesh, &problem.tensor),
            boundary_vertices: bd.vertex_values,
            edges,
            boundary: boundary_data(mesh, problem, &tensors)?,
        })
    }

    /// `(μ¹, μ²)` for interior edge `e` at the vertex values `uv`.
    fn weights(te: &TriEdge, uv: &[f64]) -> [f64; 2] {
        let w = [uv[te.vertices[0]] / te.area[0], uv[te.vertices[1]] / te.area[1]];
        let s = w[0] + w[1];
        if s > 0.0 {
            [w[1] / s, w[0] / s]
        } else {
            [0.5, 0.5]
        }
    }

    /// `(α, β)` of every interior edge at the iterate `u`.
    pub fn coefficients(&self, u: &[f64]) -> Vec<(usize, f64, f64)> {
        let uv = vertex_values(self.mesh, &self.interp, &self.boundary_vertices, u);
        self.edges
            .iter()
            .map(|te| {
                let mu = Self::weights(te, &uv);
                (te.edge, mu[0] * te.p[0] + mu[1] * te.p[1], -(mu[0] * te.q[0] + mu[1] * te.q[1]))
            })
            .collect()
    }
}

impl NonlinearScheme for MonotoneTriangular<'_> {
    fn freeze(&self, u: &[f64]) -> Result<AssembledSystem, SchemeError> {
        let fluxes = two_point_fluxes(self.mesh, self.coefficients(u).into_iter(), &self.boundary);
        cell_system(self.mesh, self.problem, fluxes)
    }

    fn initial_guess(&self) -> Vec<f64> {
        guess(self.mesh, self.problem)
    }

    fn guarantee(&self) -> Guarantee {
        Guarantee::Monotone
    }
}

fn guess(mesh: &Mesh, problem: &Problem) -> Vec<f64> {
    let (lo, hi) = problem.discretize_boundary(mesh).range();
    vec![if lo.is_finite() { 0.5 * (lo + hi) } else { 0.0 }; mesh.n_cells()]
}

/// Two vertices `v_1, v_2` of cell `k` and `a, b ≥ 0` with
/// `target = a (v_1 - x_K) + b (v_2 - x_K)`. Consecutive vertex pairs are
/// tried first, then all pairs.
pub fn cone_decomposition(mesh: &Mesh, k: usize, target: &Point) -> Option<([usize; 2], [f64; 2])> {
    let vs = mesh.cell_vertices(k);
    let xk = mesh.cell_point(k);
    let n = vs.len();
    let tol = 1e-12;
    let try_pair = |i: usize, j: usize| {
        let (d1, d2) = (mesh.vertex(vs[i]) - xk, mesh.vertex(vs[j]) - xk);
        let det = cross(&d1, &d2);
        if det.abs() <= 1e-14 * d1.norm() * d2.norm() {
            return None;
        }
        let a = cross(target, &d2) / det;
        let b = cross(&d1, target) / det;
        let scale = target.norm() / d1.norm().min(d2.norm());
        (a >= -tol * scale && b >= -tol * scale).then(|| ([vs[i], vs[j]], [a.max(0.0), b.max(0.0)]))
    };
    (0..n)
        .find_map(|i| try_pair(i, (i + 1) % n))
        .or_else(|| (0..n).find_map(|i| (i + 2..n).find_map(|j| try_pair(i, j))))
}

struct Cone {
    vertices: [usize; 2],
    coef: [f64; 2],
}

/// Polygonal meshes: `Λ_K n_{K,σ}` is split in the cone of two vertex
/// directions on each side and the two one-sided fluxes are combined so that
/// the vertex terms cancel.
pub struct MonotonePolygonal<'a> {
    mesh: &'a Mesh,
    problem: &'a Problem,
    interp: VertexInterpolator,
    boundary_vertices: Vec<Option<f64>>,
    /// Per interior edge: (edge, cone from K, cone from L).
    edges: Vec<(usize, Cone, Cone)>,
    boundary: Vec<Boundary>,
}

impl<'a> MonotonePolygonal<'a> {
    pub fn new(mesh: &'a Mesh, problem: &'a Problem) -> Result<Self, SchemeError> {
        let tensors = problem.cell_tensors(mesh)?;
        let cone = |k: usize, e: usize| {
            let t = tensors[k] * mesh.normal(k, e);
            cone_decomposition(mesh, k, &t)
                .map(|(vertices, c)| Cone { vertices, coef: c.map(|x| x * mesh.edge_length(e)) })
                .ok_or(SchemeError::InterpolationSupport { cell: k, edge: e })
        };
        let edges = mesh
            .interior_edges()
            .map(|e| {
                let edge = mesh.edge(e);
                Ok((e, cone(edge.left, e)?, cone(edge.right.unwrap(), e)?))
            })
            .collect::<Result<_, SchemeError>>()?;
        let bd = problem.discretize_boundary(mesh);
        Ok(MonotonePolygonal {
            mesh,
            problem,
            interp: VertexInterpolator::new(mesh, &problem.tensor),
            boundary_vertices: bd.vertex_values,
            edges,
            boundary: boundary_data(mesh, problem, &tensors)?,
        })
    }

    pub fn coefficients(&self, u: &[f64]) -> Vec<(usize, f64, f64)> {
        let uv = vertex_values(self.mesh, &self.interp, &self.boundary_vertices, u);
        self.edges
            .iter()
            .map(|(e, ck, cl)| {
                let wk = ck.coef[0] * uv[ck.vertices[0]] + ck.coef[1] * uv[ck.vertices[1]];
                let wl = cl.coef[0] * uv[cl.vertices[0]] + cl.coef[1] * uv[cl.vertices[1]];
                let (mu1, mu2) = if wk + wl > 0.0 { (wl / (wk + wl), wk / (wk + wl)) } else { (0.5, 0.5) };
                (*e, mu1 * (ck.coef[0] + ck.coef[1]), mu2 * (cl.coef[0] + cl.coef[1]))
            })
            .collect()
    }
}

impl NonlinearScheme for MonotonePolygonal<'_> {
    fn freeze(&self, u: &[f64]) -> Result<AssembledSystem, SchemeError> {
        let fluxes = two_point_fluxes(self.mesh, self.coefficients(u).into_iter(), &self.boundary);
        cell_system(self.mesh, self.problem, fluxes)
    }

    fn initial_guess(&self) -> Vec<f64> {
        guess(self.mesh, self.problem)
    }

    fn guarantee(&self) -> Guarantee {
        Guarantee::Monotone
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::pt;
    use crate::mesh::Rect;

    #[test]
    fn square_cone_uses_right_edge_endpoints() {
        let m = Mesh::build_cartesian(1, 1, Rect::UNIT).unwrap();
        let (vs, c) = cone_decomposition(&m, 0, &pt(1.0, 0.0)).unwrap();
        let mut xs: Vec<Point> = vs.iter().map(|&v| m.vertex(v)).collect();
        xs.sort_by(|a, b| a.y.partial_cmp(&b.y).unwrap());
        assert_eq!(xs, vec![pt(1.0, 0.0), pt(1.0, 1.0)]);
        // (1,0) = a (0.5,-0.5) + b (0.5,0.5)  =>  a = b = 1
        assert!((c[0] - 1.0).abs() < 1e-14 && (c[1] - 1.0).abs() < 1e-14);
    }
}
