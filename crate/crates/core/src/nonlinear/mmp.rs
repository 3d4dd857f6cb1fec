//! Minimum-maximum preserving scheme with nonlinear multi-point fluxes
//! `F_{K,σ} = Σ_Z τ_{K,Z}(U) (u_K - u_Z)`, `τ ≥ 0`.

use std::collections::BTreeSet;

use super::{boundary_two_point, cell_system, ray_to_edge_line, Guarantee, NonlinearScheme};
use crate::geometry::{cross, Point, Tensor};
use crate::mesh::Mesh;
use crate::problem::{BoundaryData, Problem};
use crate::scheme::{AssembledSystem, FluxOperator, LinearForm, Neighbor, SchemeError};

/// `u_M = θ u_L + Σ w_Z u_Z` with `θ > 0`, `w ≥ 0` and `θ + Σ w = 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct Interpolation {
    pub theta: f64,
    pub others: Vec<(Neighbor, f64)>,
}

/// One-sided linear flux `a (u_K - u_M)`.
#[derive(Debug, Clone, PartialEq)]
pub struct OneSided {
    pub a: f64,
    pub interp: Interpolation,
}

/// `G = Σ c (u_centre - u_Z)` terms.
#[derive(Debug, Clone, PartialEq)]
struct Side {
    alpha: f64,
    g: Vec<(Neighbor, f64)>,
}

#[derive(Debug, Clone)]
struct EdgeData {
    edge: usize,
    k: usize,
    l: usize,
    alpha: f64,
    /// Terms of `G¹` (centre `K`) and of `-G²` (centre `L`).
    g1: Vec<(Neighbor, f64)>,
    g2: Vec<(Neighbor, f64)>,
}

pub struct Mmp<'a> {
    mesh: &'a Mesh,
    problem: &'a Problem,
    bd: BoundaryData,
    edges: Vec<EdgeData>,
    boundary: Vec<(usize, usize, f64, f64)>,
}

fn candidates(mesh: &Mesh, around: &BTreeSet<usize>) -> BTreeSet<usize> {
    around
        .iter()
        .flat_map(|&c| mesh.cell_vertices(c).iter().flat_map(|&v| mesh.vertex_cells(v).iter().copied()))
        .collect()
}

fn value_point(mesh: &Mesh, z: Neighbor) -> Point {
    match z {
        Neighbor::Cell(c) => mesh.cell_point(c),
        Neighbor::BoundaryEdge(e) => mesh.edge_midpoint(e),
    }
}

fn layer_points(mesh: &Mesh, c: usize, layer: &BTreeSet<usize>) -> Vec<Neighbor> {
    let mut points: Vec<Neighbor> = layer.iter().filter(|&&z| z != c).map(|&z| Neighbor::Cell(z)).collect();
    let bedges: BTreeSet<usize> =
        layer.iter().flat_map(|&z| mesh.cell_edges(z).iter().copied()).filter(|&e| mesh.is_boundary_edge(e)).collect();
    points.extend(bedges.into_iter().map(Neighbor::BoundaryEdge));
    points
}

/// Point `M₂` on the ray `o + s d` (`s > 0`) with a convex interpolation
/// giving `u_c` a positive weight. In order of preference: the ray passes
/// through `x_c`; the first crossing of a segment `[x_c, P]`; the middle of
/// the first chord cut by the ray in a triangle `(x_c, P, Q)`. `P` and `Q`
/// are cell points or boundary-edge midpoints within two layers of `c`.
fn find_m2(mesh: &Mesh, c: usize, o: &Point, d: &Point) -> Option<(f64, Interpolation)> {
    let xc = mesh.cell_point(c);
    let scale = (xc - o).norm().max(mesh.cell_diameter(c));
    let s_min = 1e-12 * scale / d.norm();
    let s_star = (xc - o).dot(d) / d.norm_squared();
    if s_star > 0.0 && (o + d * s_star - xc).norm() <= 1e-10 * scale {
        return Some((s_star, Interpolation { theta: 1.0, others: Vec::new() }));
    }
    let layer1 = candidates(mesh, &BTreeSet::from([c]));
    let layer2 = candidates(mesh, &layer1);
    let layers = [layer_points(mesh, c, &layer1), layer_points(mesh, c, &layer2)];
    for points in &layers {
        let mut best: Option<(f64, Interpolation)> = None;
        for &z in points {
            let e = value_point(mesh, z) - xc;
            let det = cross(d, &e);
            if det.abs() <= 1e-14 * d.norm() * e.norm() {
                continue;
            }
            let r = xc - o;
            let s = cross(&r, &e) / det;
            let t = cross(&r, d) / det;
            if s > s_min && (0.0..1.0 - 1e-9).contains(&t) && best.as_ref().is_none_or(|b| s < b.0) {
                best = Some((s, Interpolation { theta: 1.0 - t, others: vec![(z, t)] }));
            }
        }
        if best.is_some() {
            return best;
        }
    }
    for points in &layers {
        let mut best: Option<(f64, Interpolation)> = None;
        for (i, &p) in points.iter().enumerate() {
            for &q in &points[i + 1..] {
                let tri = [xc, value_point(mesh, p), value_point(mesh, q)];
                let Some((s, bary)) = chord_midpoint(&tri, o, d, s_min) else { continue };
                if bary[0] > 1e-9 && best.as_ref().is_none_or(|b| s < b.0) {
                    best = Some((s, Interpolation { theta: bary[0], others: vec![(p, bary[1]), (q, bary[2])] }));
                }
            }
        }
        if best.is_some() {
            return best;
        }
    }
    None
}

/// Middle of the part of the ray `o + s d`, `s ≥ s_min`, inside the triangle,
/// with its barycentric coordinates.
fn chord_midpoint(tri: &[Point; 3], o: &Point, d: &Point, s_min: f64) -> Option<(f64, [f64; 3])> {
    let area = crate::geometry::signed_triangle_area(&tri[0], &tri[1], &tri[2]);
    if area.abs() <= 1e-14 * (tri[1] - tri[0]).norm_squared().max((tri[2] - tri[0]).norm_squared()) {
        return None;
    }
    // Barycentric coordinates are affine in s: b_i(s) = p_i + s q_i.
    let bary = |x: &Point| -> [f64; 3] {
        let b1 = crate::geometry::signed_triangle_area(&tri[0], x, &tri[2]) / area;
        let b2 = crate::geometry::signed_triangle_area(&tri[0], &tri[1], x) / area;
        [1.0 - b1 - b2, b1, b2]
    };
    let p = bary(o);
    let p1 = bary(&(o + d));
    let (mut lo, mut hi) = (s_min, f64::INFINITY);
    for i in 0..3 {
        let q = p1[i] - p[i];
        if q.abs() < 1e-300 {
            if p[i] <= 0.0 {
                return None;
            }
        } else if q > 0.0 {
            lo = lo.max(-p[i] / q);
        } else {
            hi = hi.min(-p[i] / q);
        }
    }
    if !(hi.is_finite() && hi > lo * (1.0 + 1e-9)) {
        return None;
    }
    let s = 0.5 * (lo + hi);
    Some((s, bary(&(o + d * s))))
}

/// From cell `k` across edge `e` into `l`: `x_{σ,1} = x_K + s Λ_K n`,
/// `M₂ = x_{σ,1} + s₂ Λ_L n`, `a = |σ| / (s + s₂)`.
pub fn one_sided(mesh: &Mesh, tensors: &[Tensor], k: usize, l: usize, e: usize) -> Result<OneSided, SchemeError> {
    let n = mesh.normal(k, e);
    let dk = tensors[k] * n;
    let s = ray_to_edge_line(mesh, k, e, &dk)?;
    let x1 = mesh.cell_point(k) + dk * s;
    let dl = tensors[l] * n;
    let (s2, interp) = find_m2(mesh, l, &x1, &dl)
        .or_else(|| boundary_support(mesh, l, &x1, &dl))
        .ok_or(SchemeError::InterpolationSupport { cell: k, edge: e })?;
    Ok(OneSided { a: mesh.edge_length(e) / (s + s2), interp })
}

/// Fallback when the ray leaves the domain before any support is found
/// (strong anisotropy next to the boundary): `M₂` is taken on the nearest
/// boundary edge around `c` and carries that edge's boundary value.
fn boundary_support(mesh: &Mesh, c: usize, o: &Point, d: &Point) -> Option<(f64, Interpolation)> {
    let layer = candidates(mesh, &candidates(mesh, &BTreeSet::from([c])));
    let dist = |g: usize| {
        let (a, b) = mesh.edge_endpoints(g);
        let t = ((o - a).dot(&(b - a)) / (b - a).norm_squared()).clamp(0.0, 1.0);
        (a + (b - a) * t - o).norm()
    };
    let g = layer
        .iter()
        .flat_map(|&z| mesh.cell_edges(z).iter().copied())
        .filter(|&g| mesh.is_boundary_edge(g))
        .min_by(|&x, &y| dist(x).total_cmp(&dist(y)))?;
    let (a, b) = mesh.edge_endpoints(g);
    let det = cross(d, &(b - a));
    let s = if det.abs() > 0.0 { cross(&(a - o), &(b - a)) / det } else { 0.0 };
    Some((s.max(0.0), Interpolation { theta: 0.0, others: vec![(Neighbor::BoundaryEdge(g), 1.0)] }))
}

fn side(f: &OneSided) -> Side {
    let g = f.interp.others.iter().filter(|(_, w)| *w > 0.0).map(|&(z, w)| (z, f.a * w)).collect();
    Side { alpha: f.a * f.interp.theta, g }
}

impl<'a> Mmp<'a> {
    pub fn new(mesh: &'a Mesh, problem: &'a Problem) -> Result<Self, SchemeError> {
        let tensors = problem.cell_tensors(mesh)?;
        let edges = mesh
            .interior_edges()
            .map(|e| {
                let (k, l) = (mesh.edge(e).left, mesh.edge(e).right.unwrap());
                let s1 = side(&one_sided(mesh, &tensors, k, l, e)?);
                let s2 = side(&one_sided(mesh, &tensors, l, k, e)?);
                let alpha = s1.alpha.min(s2.alpha);
                let mut g1 = s1.g;
                if s1.alpha > alpha {
                    g1.push((Neighbor::Cell(l), s1.alpha - alpha));
                }
                let mut g2 = s2.g;
                if s2.alpha > alpha {
                    g2.push((Neighbor::Cell(k), s2.alpha - alpha));
                }
                Ok(EdgeData { edge: e, k, l, alpha, g1, g2 })
            })
            .collect::<Result<_, SchemeError>>()?;
        let boundary = mesh
            .boundary_edges()
            .map(|e| {
                let k = mesh.edge(e).left;
                let (t, v) = boundary_two_point(mesh, problem, k, e, &tensors[k])?;
                Ok((k, e, t, v))
            })
            .collect::<Result<_, SchemeError>>()?;
        Ok(Mmp { mesh, problem, bd: problem.discretize_boundary(mesh), edges, boundary })
    }

    fn value(&self, z: Neighbor, u: &[f64]) -> f64 {
        match z {
            Neighbor::Cell(c) => u[c],
            Neighbor::BoundaryEdge(e) => self.bd.edge(e),
        }
    }

    fn g(&self, centre: usize, terms: &[(Neighbor, f64)], u: &[f64]) -> f64 {
        terms.iter().map(|&(z, c)| c * (u[centre] - self.value(z, u))).sum()
    }

    fn form(&self, centre: usize, other: usize, alpha: f64, terms: &[(Neighbor, f64)], nu: f64) -> LinearForm {
        let mut f = LinearForm::default();
        f.add(centre, alpha);
        f.add(other, -alpha);
        if nu > 0.0 {
            for &(z, c) in terms {
                let c = nu * c;
                f.add(centre, c);
                match z {
                    Neighbor::Cell(j) => f.add(j, -c),
                    Neighbor::BoundaryEdge(e) => f.constant -= c * self.bd.edge(e),
                }
            }
        }
        f.compress()
    }

    /// Convex weights `(μ¹, μ²)` from `G¹` and `G²`.
    pub fn weights(g1: f64, g2: f64) -> (f64, f64) {
        let s = g1.abs() + g2.abs();
        if s > 0.0 {
            (g2.abs() / s, g1.abs() / s)
        } else {
            (0.5, 0.5)
        }
    }
}

impl NonlinearScheme for Mmp<'_> {
    fn freeze(&self, u: &[f64]) -> Result<AssembledSystem, SchemeError> {
        let mesh = self.mesh;
        let mut cell_fluxes: Vec<Vec<LinearForm>> =
            (0..mesh.n_cells()).map(|k| vec![LinearForm::default(); mesh.cell_edges(k).len()]).collect();
        for d in &self.edges {
            let g1 = self.g(d.k, &d.g1, u);
            // G² = Σ c (u_Z - u_L)
            let g2 = -self.g(d.l, &d.g2, u);
            let (mu1, mu2) = Self::weights(g1, g2);
            // Same signs: μ¹G¹ + μ²G² = 2μ¹G¹ = 2μ²G²; opposite signs: 0.
            let (nu1, nu2) = if g1 * g2 > 0.0 { (2.0 * mu1, 2.0 * mu2) } else { (0.0, 0.0) };
            cell_fluxes[d.k][mesh.local_edge(d.k, d.edge).unwrap()] = self.form(d.k, d.l, d.alpha, &d.g1, nu1);
            cell_fluxes[d.l][mesh.local_edge(d.l, d.edge).unwrap()] = self.form(d.l, d.k, d.alpha, &d.g2, nu2);
        }
        for &(k, e, t, v) in &self.boundary {
            let mut f = LinearForm::default();
            f.add(k, t);
            f.constant = -t * v;
            cell_fluxes[k][mesh.local_edge(k, e).unwrap()] = f;
        }
        cell_system(mesh, self.problem, FluxOperator { cell_fluxes, ..Default::default() })
    }

    fn initial_guess(&self) -> Vec<f64> {
        let (lo, hi) = self.bd.range();
        vec![if lo.is_finite() { 0.5 * (lo + hi) } else { 0.0 }; self.mesh.n_cells()]
    }

    fn guarantee(&self) -> Guarantee {
        Guarantee::MinMax
    }
}
