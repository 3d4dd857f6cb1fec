//! Discrete duality finite volumes: unknowns on cells and interior vertices,
//! one constant gradient per diamond.

use crate::geometry::{triangle_quadrature, Point, Tensor};
use crate::mesh::{Diamond, Mesh};
use crate::problem::{BoundaryData, Problem};
use crate::scheme::{AssembledSystem, DofLayout, FluxOperator, LinearForm, SchemeError};
use crate::sparse::{LinearSystem, TripletBuilder};

/// `Λ_D = (|D ∩ K| Λ_K + |D ∩ L| Λ_L) / |D|`.
pub fn diamond_tensor(d: &Diamond, tensors: &[Tensor]) -> Tensor {
    match d.cells.1 {
        Some(l) => (tensors[d.cells.0] * d.half_areas[0] + tensors[l] * d.half_areas[1]) / d.area,
        None => tensors[d.cells.0],
    }
}

/// Areas of the dual cells `P_v`, for every vertex.
pub fn dual_cell_areas(mesh: &Mesh, diamonds: &[Diamond]) -> Vec<f64> {
    let mut a = vec![0.0; mesh.n_vertices()];
    for d in diamonds {
        a[d.vertices[0]] += d.dual_areas[0];
        a[d.vertices[1]] += d.dual_areas[1];
    }
    a
}

/// `∫_{P_v} f` for every vertex, summed over the triangles `(v, x_L, x_K)` and `(v', x_K, x_L)`.
pub fn dual_source_integrals(mesh: &Mesh, diamonds: &[Diamond], f: &dyn Fn(&Point) -> f64) -> Vec<f64> {
    let mut s = vec![0.0; mesh.n_vertices()];
    for d in diamonds {
        let a = mesh.vertex(d.vertices[0]);
        let b = mesh.vertex(d.vertices[1]);
        s[d.vertices[0]] += triangle_quadrature(&a, &d.x_l, &d.x_k, f);
        s[d.vertices[1]] += triangle_quadrature(&b, &d.x_k, &d.x_l, f);
    }
    s
}

/// Diamond gradients of the values `(cells, edges, vertices)`; the edge value
/// stands in for `u_L` on boundary diamonds.
pub fn diamond_gradients(diamonds: &[Diamond], cells: &[f64], edges: &[f64], vertices: &[f64]) -> Vec<Point> {
    diamonds
        .iter()
        .map(|d| {
            let ul = d.cells.1.map_or(edges[d.edge], |l| cells[l]);
            d.gradient([cells[d.cells.0], ul, vertices[d.vertices[0]], vertices[d.vertices[1]]])
        })
        .collect()
}

/// `div_K ξ = (1/|K|) Σ_σ |σ| ξ_D·n_{K,σ}` for a field constant on diamonds.
pub fn primal_divergence(mesh: &Mesh, diamonds: &[Diamond], xi: &[Point]) -> Vec<f64> {
    let mut div = vec![0.0; mesh.n_cells()];
    for (d, x) in diamonds.iter().zip(xi) {
        let f = d.len_sigma * x.dot(&d.n_sigma);
        div[d.cells.0] += f;
        if let Some(l) = d.cells.1 {
            div[l] -= f;
        }
    }
    div.iter_mut().enumerate().for_each(|(k, v)| *v /= mesh.cell_area(k));
    div
}

/// `div_v ξ = (1/|P_v|) Σ_τ |τ| ξ_D·n_{v,τ}`.
pub fn dual_divergence(mesh: &Mesh, diamonds: &[Diamond], xi: &[Point]) -> Vec<f64> {
    let areas = dual_cell_areas(mesh, diamonds);
    let mut div = vec![0.0; mesh.n_vertices()];
    for (d, x) in diamonds.iter().zip(xi) {
        let f = d.len_tau * x.dot(&d.n_tau);
        div[d.vertices[0]] += f;
        div[d.vertices[1]] -= f;
    }
    div.iter_mut().zip(&areas).for_each(|(v, a)| *v /= a);
    div
}

enum Slot {
    Free(usize),
    Fixed(f64),
}

fn slots(d: &Diamond, layout: &DofLayout, boundary: &BoundaryData) -> [Slot; 4] {
    let vertex = |v: usize| layout.vertex(v).map_or_else(|| Slot::Fixed(boundary.vertex(v)), Slot::Free);
    [
        Slot::Free(d.cells.0),
        d.cells.1.map_or_else(|| Slot::Fixed(boundary.edge(d.edge)), Slot::Free),
        vertex(d.vertices[0]),
        vertex(d.vertices[1]),
    ]
}

fn form(coefs: [f64; 4], slots: &[Slot; 4]) -> LinearForm {
    let mut f = LinearForm::default();
    for (c, s) in coefs.iter().zip(slots) {
        match *s {
            Slot::Free(j) => f.add(j, *c),
            Slot::Fixed(v) => f.constant += c * v,
        }
    }
    f.compress()
}

pub fn assemble_ddfv(mesh: &Mesh, problem: &Problem) -> Result<AssembledSystem, SchemeError> {
    let diamonds = mesh.checked_diamonds()?;
    let tensors = problem.cell_tensors(mesh)?;
    let boundary = problem.discretize_boundary(mesh);
    let source = problem.source_integrals(mesh);
    let dual_source = dual_source_integrals(mesh, &diamonds, &*problem.source);
    let layout = DofLayout::cells_and_interior_vertices(mesh);
    let n = layout.len();

    let mut cell_fluxes: Vec<Vec<LinearForm>> =
        (0..mesh.n_cells()).map(|k| vec![LinearForm::default(); mesh.cell_edges(k).len()]).collect();
    let mut dual_fluxes = Vec::with_capacity(diamonds.len());
    let mut rows: Vec<(usize, LinearForm)> = Vec::new();

    for d in &diamonds {
        let lam = diamond_tensor(d, &tensors);
        let g = d.gradient_coefficients();
        let ln_sigma = lam * d.n_sigma * d.len_sigma;
        let ln_tau = lam * d.n_tau * d.len_tau;
        let sl = slots(d, &layout, &boundary);
        let primal = form(g.map(|c| -c.dot(&ln_sigma)), &sl);
        let dual = form(g.map(|c| -c.dot(&ln_tau)), &sl);

        let k = d.cells.0;
        let ik = mesh.local_edge(k, d.edge).expect("edge of its left cell");
        cell_fluxes[k][ik] = primal.clone();
        rows.push((k, primal.clone()));
        if let Some(l) = d.cells.1 {
            let il = mesh.local_edge(l, d.edge).expect("edge of its right cell");
            cell_fluxes[l][il] = primal.scaled(-1.0);
            rows.push((l, primal.scaled(-1.0)));
        }
        if let Some(i) = layout.vertex(d.vertices[0]) {
            rows.push((i, dual.clone()));
        }
        if let Some(i) = layout.vertex(d.vertices[1]) {
            rows.push((i, dual.scaled(-1.0)));
        }
        dual_fluxes.push(dual);
    }

    let mut b = TripletBuilder::new(n);
    let mut rhs = vec![0.0; n];
    rhs[..mesh.n_cells()].copy_from_slice(&source);
    for v in 0..mesh.n_vertices() {
        if let Some(i) = layout.vertex(v) {
            rhs[i] = dual_source[v];
        }
    }
    for (row, f) in rows {
        for &(j, c) in &f.terms {
            b.add(row, j, c);
        }
        rhs[row] -= f.constant;
    }
    let system = LinearSystem::new(b.finalize()?, rhs)?;
    Ok(AssembledSystem {
        system,
        layout,
        fluxes: FluxOperator { cell_fluxes, dual_fluxes, pair_fluxes: Vec::new() },
        boundary,
        source,
        dual_source: Some(dual_source),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::Rect;

    #[test]
    fn dual_areas_partition_the_domain() {
        let m = Mesh::build_cartesian(3, 2, Rect::UNIT).unwrap().perturb_random(0.2, 1).unwrap();
        let ds = m.diamonds();
        let total: f64 = dual_cell_areas(&m, &ds).iter().sum();
        assert!((total - 1.0).abs() < 1e-13);
    }
}
