//! Multi-point flux approximations built on interaction regions: the
//! O-method (continuity at edge midpoints) and the L-method (full continuity
//! on two half-edges, one triplet of cells per half-edge).

use nalgebra::DMatrix;

use crate::geometry::{Point, Tensor};
use crate::mesh::Mesh;
use crate::problem::{BoundaryData, Problem};
use crate::scheme::{cell_balance_system, AssembledSystem, DofLayout, FluxOperator, LinearForm, SchemeError};
use crate::tolerances::LOCAL_PIVOT_REL;

/// Solves `a x = b` for a small dense system, rejecting pivots below
/// `1e-12 max|a_ij|`.
pub(crate) fn solve_local(
    a: DMatrix<f64>,
    b: &DMatrix<f64>,
    what: &'static str,
    index: usize,
) -> Result<DMatrix<f64>, SchemeError> {
    let scale = a.amax();
    let lu = a.lu();
    let u = lu.u();
    let small = (0..u.nrows()).any(|i| !(u[(i, i)].abs() > LOCAL_PIVOT_REL * scale));
    if small {
        return Err(SchemeError::SingularLocalSystem { what, index });
    }
    lu.solve(b).ok_or(SchemeError::SingularLocalSystem { what, index })
}

fn empty_fluxes(mesh: &Mesh) -> Vec<Vec<LinearForm>> {
    (0..mesh.n_cells()).map(|k| vec![LinearForm::default(); mesh.cell_edges(k).len()]).collect()
}

fn finish(
    mesh: &Mesh,
    problem: &Problem,
    boundary: BoundaryData,
    cell_fluxes: Vec<Vec<LinearForm>>,
) -> Result<AssembledSystem, SchemeError> {
    let source = problem.source_integrals(mesh);
    let cell_fluxes = cell_fluxes.into_iter().map(|fs| fs.into_iter().map(LinearForm::compress).collect()).collect();
    let fluxes = FluxOperator { cell_fluxes, ..Default::default() };
    let system = cell_balance_system(&fluxes, &source)?;
    Ok(AssembledSystem { system, layout: DofLayout::cells(mesh), fluxes, boundary, source, dual_source: None })
}

/// MPFA-O: per vertex, sub-cell gradients from `(u_K, u_σ, u_σ')` and
/// conservation of the half-edge fluxes eliminate the interior edge values.
pub fn assemble_mpfa_o(mesh: &Mesh, problem: &Problem) -> Result<AssembledSystem, SchemeError> {
    let tensors = problem.cell_tensors(mesh)?;
    let boundary = problem.discretize_boundary(mesh);
    let mut cell_fluxes = empty_fluxes(mesh);

    for v in 0..mesh.n_vertices() {
        let region = mesh.interaction_region(v);
        if region.subcells.is_empty() {
            continue;
        }
        let vx = mesh.vertex(v);
        let edges: Vec<usize> = mesh.vertex_edges(v).to_vec();
        let unknown: Vec<Option<usize>> = {
            let mut next = 0;
            edges
                .iter()
                .map(|&e| {
                    (!mesh.is_boundary_edge(e)).then(|| {
                        next += 1;
                        next - 1
                    })
                })
                .collect()
        };
        let m = unknown.iter().flatten().count();
        let nc = region.subcells.len();
        let local_edge = |e: usize| edges.iter().position(|&f| f == e).unwrap();

        // Sub-flux F_{K,τ,v} = a·u_edges + b u_K + c.
        struct SubFlux {
            sub: usize,
            edge: usize,
            edge_coef: Vec<f64>,
            cell_coef: f64,
            constant: f64,
        }
        let mut subfluxes = Vec::with_capacity(2 * nc);
        for (si, s) in region.subcells.iter().enumerate() {
            let grad = s.gradient_coefficients();
            for t in 0..2 {
                let e = s.edges[t];
                let n = mesh.normal(s.cell, e);
                let w = -(s.midpoints[t] - vx).norm() * (tensors[s.cell] * n);
                let mut edge_coef = vec![0.0; m];
                let mut constant = 0.0;
                for (side, c) in [(0usize, grad[1]), (1, grad[2])] {
                    let f = s.edges[side];
                    let coef = w.dot(&c);
                    match unknown[local_edge(f)] {
                        Some(i) => edge_coef[i] += coef,
                        None => constant += coef * boundary.edge(f),
                    }
                }
                subfluxes.push(SubFlux { sub: si, edge: e, edge_coef, cell_coef: w.dot(&grad[0]), constant });
            }
        }

        // Conservation on each interior edge: C u_e + D u_c + E = 0.
        let solution = if m > 0 {
            let mut c = DMatrix::zeros(m, m);
            let mut rhs = DMatrix::zeros(m, nc + 1);
            for sf in &subfluxes {
                if let Some(row) = unknown[local_edge(sf.edge)] {
                    for j in 0..m {
                        c[(row, j)] += sf.edge_coef[j];
                    }
                    rhs[(row, sf.sub)] -= sf.cell_coef;
                    rhs[(row, nc)] -= sf.constant;
                }
            }
            Some(solve_local(c, &rhs, "vertex", v)?)
        } else {
            None
        };

        for sf in &subfluxes {
            let s = &region.subcells[sf.sub];
            let mut form = LinearForm::default();
            form.add(s.cell, sf.cell_coef);
            form.constant += sf.constant;
            if let Some(x) = &solution {
                for (i, &a) in sf.edge_coef.iter().enumerate() {
                    if a == 0.0 {
                        continue;
                    }
                    for (j, sub) in region.subcells.iter().enumerate() {
                        form.add(sub.cell, a * x[(i, j)]);
                    }
                    form.constant += a * x[(i, nc)];
                }
            }
            let le = mesh.local_edge(s.cell, sf.edge).unwrap();
            cell_fluxes[s.cell][le].add_form(&form, 1.0);
        }
    }
    finish(mesh, problem, boundary, cell_fluxes)
}

/// The other edge of cell `k` at vertex `v`.
fn other_edge_at(mesh: &Mesh, k: usize, v: usize, e: usize) -> usize {
    let out = mesh.edge_out(k, v);
    if out == e {
        mesh.edge_in(k, v)
    } else {
        out
    }
}

/// Flux `F_{C,σ,v}` from the triplet centred at `c`, as coefficients over
/// cells plus a constant.
struct Candidate {
    cells: Vec<(usize, f64)>,
    constant: f64,
}

fn l_candidate(
    mesh: &Mesh,
    tensors: &[Tensor],
    boundary: &BoundaryData,
    v: usize,
    sigma: usize,
    c: usize,
) -> Result<Candidate, SchemeError> {
    let vx = mesh.vertex(v);
    let x = |k: usize| mesh.cell_point(k);
    let side = other_edge_at(mesh, c, v, sigma);
    let d = mesh.edge(sigma).other(c);
    let e = mesh.edge(side).other(c);

    // Unknown gradients: C, then D, then E (those present).
    let mut members = vec![c];
    members.extend(d);
    members.extend(e);
    let slot = |k: usize| members.iter().position(|&m| m == k).unwrap();
    let nu = 2 * members.len();
    // Right-hand side columns: u of each member, then a constant.
    let ncol = members.len() + 1;
    let mut a = DMatrix::zeros(nu, nu);
    let mut b = DMatrix::zeros(nu, ncol);
    let mut row = 0;

    let continuity = |a: &mut DMatrix<f64>, b: &mut DMatrix<f64>, row: &mut usize, p: Point, k: usize, l: usize| {
        let (sk, sl) = (slot(k), slot(l));
        let dk = p - x(k);
        let dl = p - x(l);
        a[(*row, 2 * sk)] += dk.x;
        a[(*row, 2 * sk + 1)] += dk.y;
        a[(*row, 2 * sl)] -= dl.x;
        a[(*row, 2 * sl + 1)] -= dl.y;
        b[(*row, sl)] += 1.0;
        b[(*row, sk)] -= 1.0;
        *row += 1;
    };
    let flux_balance = |a: &mut DMatrix<f64>, row: &mut usize, edge: usize, k: usize, l: usize| {
        let wk = tensors[k] * mesh.normal(k, edge);
        let wl = tensors[l] * mesh.normal(l, edge);
        let (sk, sl) = (slot(k), slot(l));
        a[(*row, 2 * sk)] += wk.x;
        a[(*row, 2 * sk + 1)] += wk.y;
        a[(*row, 2 * sl)] += wl.x;
        a[(*row, 2 * sl + 1)] += wl.y;
        *row += 1;
    };
    let dirichlet = |a: &mut DMatrix<f64>, b: &mut DMatrix<f64>, row: &mut usize, edge: usize, k: usize| {
        let dk = mesh.edge_midpoint(edge) - x(k);
        let sk = slot(k);
        a[(*row, 2 * sk)] += dk.x;
        a[(*row, 2 * sk + 1)] += dk.y;
        b[(*row, sk)] -= 1.0;
        b[(*row, members.len())] += boundary.edge(edge);
        *row += 1;
    };

    for (edge, other) in [(sigma, d), (side, e)] {
        match other {
            Some(l) => {
                continuity(&mut a, &mut b, &mut row, vx, c, l);
                continuity(&mut a, &mut b, &mut row, mesh.edge_midpoint(edge), c, l);
                flux_balance(&mut a, &mut row, edge, c, l);
            }
            None => dirichlet(&mut a, &mut b, &mut row, edge, c),
        }
    }
    debug_assert_eq!(row, nu);
    let g = solve_local(a, &b, "vertex", v)?;
    let half = (mesh.edge_midpoint(sigma) - vx).norm();
    let w = -half * (tensors[c] * mesh.normal(c, sigma));
    let sc = slot(c);
    let cells =
        members.iter().enumerate().map(|(j, &k)| (k, w.x * g[(2 * sc, j)] + w.y * g[(2 * sc + 1, j)])).collect();
    let constant = w.x * g[(2 * sc, members.len())] + w.y * g[(2 * sc + 1, members.len())];
    Ok(Candidate { cells, constant })
}

fn into_form(c: &Candidate, sign: f64) -> LinearForm {
    let mut f = LinearForm::default();
    for &(k, t) in &c.cells {
        f.add(k, sign * t);
    }
    f.constant = sign * c.constant;
    f
}

/// MPFA-L: each half-edge flux comes from one of two cell triplets, chosen
/// so that the coefficient of `u_K` is positive and that of `u_L` negative.
pub fn assemble_mpfa_l(mesh: &Mesh, problem: &Problem) -> Result<AssembledSystem, SchemeError> {
    let tensors = problem.cell_tensors(mesh)?;
    let boundary = problem.discretize_boundary(mesh);
    let mut cell_fluxes = empty_fluxes(mesh);

    for v in 0..mesh.n_vertices() {
        for &sigma in mesh.vertex_edges(v) {
            let edge = mesh.edge(sigma);
            let k = edge.left;
            let lk = mesh.local_edge(k, sigma).unwrap();
            let Some(l) = edge.right else {
                let cand = l_candidate(mesh, &tensors, &boundary, v, sigma, k)?;
                cell_fluxes[k][lk].add_form(&into_form(&cand, 1.0), 1.0);
                continue;
            };
            // Candidate centred at K gives F_{K,σ,v}; centred at L gives F_{L,σ,v} = -F_{K,σ,v}.
            let ck = l_candidate(mesh, &tensors, &boundary, v, sigma, k).map(|c| into_form(&c, 1.0));
            let cl = l_candidate(mesh, &tensors, &boundary, v, sigma, l).map(|c| into_form(&c, -1.0));
            let pick = match (ck, cl) {
                (Ok(a), Ok(b)) => select_l(a, b, k, l),
                (Ok(a), Err(_)) => a,
                (Err(_), Ok(b)) => b,
                (Err(e), Err(_)) => return Err(e),
            };
            let ll = mesh.local_edge(l, sigma).unwrap();
            cell_fluxes[k][lk].add_form(&pick, 1.0);
            cell_fluxes[l][ll].add_form(&pick, -1.0);
        }
    }
    finish(mesh, problem, boundary, cell_fluxes)
}

fn form_coef(f: &LinearForm, k: usize) -> f64 {
    f.terms.iter().filter(|t| t.0 == k).map(|t| t.1).sum()
}

/// Prefers a flux with `t_K > 0` and `t_L < 0`; ties go to the larger `|t_K|`.
fn select_l(a: LinearForm, b: LinearForm, k: usize, l: usize) -> LinearForm {
    let admissible = |f: &LinearForm| form_coef(f, k) > 0.0 && form_coef(f, l) < 0.0;
    match (admissible(&a), admissible(&b)) {
        (true, false) => a,
        (false, true) => b,
        _ => {
            if form_coef(&b, k).abs() > form_coef(&a, k).abs() {
                b
            } else {
                a
            }
        }
    }
}
