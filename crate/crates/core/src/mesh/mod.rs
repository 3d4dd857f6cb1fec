//! Admissible polygonal meshes: vertices, counter-clockwise cells, derived
//! edges and one cell point `x_K` per cell.

mod dual;
mod generators;
mod io;
mod orthogonality;

use std::collections::HashMap;

use thiserror::Error;

use crate::geometry::{polygon_centroid, polygon_diameter, polygon_signed_area, strictly_inside, Point, Tensor};
use crate::tolerances::{AREA_PARTITION_REL, DEGENERATE_REL};

pub use dual::{Diamond, InteractionRegion, SubCell};
pub use generators::{CellPointRule, Rect};
pub use io::{read_mesh, write_mesh};
pub use orthogonality::{check_orthogonality, OrthogonalityReport};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MeshError {
    #[error("mesh has no cells")]
    Empty,
    #[error("cell {cell} references missing vertex {vertex}")]
    VertexOutOfRange { cell: usize, vertex: usize },
    #[error("cell {cell} has fewer than 3 vertices")]
    TooFewVertices { cell: usize },
    #[error("cell {cell} has non-positive area {area:e}")]
    NonPositiveArea { cell: usize, area: f64 },
    #[error("edge ({0}, {1}) is degenerate")]
    DegenerateEdge(usize, usize),
    #[error("edge ({0}, {1}) is shared by more than two cells or inconsistently oriented")]
    NonManifoldEdge(usize, usize),
    #[error("cell point of cell {cell} is not strictly inside the cell")]
    CellPointOutside { cell: usize },
    #[error("cell areas sum to {sum} but the domain area is {expected}")]
    AreaMismatch { sum: f64, expected: f64 },
    #[error("wrong number of cell points: {got}, expected {expected}")]
    CellPointCount { got: usize, expected: usize },
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("dual cell of vertex {vertex} overlaps a neighbour")]
    OverlappingDualCell { vertex: usize },
}

/// An edge `σ` with its endpoints oriented counter-clockwise for `left`.
#[derive(Debug, Clone, PartialEq)]
pub struct Edge {
    pub vertices: [usize; 2],
    pub left: usize,
    pub right: Option<usize>,
}

impl Edge {
    pub fn is_boundary(&self) -> bool {
        self.right.is_none()
    }

    /// The cell across the edge from `cell`.
    pub fn other(&self, cell: usize) -> Option<usize> {
        if cell == self.left {
            self.right
        } else {
            Some(self.left)
        }
    }
}

#[derive(Debug, Clone)]
pub struct Mesh {
    vertices: Vec<Point>,
    cells: Vec<Vec<usize>>,
    cell_edges: Vec<Vec<usize>>,
    edges: Vec<Edge>,
    cell_points: Vec<Point>,
    cell_areas: Vec<f64>,
    cell_centroids: Vec<Point>,
    cell_diameters: Vec<f64>,
    edge_lengths: Vec<f64>,
    edge_midpoints: Vec<Point>,
    edge_normals: Vec<Point>,
    vertex_cells: Vec<Vec<usize>>,
    vertex_edges: Vec<Vec<usize>>,
    vertex_on_boundary: Vec<bool>,
    domain_area: f64,
    scale: f64,
}

impl Mesh {
    /// Builds a mesh from vertices and counter-clockwise cells. Cell points
    /// default to the cell barycenters.
    pub fn new(
        vertices: Vec<Point>,
        cells: Vec<Vec<usize>>,
        cell_points: Option<Vec<Point>>,
    ) -> Result<Self, MeshError> {
        if cells.is_empty() {
            return Err(MeshError::Empty);
        }
        let nv = vertices.len();
        let (xmin, xmax, ymin, ymax) =
            vertices.iter().fold((f64::MAX, f64::MIN, f64::MAX, f64::MIN), |(a, b, c, d), p| {
                (a.min(p.x), b.max(p.x), c.min(p.y), d.max(p.y))
            });
        let extent = (xmax - xmin).max(ymax - ymin).max(f64::MIN_POSITIVE);
        let len_tol = DEGENERATE_REL * extent;
        let area_tol = DEGENERATE_REL * extent * extent;

        let mut cell_areas = Vec::with_capacity(cells.len());
        let mut cell_centroids = Vec::with_capacity(cells.len());
        let mut cell_diameters = Vec::with_capacity(cells.len());
        for (k, cell) in cells.iter().enumerate() {
            if cell.len() < 3 {
                return Err(MeshError::TooFewVertices { cell: k });
            }
            if let Some(&v) = cell.iter().find(|&&v| v >= nv) {
                return Err(MeshError::VertexOutOfRange { cell: k, vertex: v });
            }
            let poly: Vec<Point> = cell.iter().map(|&v| vertices[v]).collect();
            let area = polygon_signed_area(&poly);
            if area <= area_tol {
                return Err(MeshError::NonPositiveArea { cell: k, area });
            }
            cell_areas.push(area);
            cell_centroids.push(polygon_centroid(&poly));
            cell_diameters.push(polygon_diameter(&poly));
        }

        let mut edges: Vec<Edge> = Vec::new();
        let mut lookup: HashMap<(usize, usize), usize> = HashMap::new();
        let mut cell_edges = Vec::with_capacity(cells.len());
        for (k, cell) in cells.iter().enumerate() {
            let n = cell.len();
            let mut local = Vec::with_capacity(n);
            for i in 0..n {
                let a = cell[i];
                let b = cell[(i + 1) % n];
                if (vertices[a] - vertices[b]).norm() <= len_tol {
                    return Err(MeshError::DegenerateEdge(a, b));
                }
                let key = (a.min(b), a.max(b));
                match lookup.get(&key) {
                    None => {
                        lookup.insert(key, edges.len());
                        local.push(edges.len());
                        edges.push(Edge { vertices: [a, b], left: k, right: None });
                    }
                    Some(&e) => {
                        let edge = &mut edges[e];
                        if edge.right.is_some() || edge.vertices != [b, a] || edge.left == k {
                            return Err(MeshError::NonManifoldEdge(a, b));
                        }
                        edge.right = Some(k);
                        local.push(e);
                    }
                }
            }
            cell_edges.push(local);
        }

        let mut edge_lengths = Vec::with_capacity(edges.len());
        let mut edge_midpoints = Vec::with_capacity(edges.len());
        let mut edge_normals = Vec::with_capacity(edges.len());
        let mut vertex_on_boundary = vec![false; nv];
        let mut vertex_edges = vec![Vec::new(); nv];
        let mut domain_area = 0.0;
        for (e, edge) in edges.iter().enumerate() {
            let a = vertices[edge.vertices[0]];
            let b = vertices[edge.vertices[1]];
            let t = b - a;
            let len = t.norm();
            edge_lengths.push(len);
            edge_midpoints.push((a + b) * 0.5);
            edge_normals.push(Point::new(t.y, -t.x) / len);
            for &v in &edge.vertices {
                vertex_edges[v].push(e);
            }
            if edge.is_boundary() {
                vertex_on_boundary[edge.vertices[0]] = true;
                vertex_on_boundary[edge.vertices[1]] = true;
                domain_area += 0.5 * crate::geometry::cross(&a, &b);
            }
        }

        let sum: f64 = cell_areas.iter().sum();
        if (sum - domain_area).abs() > AREA_PARTITION_REL * domain_area.abs().max(area_tol) {
            return Err(MeshError::AreaMismatch { sum, expected: domain_area });
        }

        let mut vertex_cells = vec![Vec::new(); nv];
        for (k, cell) in cells.iter().enumerate() {
            for &v in cell {
                vertex_cells[v].push(k);
            }
        }

        let mut mesh = Mesh {
            vertices,
            cells,
            cell_edges,
            edges,
            cell_points: Vec::new(),
            cell_areas,
            cell_centroids,
            cell_diameters,
            edge_lengths,
            edge_midpoints,
            edge_normals,
            vertex_cells,
            vertex_edges,
            vertex_on_boundary,
            domain_area,
            scale: extent,
        };
        mesh.order_vertex_fans()?;
        let points = cell_points.unwrap_or_else(|| mesh.cell_centroids.clone());
        mesh.set_cell_points(points)?;
        Ok(mesh)
    }

    /// Sorts the cells around each vertex counter-clockwise. For a boundary
    /// vertex the fan starts at the cell owning the outgoing boundary edge.
    fn order_vertex_fans(&mut self) -> Result<(), MeshError> {
        for v in 0..self.vertices.len() {
            let fan = &self.vertex_cells[v];
            if fan.len() <= 1 {
                continue;
            }
            let start = if self.vertex_on_boundary[v] {
                *fan.iter()
                    .find(|&&k| self.edge(self.edge_out(k, v)).is_boundary())
                    .ok_or(MeshError::NonManifoldEdge(v, v))?
            } else {
                fan[0]
            };
            let mut ordered = vec![start];
            let mut k = start;
            loop {
                let e = self.edge_in(k, v);
                match self.edges[e].other(k) {
                    Some(next) if next != start => {
                        if ordered.len() >= fan.len() {
                            return Err(MeshError::NonManifoldEdge(v, v));
                        }
                        ordered.push(next);
                        k = next;
                    }
                    _ => break,
                }
            }
            if ordered.len() != fan.len() {
                return Err(MeshError::NonManifoldEdge(v, v));
            }
            self.vertex_cells[v] = ordered;
        }
        Ok(())
    }

    /// Replaces the cell points, checking that each is strictly inside its cell.
    pub fn set_cell_points(&mut self, points: Vec<Point>) -> Result<(), MeshError> {
        if points.len() != self.cells.len() {
            return Err(MeshError::CellPointCount { got: points.len(), expected: self.cells.len() });
        }
        for (k, p) in points.iter().enumerate() {
            let poly = self.cell_polygon(k);
            if !strictly_inside(p, &poly, DEGENERATE_REL * self.cell_diameters[k]) {
                return Err(MeshError::CellPointOutside { cell: k });
            }
        }
        self.cell_points = points;
        Ok(())
    }

    pub fn with_cell_points(mut self, points: Vec<Point>) -> Result<Self, MeshError> {
        self.set_cell_points(points)?;
        Ok(self)
    }

    /// Moves each triangle's cell point to its incenter for the metric of
    /// `tensor(x_K)` (the plain incenter for the identity).
    pub fn with_lambda_incenters(self, tensor: impl Fn(&Point) -> Tensor) -> Result<Self, MeshError> {
        let pts = (0..self.n_cells())
            .map(|k| {
                let c = self.cell_points[k];
                generators::lambda_incenter(&self.cell_polygon(k), &tensor(&c))
            })
            .collect::<Result<Vec<_>, _>>()?;
        self.with_cell_points(pts)
    }

    /// Applies `f` to every vertex; cell points become barycenters.
    pub fn map_vertices(&self, f: impl Fn(&Point) -> Point) -> Result<Self, MeshError> {
        Mesh::new(self.vertices.iter().map(f).collect(), self.cells.clone(), None)
    }

    pub fn n_cells(&self) -> usize {
        self.cells.len()
    }

    pub fn n_edges(&self) -> usize {
        self.edges.len()
    }

    pub fn n_vertices(&self) -> usize {
        self.vertices.len()
    }

    pub fn vertices(&self) -> &[Point] {
        &self.vertices
    }

    pub fn vertex(&self, v: usize) -> Point {
        self.vertices[v]
    }

    pub fn cell_vertices(&self, k: usize) -> &[usize] {
        &self.cells[k]
    }

    pub fn cells(&self) -> &[Vec<usize>] {
        &self.cells
    }

    pub fn cell_polygon(&self, k: usize) -> Vec<Point> {
        self.cells[k].iter().map(|&v| self.vertices[v]).collect()
    }

    /// Edges of cell `k`; local edge `i` joins local vertices `i` and `i + 1`.
    pub fn cell_edges(&self, k: usize) -> &[usize] {
        &self.cell_edges[k]
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn edge(&self, e: usize) -> &Edge {
        &self.edges[e]
    }

    pub fn cell_point(&self, k: usize) -> Point {
        self.cell_points[k]
    }

    pub fn cell_points(&self) -> &[Point] {
        &self.cell_points
    }

    pub fn cell_area(&self, k: usize) -> f64 {
        self.cell_areas[k]
    }

    pub fn cell_areas(&self) -> &[f64] {
        &self.cell_areas
    }

    pub fn cell_centroid(&self, k: usize) -> Point {
        self.cell_centroids[k]
    }

    pub fn cell_diameter(&self, k: usize) -> f64 {
        self.cell_diameters[k]
    }

    pub fn edge_length(&self, e: usize) -> f64 {
        self.edge_lengths[e]
    }

    pub fn edge_midpoint(&self, e: usize) -> Point {
        self.edge_midpoints[e]
    }

    pub fn edge_endpoints(&self, e: usize) -> (Point, Point) {
        let [a, b] = self.edges[e].vertices;
        (self.vertices[a], self.vertices[b])
    }

    /// Outward unit normal `n_{K,σ}` of cell `k` on edge `e`.
    pub fn normal(&self, k: usize, e: usize) -> Point {
        if self.edges[e].left == k {
            self.edge_normals[e]
        } else {
            -self.edge_normals[e]
        }
    }

    pub fn is_boundary_edge(&self, e: usize) -> bool {
        self.edges[e].is_boundary()
    }

    pub fn is_boundary_vertex(&self, v: usize) -> bool {
        self.vertex_on_boundary[v]
    }

    /// Cells around vertex `v`, counter-clockwise.
    pub fn vertex_cells(&self, v: usize) -> &[usize] {
        &self.vertex_cells[v]
    }

    pub fn vertex_edges(&self, v: usize) -> &[usize] {
        &self.vertex_edges[v]
    }

    /// Local position of vertex `v` in cell `k`.
    pub fn local_vertex(&self, k: usize, v: usize) -> Option<usize> {
        self.cells[k].iter().position(|&w| w == v)
    }

    /// Edge of `k` leaving `v` counter-clockwise.
    pub fn edge_out(&self, k: usize, v: usize) -> usize {
        let i = self.local_vertex(k, v).expect("vertex not in cell");
        self.cell_edges[k][i]
    }

    /// Edge of `k` arriving at `v` counter-clockwise.
    pub fn edge_in(&self, k: usize, v: usize) -> usize {
        let i = self.local_vertex(k, v).expect("vertex not in cell");
        let n = self.cells[k].len();
        self.cell_edges[k][(i + n - 1) % n]
    }

    /// Local index of edge `e` in cell `k`.
    pub fn local_edge(&self, k: usize, e: usize) -> Option<usize> {
        self.cell_edges[k].iter().position(|&f| f == e)
    }

    pub fn boundary_edges(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.edges.len()).filter(|&e| self.edges[e].is_boundary())
    }

    pub fn interior_edges(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.edges.len()).filter(|&e| !self.edges[e].is_boundary())
    }

    /// Mesh size `h`: the largest cell diameter.
    pub fn h(&self) -> f64 {
        self.cell_diameters.iter().cloned().fold(0.0, f64::max)
    }

    /// Area enclosed by the boundary edges.
    pub fn domain_area(&self) -> f64 {
        self.domain_area
    }

    /// Extent of the vertex bounding box, used to scale tolerances.
    pub fn scale(&self) -> f64 {
        self.scale
    }

    /// True when the cell has a boundary edge.
    pub fn touches_boundary(&self, k: usize) -> bool {
        self.cell_edges[k].iter().any(|&e| self.edges[e].is_boundary())
    }

    /// Distance from the cell point of `k` to the line of edge `e`.
    pub fn distance_to_edge_line(&self, k: usize, e: usize) -> f64 {
        (self.edge_midpoints[e] - self.cell_points[k]).dot(&self.normal(k, e))
    }
}
