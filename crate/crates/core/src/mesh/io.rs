//! Plain-text mesh format.
//!
//! ```text
//! NV NC NE
//! x y            (NV lines)
//! k v1 ... vk    (NC lines, counter-clockwise)
//! ```
//! Edges are derived from the cells, so `NE` must equal the derived count.
//! `#` starts a comment. Cell points are the barycenters.

use std::fmt::Write;

use super::{Mesh, MeshError};
use crate::geometry::Point;

fn parse_err(line: usize, msg: impl Into<String>) -> MeshError {
    MeshError::Parse { line, msg: msg.into() }
}

pub fn read_mesh(text: &str) -> Result<Mesh, MeshError> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.split('#').next().unwrap_or("").trim()))
        .filter(|(_, l)| !l.is_empty());

    let (no, header) = lines.next().ok_or_else(|| parse_err(1, "missing header"))?;
    let counts = header
        .split_whitespace()
        .map(|t| t.parse::<usize>().map_err(|_| parse_err(no, format!("bad count '{t}'"))))
        .collect::<Result<Vec<_>, _>>()?;
    let [nv, nc, ne] = counts[..] else {
        return Err(parse_err(no, "header must be 'NV NC NE'"));
    };

    let mut vertices = Vec::with_capacity(nv);
    for _ in 0..nv {
        let (no, l) = lines.next().ok_or_else(|| parse_err(0, "unexpected end of file in vertices"))?;
        let xy = l
            .split_whitespace()
            .map(|t| t.parse::<f64>().map_err(|_| parse_err(no, format!("bad coordinate '{t}'"))))
            .collect::<Result<Vec<_>, _>>()?;
        if xy.len() != 2 || !xy.iter().all(|c| c.is_finite()) {
            return Err(parse_err(no, "vertex line must be 'x y'"));
        }
        vertices.push(Point::new(xy[0], xy[1]));
    }

    let mut cells = Vec::with_capacity(nc);
    for _ in 0..nc {
        let (no, l) = lines.next().ok_or_else(|| parse_err(0, "unexpected end of file in cells"))?;
        let ids = l
            .split_whitespace()
            .map(|t| t.parse::<usize>().map_err(|_| parse_err(no, format!("bad index '{t}'"))))
            .collect::<Result<Vec<_>, _>>()?;
        let (&k, rest) = ids.split_first().ok_or_else(|| parse_err(no, "empty cell line"))?;
        if rest.len() != k {
            return Err(parse_err(no, format!("cell declares {k} vertices but lists {}", rest.len())));
        }
        cells.push(rest.to_vec());
    }
    if let Some((no, _)) = lines.next() {
        return Err(parse_err(no, "trailing data"));
    }

    let mesh = Mesh::new(vertices, cells, None)?;
    if mesh.n_edges() != ne {
        return Err(parse_err(1, format!("header declares {ne} edges, cells define {}", mesh.n_edges())));
    }
    Ok(mesh)
}

pub fn write_mesh(mesh: &Mesh) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "{} {} {}", mesh.n_vertices(), mesh.n_cells(), mesh.n_edges());
    for p in mesh.vertices() {
        let _ = writeln!(s, "{} {}", p.x, p.y);
    }
    for c in mesh.cells() {
        let _ = write!(s, "{}", c.len());
        for v in c {
            let _ = write!(s, " {v}");
        }
        s.push('\n');
    }
    s
}
