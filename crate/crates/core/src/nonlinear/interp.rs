use crate::mesh::Mesh;
use crate::problem::TensorField;

/// Convex inverse-distance weights from the cells around each vertex,
/// restricted to one smoothness zone of the tensor.
#[derive(Debug, Clone, PartialEq)]
pub struct VertexInterpolator {
    weights: Vec<Vec<(usize, f64)>>,
}

impl VertexInterpolator {
    /// Uses the zone with most adjacent cells (lowest zone id on ties).
    pub fn new(mesh: &Mesh, tensor: &TensorField) -> Self {
        let zones: Vec<usize> = mesh.cell_points().iter().map(|p| tensor.zone(p)).collect();
        let weights = (0..mesh.n_vertices())
            .map(|v| {
                let cells = mesh.vertex_cells(v);
                let mut counts: Vec<(usize, usize)> = Vec::new();
                for &k in cells {
                    match counts.iter_mut().find(|(z, _)| *z == zones[k]) {
                        Some(c) => c.1 += 1,
                        None => counts.push((zones[k], 1)),
                    }
                }
                let Some(&(zone, _)) = counts.iter().max_by(|a, b| a.1.cmp(&b.1).then(b.0.cmp(&a.0))) else {
                    return Vec::new();
                };
                let p = mesh.vertex(v);
                let raw: Vec<(usize, f64)> = cells
                    .iter()
                    .filter(|&&k| zones[k] == zone)
                    .map(|&k| (k, 1.0 / (mesh.cell_point(k) - p).norm()))
                    .collect();
                let total: f64 = raw.iter().map(|w| w.1).sum();
                raw.into_iter().map(|(k, w)| (k, w / total)).collect()
            })
            .collect();
        VertexInterpolator { weights }
    }

    pub fn weights(&self, v: usize) -> &[(usize, f64)] {
        &self.weights[v]
    }

    pub fn value(&self, v: usize, cells: &[f64]) -> f64 {
        self.weights[v].iter().map(|&(k, w)| w * cells[k]).sum()
    }
}
