use std::fmt::Write;

use super::SparseMatrix;

/// Matrix Market coordinate format, 1-based indices.
pub fn write_matrix_market(a: &SparseMatrix) -> String {
    let mut s = String::from("%%MatrixMarket matrix coordinate real general\n");
    let _ = writeln!(s, "{} {} {}", a.dim(), a.dim(), a.nnz());
    for (i, j, v) in a.triplets() {
        let _ = writeln!(s, "{} {} {:e}", i + 1, j + 1, v);
    }
    s
}
