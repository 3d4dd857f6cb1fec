use polyfv_py::polyfv_module;
use pyo3::prelude::*;
use pyo3::types::PyDict;

fn with_module(code: &str) {
    pyo3::append_to_inittab!(polyfv_module);
    pyo3::prepare_freethreaded_python();
    Python::with_gil(|py| {
        let globals = PyDict::new_bound(py);
        py.run_bound(code, Some(&globals), None).map_err(|e| e.display(py)).unwrap();
    });
}

#[test]
fn python_round_trip() {
    with_module(
        r#"
import polyfv
mesh = polyfv.Mesh.cartesian(6, 6)
assert mesh.n_cells == 36 and mesh.n_vertices == 49
assert polyfv.Mesh.from_text(mesh.to_text()).n_edges == mesh.n_edges

zero = polyfv.Problem({"custom": {"tensor": {"type": "identity"}, "source": {"type": "zero"}, "boundary": {"type": "zero"}}})
sol = polyfv.solve(mesh, zero, "tpfa")
assert all(u == 0.0 for u in sol.cells)
assert sol.m_matrix()["ok"] and sol.spd()["symmetric"]

affine = polyfv.Problem.manufactured("affine", a=1.0, b=2.0, c=0.0)
sol = polyfv.solve(mesh.perturbed(0.2, 4), affine, {"name": "hmm"})
pts = mesh.perturbed(0.2, 4).cell_points()
assert max(abs(u - (x + 2 * y)) for u, (x, y) in zip(sol.cells, pts)) < 1e-9
assert sol.diagnostics()["exactness"]["ok"]

try:
    polyfv.solve(mesh, zero, "nope")
    raise AssertionError("unknown scheme accepted")
except ValueError:
    pass
try:
    polyfv.Problem({"custom": {"tensor": {"type": "identity"}}})
    raise AssertionError("incomplete problem accepted")
except ValueError:
    pass
"#,
    );
}
