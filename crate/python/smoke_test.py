"""Smoke test of the Python bindings.

Build and install first:  pip install --no-build-isolation ./crates/python
"""

import math
import tempfile

import polyfv


def main():
    mesh = polyfv.Mesh.cartesian(16, 16).perturbed(0.1, 1)
    assert mesh.n_cells == 256

    problem = polyfv.Problem.manufactured("sine_iso")
    sol = polyfv.solve(mesh, problem, "hmm")
    err = max(abs(u - problem.exact(x, y)) for u, (x, y) in zip(sol.cells, mesh.cell_points()))
    print(f"hmm sine_iso on {mesh}: max cell error {err:.2e}")
    assert err < 1e-2

    report = sol.diagnostics()
    assert report["spd"]["symmetric"] and report["flux_laws"]["ok"], report

    tpfa = polyfv.solve(polyfv.Mesh.cartesian(8, 8), polyfv.Problem.manufactured("bubble_iso"), "tpfa")
    assert tpfa.m_matrix()["ok"]

    # Monotone nonlinear scheme: nonnegative data give a nonnegative solution.
    spec = {
        "custom": {
            "tensor": {"type": "rotated", "ratio": 50.0, "angle": 30.0},
            "source": {"type": "bump", "centre": [0.5, 0.5], "radius": 0.3, "height": 10.0},
            "boundary": {"type": "zero"},
        }
    }
    mono = polyfv.solve(mesh, polyfv.Problem(spec), "mono_poly")
    print(f"mono_poly: min {mono.min():.3e} after {mono.iterations} Picard iterations")
    assert mono.min() >= -1e-10

    corrected = polyfv.solve(polyfv.Mesh.cartesian(8, 8), polyfv.Problem(spec), {"name": "corrected", "base": {"name": "hmm"}})
    assert corrected.min() >= -1e-10

    rows, cols, vals, rhs = sol.system()
    assert len(rows) == len(cols) == len(vals) and len(rhs) > 0

    config = {
        "name": "smoke",
        "mesh": {"nx": 8, "ny": 8},
        "problem": {"manufactured": {"case": "sine_iso"}},
        "scheme": {"name": "ddfv"},
        "run": {"mode": "convergence", "levels": [8, 16, 32]},
        "expect": {"min_order_u": 1.8},
    }
    with tempfile.TemporaryDirectory() as out:
        summary = polyfv.run_experiment(config, out_dir=out)
    print(f"ddfv convergence: {summary}")
    assert summary["passed"], summary
    assert math.isfinite(sol.max())
    print("smoke test passed")


if __name__ == "__main__":
    main()
