import math

import numpy as np
import pytest

import savmhd


def test_mesh_counts():
    mesh = savmhd.build_unit_square_mesh(2)
    assert (mesh.num_vertices, mesh.num_edges, mesh.num_triangles) == (9, 16, 8)
    assert mesh.vertices.shape == (9, 2)
    assert mesh.triangles.shape == (8, 3)
    assert savmhd.validate_mesh(mesh) == []
    with pytest.raises(ValueError):
        savmhd.build_unit_square_mesh(0)


def test_first_order_convergence():
    rows = savmhd.convergence(1, [0.1, 0.05], mesh_n=6)
    assert rows[0]["rate_u_l2"] is None
    assert 0.85 <= rows[1]["rate_u_l2"] <= 1.15
    assert rows[1]["err_u_l2"] < rows[0]["err_u_l2"]


def test_second_order_convergence():
    rows = savmhd.convergence(2, [0.05, 0.025], mesh_n=6)
    assert 1.8 <= rows[1]["rate_u_l2"] <= 2.2


def test_stability_run_diagnostics():
    out = savmhd.simulate("stability", order=1, tau=0.1, mesh_n=8, re=20.0, kappa=20.0, t_final=1.0)
    energy = out["energy"]
    assert len(energy) == 11
    assert np.all(np.diff(energy) <= 1e-12)
    assert np.all(out["denominator"] > 0)
    assert out["a2_identity_defect"].max() <= 1e-10
    assert out["max_div_j"].max() <= 1e-9
    assert np.abs(out["energy_identity_residual"]).max() <= 1e-8
    assert "errors" not in out


def test_manufactured_errors_reported():
    out = savmhd.simulate("accuracy", order=2, tau=0.2, mesh_n=6)
    assert out["errors"]["err_q_abs"] < 0.01
    assert out["errors"]["err_J_div"] >= 0.0
    assert out["errors"]["rate_u_l2"] is None
    assert math.isfinite(out["q"])


def test_selftest_and_injection():
    assert all(s["passed"] for s in savmhd.selftest())
    flipped = {s["name"]: s["passed"] for s in savmhd.selftest("flip-lorentz-sign")}
    assert not flipped["duality"]


def test_cli_in_process(tmp_path):
    assert savmhd.cli(["accuracy", "--tau", "0.2", "--mesh-n", "3", "--out", str(tmp_path)]) == 0
    assert (tmp_path / "accuracy_order1.csv").exists()
    assert savmhd.cli(["accuracy", "--tau", "0.3"]) == 1
