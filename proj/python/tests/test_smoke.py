import os
import pathlib

import numpy as np
import pytest

import ddetc

CONFIGS = pathlib.Path(
    os.environ.get("DDETC_CONFIG_DIR", pathlib.Path(__file__).resolve().parents[2] / "configs")
)


def test_version():
    assert ddetc.__version__ == "0.1.0"


def test_kernels():
    s = np.array([[2.0, 1.0], [1.0, 2.0]])
    vals, vecs = ddetc.sym_eig(s)
    np.testing.assert_allclose(vals, [1.0, 3.0], atol=1e-14)
    np.testing.assert_allclose(vecs @ np.diag(vals) @ vecs.T, s, atol=1e-13)
    assert ddetc.gen_eig_max(s, np.eye(2)) == pytest.approx(3.0)
    m = np.array([[1.0, 2.0], [2.0, 4.0], [0.0, 0.0]])
    np.testing.assert_allclose(ddetc.pinv(m), np.linalg.pinv(m), atol=1e-12)


def test_bad_input_raises():
    with pytest.raises(ddetc.InvalidInput):
        ddetc.sym_eig(np.array([[np.nan, 0.0], [0.0, 1.0]]))
    with pytest.raises(ddetc.Error):
        ddetc.Plant.constant(np.eye(2), np.ones((3, 1)))


def test_maxdet_scalar():
    # max log x s.t. 1 - x > 0: optimum approaches 1 from below.
    sol = ddetc.solve_maxdet(
        [(np.array([[0.0]]), [np.array([[1.0]])]), (np.array([[1.0]]), [np.array([[-1.0]])])],
        num_vars=1,
        det_block=0,
    )
    assert sol["status"] == "Optimal"
    assert 0.99 < sol["x"][0] < 1.0


def test_plant_and_window():
    a0, b0 = ddetc.reference_a0(), ddetc.reference_b0()
    plant = ddetc.Plant.switching(a0, b0, ddetc.flipped_input_matrix(b0, 1.0), 12)
    assert plant.nx == 2 and plant.nu == 2
    a, b = plant.eval(13)
    np.testing.assert_allclose(b[:, 1], [-1.0, -0.2])

    rng = np.random.default_rng(0)
    w = ddetc.DataWindow.zeros(2, 2, 4)
    x = np.array([1.0, 1.0])
    for k in range(4):
        u = rng.standard_normal(2)
        xp = plant.step(k, x, u)
        w = w.push(x, xp, u)
        x = xp
    assert w.kappa == 4 and w.rank() == 4
    assert ddetc.consistency_residual(w, plant) < 1e-12


def test_synthesis_round_trip():
    a0, b0 = ddetc.reference_a0(), ddetc.reference_b0()
    plant = ddetc.Plant.constant(a0, b0)
    rng = np.random.default_rng(1)
    w = ddetc.DataWindow.zeros(2, 2, 4)
    x = np.array([1.0, -1.0])
    for k in range(4):
        u = rng.standard_normal(2)
        xp = plant.step(k, x, u)
        w = w.push(x, xp, u)
        x = xp
    bundle = ddetc.synthesize(w, eps_F=0.1)
    assert bundle is not None
    assert 0.0 < bundle.a1 < 1.0
    closed = a0 + b0 @ bundle.K
    assert max(abs(np.linalg.eigvals(closed))) < 1.0
    report = ddetc.verify_property(bundle, w, num_samples=50, seed=3)
    assert report["violations"] == 0
    assert ddetc.contains(w, bundle.F, a0, b0)


def test_simulate_config(tmp_path):
    out = ddetc.simulate(CONFIGS / "switching_event.cfg", seed=42, out_dir=tmp_path)
    assert out["status"] == "completed"
    assert out["converged"]
    assert out["x"].shape[1] == 2
    assert len(out["k"]) == len(out["V"])
    assert (tmp_path / "trajectory.csv").exists()


def test_simulate_text_config_error():
    with pytest.raises(ddetc.ConfigError):
        ddetc.simulate_text("[plant]\nkind = bogus\n")


def test_suite_runs():
    assert "solver" in ddetc.suite_names()
    passed, lines = ddetc.run_suite("solver", samples=20)
    assert passed, "\n".join(lines)
