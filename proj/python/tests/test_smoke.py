import math

import numpy as np
import pytest

import dmawpt


def test_materials_and_microstrip():
    names = [m.name for m in dmawpt.materials()]
    assert "DuPont Pyralux AP-9161" in names
    assert len(names) == 7
    ms = dmawpt.microstrip("DuPont Pyralux AP-9161", 10e9)
    assert ms["static_eff_dielectric"] == pytest.approx(2.5328201177351377, rel=1e-12)
    assert ms["alpha_np_per_m"] > 0.0


def test_array_shape():
    assert dmawpt.array_shape(0.10, 10e9) == (6, 16)
    with pytest.raises(dmawpt.ZeroArray):
        dmawpt.array_shape(0.001, 10e9)


def test_projection_lands_on_the_circle():
    rng = np.random.default_rng(0)
    q = rng.normal(size=50) + 1j * rng.normal(size=50)
    phases, weights = dmawpt.project_to_lorentzian(q)
    assert np.allclose(np.abs(weights - 0.5j), 0.5)
    assert np.allclose(weights, (1j + np.exp(1j * phases)) / 2)


def test_fd_matches_mrt_for_one_user():
    g = np.array([1e-3, 0.0, 0.0, 0.0], dtype=complex)
    p, w, rx = dmawpt.solve_fd([g], [1e-4])
    assert p == pytest.approx(100.0, rel=1e-4)
    assert rx[0] >= 1e-4 * (1 - 1e-6)
    assert dmawpt.mrt_lower_bound([g], [1e-4]) == pytest.approx(100.0)
    with pytest.raises(dmawpt.InfeasibleProblem):
        dmawpt.solve_fd([np.zeros(3, dtype=complex)], [1e-4])


def test_run_experiment_and_determinism():
    cfg = {
        "system": {"antenna_length_m": 0.05, "realizations": 2},
        "methods": ["EB_ASD", "FD"],
        "algorithm": {"C": 2, "I": 4},
    }
    recs = dmawpt.run_experiment(cfg)
    assert len(recs) == 4
    assert all(r["feasible"] for r in recs)
    assert recs[0]["scene_checksum"] == recs[1]["scene_checksum"]
    assert dmawpt.records_csv(cfg) == dmawpt.records_csv(cfg)
    with pytest.raises(dmawpt.ConfigError):
        dmawpt.run_experiment({"methods": ["GA"]})


def test_optimize_scene_trace_is_monotone():
    cfg = {"system": {"antenna_length_m": 0.05, "num_users": 2}, "methods": ["EB_ASD"]}
    s = dmawpt.optimize_scene(cfg, realization=0, seed=3)
    assert s["feasible"]
    best = s["best_trace"]
    assert all(b <= a for a, b in zip(best, best[1:]))
    assert math.isfinite(s["transmit_power_w"])
