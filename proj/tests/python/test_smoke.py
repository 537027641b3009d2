import json
import os
import subprocess

import numpy as np
import pytest

import mrta


def test_version():
    assert isinstance(mrta.__version__, str) and mrta.__version__


def test_generate_deterministic():
    a = mrta.generate_scenario(10, 2, seed=5)
    b = mrta.generate_scenario(10, 2, seed=5)
    assert a == b
    doc = json.loads(a)
    assert len(doc["tasks"]) == 10
    assert doc["fleet"]["n_robots"] == 2
    assert mrta.scenario_hash(a) == mrta.scenario_hash(b)
    assert mrta.scenario_hash(a) != mrta.scenario_hash(mrta.generate_scenario(10, 2, seed=6))


def test_run_episode_methods():
    scen = mrta.generate_scenario(10, 2, seed=5)
    for method in ("feas-rnd", "big-mrta"):
        r = mrta.run_episode(scen, method=method, seed=7)
        assert 0.0 <= r["completion_rate"] <= 1.0
        assert r["n_decisions"] > 0
        assert r["n_success"] == round(r["completion_rate"] * 10)
        assert abs(r["f_cost"] - (1.0 - r["completion_rate"])) < 1e-12
    # deterministic rerun
    a = mrta.run_episode(scen, method="big-mrta")
    b = mrta.run_episode(scen, method="big-mrta")
    assert a == b


def test_run_episode_errors():
    scen = mrta.generate_scenario(5, 2, seed=1)
    with pytest.raises(mrta.ContractError):
        mrta.run_episode(scen, method="nope")
    with pytest.raises(mrta.ContractError):
        mrta.run_episode(scen, method="big-cam")
    with pytest.raises(mrta.IoError):
        mrta.run_episode(scen, method="big-cam", params_path="missing.params")


def test_big_cam_roundtrip(tmp_path):
    path = str(tmp_path / "init.params")
    n = mrta.write_initial_params(path, seed=3)
    assert n == 201984
    scen = mrta.generate_scenario(8, 2, seed=2)
    r = mrta.run_episode(scen, method="big-cam", seed=9, params_path=path)
    assert 0.0 <= r["completion_rate"] <= 1.0
    assert r["n_decisions"] > 0


def test_hungarian():
    w = np.array([[1.0, 2.0], [2.0, 4.0]])
    pairs, obj = mrta.hungarian_max(w, np.ones_like(w))
    assert sorted(pairs) == [(0, 0), (1, 1)]
    assert obj == 5.0
    pairs, obj = mrta.hungarian_max(w, np.zeros_like(w))
    assert pairs == [] and obj == 0.0
    with pytest.raises(mrta.ContractError):
        mrta.hungarian_max(w, np.ones((1, 2)))


def test_welch():
    t, p, degenerate = mrta.welch_t([1.0, 2.0, 3.0], [1.0, 2.0, 3.0])
    assert t == 0.0 and abs(p - 1.0) < 1e-12 and not degenerate
    t, p, _ = mrta.welch_t([1.0, 2.0, 3.0], [11.0, 12.0, 13.0])
    assert t < 0.0 and p < 0.01


def test_sinkhorn():
    a = np.array([[0.7, 0.1], [0.1, 0.1]])
    b = np.array([[0.2, 0.3], [0.4, 0.1]])
    assert mrta.sinkhorn_distance(a, a) == 0.0
    d = mrta.sinkhorn_distance(a, b)
    assert 0.0 < d <= 1.0
    assert mrta.sinkhorn_distance(b, a) == d


def test_cli_binary():
    bin_path = os.environ.get("MRTA_BIN")
    if not bin_path:
        pytest.skip("MRTA_BIN not set")
    out = subprocess.run([bin_path, "--version"], capture_output=True, text=True)
    assert out.returncode == 0
    assert mrta.__version__ in out.stdout
