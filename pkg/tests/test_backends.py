import os
import subprocess
import sys

import numpy as np
import pytest

from hnoma_sim import _backend, channel, polar, sim
from hnoma_sim.scma import build_factor_graph, generate_codebook

needs_core = pytest.mark.skipif(len(_backend.available()) < 2, reason="compiled kernels not built")


def test_available_and_get():
    assert "python" in _backend.available()
    assert _backend.name in _backend.available()
    with pytest.raises(ValueError):
        _backend.get("fortran")


@needs_core
@pytest.mark.parametrize("J,M", [(6, 4), (8, 4), (6, 2), (6, 8)])
def test_mpa_backends_agree(J, M):
    cb = generate_codebook(build_factor_graph(J, 4, 2), M)
    g = cb.graph
    rng = np.random.default_rng(J * M)
    y = channel.complex_normal(rng, 1.0, (40, 4))
    h = channel.complex_normal(rng, 1.0, (40, J))
    nv = rng.uniform(0.05, 1.0, (40, 4))
    args = (y, h, nv, cb.codewords, g.resource_users, g.user_resources, g.user_slots, 10)
    a = _backend.get("python").mpa_batch(*args)
    b = _backend.get("cython").mpa_batch(*args)
    assert np.max(np.abs(a - b)) < 1e-12


@needs_core
@pytest.mark.parametrize("n,L", [(64, 1), (64, 4), (64, 8), (128, 2), (256, 4)])
def test_scl_backends_agree(n, L):
    spec = polar.make_polar_spec(n, 0.5, L, trials=2000)
    rng = np.random.default_rng(n + L)
    llr = 1.5 + 3.0 * rng.standard_normal((30, n))
    a = _backend.get("python").scl_batch(llr, spec.info_mask, L)
    b = _backend.get("cython").scl_batch(llr, spec.info_mask, L)
    assert np.array_equal(a[0], b[0]) and np.array_equal(a[2], b[2])
    assert np.allclose(a[1], b[1], rtol=0, atol=1e-9)


@needs_core
def test_genie_backends_agree():
    rng = np.random.default_rng(0)
    llr = np.ascontiguousarray(2.0 + 2.0 * rng.standard_normal((500, 64)))
    assert np.array_equal(_backend.get("python").genie_sc_errors(llr), _backend.get("cython").genie_sc_errors(llr))


@needs_core
def test_simulation_identical_on_both_backends(monkeypatch):
    cfg = sim.ScenarioConfig("uncoded-hnoma", (6, 6), 4, 4, (10.0,), 300, 1)
    counts = {}
    for name in ("python", "cython"):
        monkeypatch.setattr(_backend, "impl", _backend.get(name))
        counts[name] = sim.run_scenario(cfg, workers=1).points
    assert counts["python"] == counts["cython"]


def test_environment_forces_fallback():
    env = dict(os.environ, HNOMA_SIM_BACKEND="python")
    code = "import hnoma_sim; print(hnoma_sim.BACKEND)"
    out = subprocess.run([sys.executable, "-c", code], env=env, capture_output=True, text=True, check=True)
    assert out.stdout.strip() == "python"
