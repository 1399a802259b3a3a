import numpy as np
import pytest

import eoclust as eo
from eoclust import _kernels
from eoclust.engine import EngineConfig, run


HAVE_NUMBA = "numba" in _kernels.available_backends()
needs_numba = pytest.mark.skipif(not HAVE_NUMBA, reason="numba not installed")


@pytest.fixture
def instance():
    reports = eo.generate_scenario(eo.ScenarioParams(seed=7))
    return eo.sample_sparse_graph(reports, eo.SparseSamplerParams(gamma=4.0, seed=1))


@pytest.fixture
def restore_backend():
    before = _kernels.active().backend
    yield
    _kernels.set_backend(before)


def test_backend_registry():
    assert "numpy" in _kernels.available_backends()
    with pytest.raises(ValueError):
        _kernels.get_kernels("fortran")
    assert _kernels.get_kernels("numpy").backend == "numpy"


def test_env_resolution(monkeypatch):
    monkeypatch.setenv("EOCLUST_BACKEND", "numpy")
    assert _kernels._resolve_default() == "numpy"
    monkeypatch.setenv("EOCLUST_BACKEND", "cuda")
    with pytest.raises(ValueError):
        _kernels._resolve_default()
    monkeypatch.delenv("EOCLUST_BACKEND")
    assert _kernels._resolve_default() in ("numba", "numpy")


@needs_numba
def test_tie_keys_scalar_vector_agree():
    bundle = _kernels.get_kernels("numba")  # ensures the scalar helper is jitted
    assert bundle.backend == "numba"
    mask = (1 << 64) - 1
    for start in (0, 1, 12345, 2**63, 2**64 - 3):
        vector = _kernels._vector_tie_keys(start, 40)
        scalar = np.empty(40, dtype=np.uint64)
        for i in range(40):
            scalar[i] = _kernels._splitmix64(np.uint64((start + i) & mask))
        assert np.array_equal(vector, scalar)


@needs_numba
def test_select_victim_matches_lexsort():
    _kernels.get_kernels("numba")
    rng = np.random.default_rng(3)
    for trial in range(400):
        n = int(rng.integers(1, 40))
        lam = np.round(rng.random(n) * 3, 1)  # plenty of exact ties
        keys = _kernels._vector_tie_keys(int(rng.integers(0, 2**63)), n)
        if n > 2 and trial % 5 == 0:
            keys[1] = keys[0]
            lam[1] = lam[0]
        order = np.lexsort((keys, -lam))
        buf = np.empty(n, dtype=np.int64)
        r = int(rng.integers(0, n))
        assert _kernels._select_victim(lam, keys, buf, r) == order[r]


@needs_numba
@pytest.mark.parametrize("ranking", ["sort", "heap"])
@pytest.mark.parametrize("mode,tau", [("tau", 1.5), ("tau", 0.0), ("standard", 1.5)])
def test_backends_bit_identical(instance, restore_backend, ranking, mode, tau):
    config = EngineConfig(k=3, mode=mode, tau=tau, max_steps=2500, seed=42, ranking=ranking)
    _kernels.set_backend("numba")
    best_nb, trace_nb = run(instance, config)
    _kernels.set_backend("numpy")
    best_np, trace_np = run(instance, config)
    assert np.array_equal(trace_nb.current_cost, trace_np.current_cost)
    assert np.array_equal(trace_nb.best_cost, trace_np.best_cost)
    assert np.array_equal(best_nb.labels, best_np.labels)


def test_numpy_backend_runs_standalone(instance, restore_backend):
    _kernels.set_backend("numpy")
    best, trace = run(instance, EngineConfig(k=3, tau=1.5, max_steps=500, seed=9))
    trace.validate()
    assert eo.total_cost(instance, best) == pytest.approx(trace.best_cost[-1], rel=1e-9, abs=1e-12)
