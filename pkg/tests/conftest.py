import numpy as np
import pytest

from eoclust.conflict import ScenarioParams, SparseSamplerParams, generate_scenario, sample_sparse_graph
from eoclust.model import ConflictGraph


@pytest.fixture
def triangle():
    """Three reports with conflicts 2, 1, 4; the hand-checked example graph."""
    return ConflictGraph.from_edges(3, [(0, 1, 2.0), (0, 2, 1.0), (1, 2, 4.0)])


@pytest.fixture
def make_instance():
    """Factory for seeded scenario + sampled sparse graph instances."""

    def _make(n=100, gamma=4.0, seed=0, weight_mode="measured", targets=3):
        reports = generate_scenario(
            ScenarioParams(num_targets=targets, reports_per_burst=n, seed=seed)
        )
        graph = sample_sparse_graph(
            reports,
            SparseSamplerParams(gamma=gamma, seed=seed + 1, weight_mode=weight_mode),
        )
        return reports, graph

    return _make


@pytest.fixture
def random_graph():
    """Factory for small random graphs with arbitrary weights (no scenario)."""

    def _make(n, m, seed, max_weight=1.0):
        rng = np.random.default_rng(seed)
        pairs = set()
        while len(pairs) < m:
            i, j = rng.integers(0, n, 2)
            if i != j:
                pairs.add((min(int(i), int(j)), max(int(i), int(j))))
        edges = [(i, j, float(rng.random() * max_weight)) for i, j in sorted(pairs)]
        return ConflictGraph.from_edges(n, edges)

    return _make
