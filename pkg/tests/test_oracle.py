import itertools

import numpy as np
import pytest

from eoclust.engine import EngineConfig, run
from eoclust.model import Assignment, ConflictGraph, total_cost
from eoclust.oracle import exact_min_cost, is_zero_cost_solvable


def brute_force_min(graph, k):
    """Unrestricted enumeration over all k^n label vectors (test-side oracle)."""
    best = float("inf")
    for labels in itertools.product(range(k), repeat=graph.n):
        cost = total_cost(graph, Assignment(np.array(labels), k))
        best = min(best, cost)
    return best


def test_exact_min_cost_hand_examples(triangle):
    cost, asg = exact_min_cost(triangle, 2)
    assert cost == 1.0
    # optimal split puts 0 and 2 together, 1 alone
    assert asg.labels[0] == asg.labels[2] != asg.labels[1]
    cost3, _ = exact_min_cost(triangle, 3)
    assert cost3 == 0.0


def test_exact_min_cost_unit_triangle():
    graph = ConflictGraph.from_edges(3, [(0, 1, 1.0), (0, 2, 1.0), (1, 2, 1.0)])
    cost, _ = exact_min_cost(graph, 2)
    assert cost == 1.0  # any bipartition of an odd cycle leaves one edge


def test_exact_min_cost_is_global(random_graph):
    rng = np.random.default_rng(4)
    for seed in range(10):
        graph = random_graph(n=7, m=12, seed=seed)
        for k in (2, 3):
            cost, asg = exact_min_cost(graph, k)
            assert cost == pytest.approx(brute_force_min(graph, k), abs=1e-12)
            assert total_cost(graph, asg) == pytest.approx(cost, abs=1e-12)
            # never beaten by random assignments
            for _ in range(50):
                random_asg = Assignment(rng.integers(0, k, size=7), k)
                assert total_cost(graph, random_asg) >= cost - 1e-12


def test_exact_min_cost_budget():
    graph = ConflictGraph(40, [], [], [])
    with pytest.raises(ValueError):
        exact_min_cost(graph, 3)  # 3^40 blows the enumeration budget


def test_solvable_forest():
    graph = ConflictGraph.from_edges(6, [(0, 1, 1.0), (1, 2, 1.0), (3, 4, 1.0)])
    assert is_zero_cost_solvable(graph, 2)


def test_solvable_odd_cycle():
    edges = [(i, (i + 1) % 5, 1.0) for i in range(5)]
    graph = ConflictGraph.from_edges(5, edges)
    assert not is_zero_cost_solvable(graph, 2)
    assert is_zero_cost_solvable(graph, 3)


def test_solvable_k4():
    edges = [(i, j, 1.0) for i in range(4) for j in range(i + 1, 4)]
    graph = ConflictGraph.from_edges(4, edges)
    assert not is_zero_cost_solvable(graph, 3)
    assert is_zero_cost_solvable(graph, 4)


def test_solvable_ignores_zero_weight_edges():
    edges = [(i, (i + 1) % 5, 0.0) for i in range(5)]
    graph = ConflictGraph.from_edges(5, edges)
    assert is_zero_cost_solvable(graph, 2)  # odd cycle, but weightless


def test_solvable_agrees_with_exact(random_graph):
    for seed in range(12):
        graph = random_graph(n=8, m=14, seed=100 + seed)
        for k in (2, 3):
            cost, _ = exact_min_cost(graph, k)
            assert is_zero_cost_solvable(graph, k) == (cost == 0.0)


def test_solvable_budget():
    # dense-ish unsolvable instance with a tiny node budget
    edges = [(i, j, 1.0) for i in range(9) for j in range(i + 1, 9)]
    graph = ConflictGraph.from_edges(9, edges)
    with pytest.raises(RuntimeError):
        is_zero_cost_solvable(graph, 3, max_nodes=3)


def test_engine_never_beats_oracle(make_instance):
    for seed in range(5):
        _, graph = make_instance(n=8, gamma=3.0, seed=70 + seed)
        optimum, _ = exact_min_cost(graph, 3)
        best, _ = run(graph, EngineConfig(k=3, tau=1.5, max_steps=5000, seed=seed))
        assert total_cost(graph, best) >= optimum - 1e-12
