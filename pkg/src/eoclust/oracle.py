"""Exact reference answers on small instances.

Brute force with symmetry breaking and branch-and-bound pruning; practical
up to n around 16 for exact minimum cost and considerably larger for the
zero-cost (proper coloring) decision. Used to validate the search engine
and the sparse approximation, never in the production path.
"""
from __future__ import annotations

import numpy as np

from .model import Assignment, ConflictGraph

__all__ = ["exact_min_cost", "is_zero_cost_solvable"]

_ENUMERATION_BUDGET = 10**8


def _earlier_neighbors(graph: ConflictGraph) -> list[list[tuple[int, float]]]:
    """For each vertex v, the (u, w) pairs with u < v; drives incremental cost."""
    prior: list[list[tuple[int, float]]] = [[] for _ in range(graph.n)]
    for i, j, w in zip(graph.edge_i, graph.edge_j, graph.edge_weight):
        prior[int(j)].append((int(i), float(w)))
    return prior


def exact_min_cost(graph: ConflictGraph, k: int) -> tuple[float, Assignment]:
    """Globally minimal clustering cost by exhaustive search.

    Vertex 0 is pinned to cluster 0 (label permutations leave the cost
    unchanged), the rest is depth-first enumeration with branch-and-bound
    pruning on the accumulated partial cost.
    """
    if k < 1:
        raise ValueError("k must be at least 1")
    n = graph.n
    if n == 0:
        raise ValueError("graph must have at least one vertex")
    if k**n > _ENUMERATION_BUDGET:
        raise ValueError(
            f"enumeration budget exceeded: k^n = {k}^{n} > {_ENUMERATION_BUDGET}"
        )
    prior = _earlier_neighbors(graph)
    labels = np.zeros(n, dtype=np.int64)
    best_labels = labels.copy()
    best_cost = float("inf")

    def dfs(v: int, partial: float):
        nonlocal best_cost, best_labels
        if partial >= best_cost:
            return
        if v == n:
            best_cost = partial
            best_labels = labels.copy()
            return
        choices = (0,) if v == 0 else range(k)
        for label in choices:
            delta = 0.0
            for u, w in prior[v]:
                if labels[u] == label:
                    delta += w
            if partial + delta >= best_cost:
                continue
            labels[v] = label
            dfs(v + 1, partial + delta)
        labels[v] = 0

    dfs(0, 0.0)
    return best_cost, Assignment(best_labels, max(k, 1))


def is_zero_cost_solvable(graph: ConflictGraph, k: int, max_nodes: int = 20_000_000) -> bool:
    """Whether the positive-weight edge structure admits a proper k-coloring.

    Backtracking over vertices in descending degree order, pruning colors
    already taken by colored neighbors and never introducing color c before
    c-1 (breaks label symmetry). ``max_nodes`` bounds the search tree.
    """
    if k < 1:
        raise ValueError("k must be at least 1")
    n = graph.n
    if n == 0:
        raise ValueError("graph must have at least one vertex")
    positive = graph.edge_weight > 0
    ei = graph.edge_i[positive]
    ej = graph.edge_j[positive]
    adj: list[list[int]] = [[] for _ in range(n)]
    for i, j in zip(ei, ej):
        adj[int(i)].append(int(j))
        adj[int(j)].append(int(i))
    degree = np.array([len(a) for a in adj])
    order = np.argsort(-degree, kind="stable")
    colors = np.full(n, -1, dtype=np.int64)
    nodes = 0

    def backtrack(depth: int, used: int) -> bool:
        nonlocal nodes
        nodes += 1
        if nodes > max_nodes:
            raise RuntimeError(f"coloring search budget exceeded ({max_nodes} nodes)")
        if depth == n:
            return True
        v = int(order[depth])
        forbidden = 0
        for u in adj[v]:
            c = colors[u]
            if c >= 0:
                forbidden |= 1 << int(c)
        limit = min(k, used + 1)
        for c in range(limit):
            if forbidden & (1 << c):
                continue
            colors[v] = c
            if backtrack(depth + 1, max(used, c + 1)):
                return True
            colors[v] = -1
        return False

    return backtrack(0, 0)
