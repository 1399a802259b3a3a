"""Core types and cost arithmetic for pairwise-conflict clustering.

A clustering instance is a weighted undirected conflict graph: vertices are
sensor reports, an edge weight is the penalty for placing its two endpoints
in the same cluster. The total cost of a cluster assignment is the sum of
weights over monochromatic edges; the local fitness of a vertex is its own
share of that sum (larger means worse placed).
"""
from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path

import numpy as np

__all__ = [
    "Report",
    "ConflictGraph",
    "Assignment",
    "Trace",
    "total_cost",
    "local_fitness",
    "all_local_fitness",
    "save_graph",
    "load_graph",
    "save_assignment",
    "load_assignment",
]


@dataclass(frozen=True)
class Report:
    """One sensor observation: planar position plus its noise scale.

    ``true_target`` is the generating object's index when known (synthetic
    scenarios only); ``None`` for real data.
    """

    id: int
    position: np.ndarray
    noise_sigma: float
    true_target: int | None = None

    def __post_init__(self):
        pos = np.asarray(self.position, dtype=np.float64)
        if pos.shape != (2,):
            raise ValueError(f"position must be a 2-vector, got shape {pos.shape}")
        object.__setattr__(self, "position", pos)
        if not self.noise_sigma > 0:
            raise ValueError(f"noise_sigma must be positive, got {self.noise_sigma}")


class ConflictGraph:
    """Weighted undirected graph with canonical (i < j) edge storage.

    ``kind`` is "dense" when every one of the n(n-1)/2 pairs is stored and
    "sparse" otherwise. Edges are kept sorted lexicographically, and a CSR
    adjacency (vertex -> incident edges) is precomputed because the search
    loop iterates neighborhoods constantly.
    """

    __slots__ = (
        "n",
        "edge_i",
        "edge_j",
        "edge_weight",
        "kind",
        "adj_indptr",
        "adj_vertex",
        "adj_weight",
    )

    def __init__(self, n, edge_i, edge_j, edge_weight, kind="sparse"):
        n = int(n)
        if n < 0:
            raise ValueError("n must be non-negative")
        edge_i = np.asarray(edge_i, dtype=np.int64)
        edge_j = np.asarray(edge_j, dtype=np.int64)
        edge_weight = np.asarray(edge_weight, dtype=np.float64)
        if not (edge_i.shape == edge_j.shape == edge_weight.shape):
            raise ValueError("edge arrays must have matching lengths")
        m = edge_i.shape[0]
        if m:
            if edge_i.min() < 0 or edge_j.max() >= n:
                raise ValueError("edge endpoint out of range")
            if not (edge_i < edge_j).all():
                raise ValueError("edges must be stored with i < j and no self-loops")
            if not np.isfinite(edge_weight).all() or edge_weight.min() < 0:
                raise ValueError("edge weights must be finite and non-negative")
            code = edge_i * np.int64(n) + edge_j
            if np.unique(code).shape[0] != m:
                raise ValueError("duplicate edges")
            order = np.argsort(code)
            edge_i = edge_i[order]
            edge_j = edge_j[order]
            edge_weight = edge_weight[order]
        if kind not in ("dense", "sparse"):
            raise ValueError(f"kind must be 'dense' or 'sparse', got {kind!r}")
        if kind == "dense" and m != n * (n - 1) // 2:
            raise ValueError(f"dense graph needs {n * (n - 1) // 2} edges, got {m}")
        self.n = n
        self.edge_i = edge_i
        self.edge_j = edge_j
        self.edge_weight = edge_weight
        self.kind = kind

        src = np.concatenate([edge_i, edge_j])
        dst = np.concatenate([edge_j, edge_i])
        wts = np.concatenate([edge_weight, edge_weight])
        order = np.argsort(src, kind="stable")
        self.adj_vertex = dst[order]
        self.adj_weight = wts[order]
        indptr = np.zeros(n + 1, dtype=np.int64)
        np.cumsum(np.bincount(src, minlength=n), out=indptr[1:])
        self.adj_indptr = indptr

    @classmethod
    def from_edges(cls, n, edges, kind="sparse"):
        """Build a graph from (i, j, weight) triples, canonicalizing i < j."""
        ei, ej, w = [], [], []
        for i, j, weight in edges:
            if i == j:
                raise ValueError(f"self-loop at vertex {i}")
            if i > j:
                i, j = j, i
            ei.append(i)
            ej.append(j)
            w.append(weight)
        return cls(n, ei, ej, w, kind=kind)

    @property
    def num_edges(self) -> int:
        return self.edge_i.shape[0]

    def incident(self, v: int):
        """Neighbors of ``v`` and the matching edge weights, as array views."""
        if not 0 <= v < self.n:
            raise IndexError(f"vertex {v} out of range for n={self.n}")
        lo, hi = self.adj_indptr[v], self.adj_indptr[v + 1]
        return self.adj_vertex[lo:hi], self.adj_weight[lo:hi]

    def grown(self, n_new: int, new_edges) -> "ConflictGraph":
        """A copy with ``n_new`` appended vertices and extra edges."""
        if n_new < 0:
            raise ValueError("n_new must be non-negative")
        n = self.n + n_new
        ei = list(self.edge_i)
        ej = list(self.edge_j)
        w = list(self.edge_weight)
        for i, j, weight in new_edges:
            if i == j:
                raise ValueError(f"self-loop at vertex {i}")
            if not (0 <= i < n and 0 <= j < n):
                raise ValueError(f"edge ({i}, {j}) out of range for n={n}")
            if i > j:
                i, j = j, i
            ei.append(i)
            ej.append(j)
            w.append(weight)
        kind = "dense" if len(ei) == n * (n - 1) // 2 else "sparse"
        return ConflictGraph(n, ei, ej, w, kind=kind)

    def __repr__(self):
        return f"ConflictGraph(n={self.n}, m={self.num_edges}, kind={self.kind!r})"


@dataclass
class Assignment:
    """Cluster labels for every vertex; each label lies in 0..k-1."""

    labels: np.ndarray
    k: int

    def __post_init__(self):
        self.labels = np.asarray(self.labels, dtype=np.int64)
        if self.labels.ndim != 1:
            raise ValueError("labels must be one-dimensional")
        if self.k < 1:
            raise ValueError("k must be at least 1")
        if self.labels.size and (self.labels.min() < 0 or self.labels.max() >= self.k):
            raise ValueError(f"labels must lie in 0..{self.k - 1}")

    def __len__(self):
        return self.labels.shape[0]

    def copy(self) -> "Assignment":
        return Assignment(self.labels.copy(), self.k)


@dataclass(frozen=True)
class Trace:
    """Per-step cost record of a search run.

    Row t holds the cost of the configuration after step t and the best cost
    seen up to then; row 0 is the initial configuration.
    """

    steps: np.ndarray
    current_cost: np.ndarray
    best_cost: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "steps", np.asarray(self.steps, dtype=np.int64))
        object.__setattr__(self, "current_cost", np.asarray(self.current_cost, dtype=np.float64))
        object.__setattr__(self, "best_cost", np.asarray(self.best_cost, dtype=np.float64))
        if not (len(self.steps) == len(self.current_cost) == len(self.best_cost)):
            raise ValueError("trace columns must have equal length")

    def __len__(self):
        return self.steps.shape[0]

    def validate(self):
        """Raise if the monotonicity invariants are violated."""
        if len(self) == 0:
            return
        if (np.diff(self.steps) <= 0).any():
            raise ValueError("steps must be strictly increasing")
        if (np.diff(self.best_cost) > 0).any():
            raise ValueError("best cost must be non-increasing")
        if (self.best_cost > self.current_cost).any():
            raise ValueError("best cost must not exceed current cost")

    def to_csv(self, path):
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(["step", "current_cost", "best_cost"])
            for s, c, b in zip(self.steps, self.current_cost, self.best_cost):
                writer.writerow([int(s), repr(float(c)), repr(float(b))])

    @classmethod
    def from_csv(cls, path) -> "Trace":
        steps, cur, best = [], [], []
        with open(path, newline="") as fh:
            reader = csv.reader(fh)
            header = next(reader)
            if header != ["step", "current_cost", "best_cost"]:
                raise ValueError(f"unexpected trace header: {header}")
            for row in reader:
                steps.append(int(row[0]))
                cur.append(float(row[1]))
                best.append(float(row[2]))
        return cls(np.array(steps), np.array(cur), np.array(best))


def _labels_for(graph: ConflictGraph, assignment: Assignment) -> np.ndarray:
    if len(assignment) != graph.n:
        raise ValueError(
            f"assignment length {len(assignment)} does not match graph n={graph.n}"
        )
    return assignment.labels


def total_cost(graph: ConflictGraph, assignment: Assignment) -> float:
    """Sum of edge weights whose endpoints share a cluster."""
    labels = _labels_for(graph, assignment)
    if graph.num_edges == 0:
        return 0.0
    same = labels[graph.edge_i] == labels[graph.edge_j]
    return float(graph.edge_weight[same].sum())


def local_fitness(graph: ConflictGraph, assignment: Assignment, i: int) -> float:
    """Vertex i's contribution: weight to same-cluster neighbors (larger = worse)."""
    labels = _labels_for(graph, assignment)
    if not 0 <= i < graph.n:
        raise IndexError(f"vertex {i} out of range for n={graph.n}")
    nbrs, wts = graph.incident(i)
    if nbrs.shape[0] == 0:
        return 0.0
    return float(wts[labels[nbrs] == labels[i]].sum())


def all_local_fitness(graph: ConflictGraph, assignment: Assignment) -> np.ndarray:
    """Local fitness of every vertex in one pass over the edge list."""
    labels = _labels_for(graph, assignment)
    if graph.num_edges == 0:
        return np.zeros(graph.n, dtype=np.float64)
    same = labels[graph.edge_i] == labels[graph.edge_j]
    wts = graph.edge_weight[same]
    lam = np.bincount(graph.edge_i[same], weights=wts, minlength=graph.n)
    lam += np.bincount(graph.edge_j[same], weights=wts, minlength=graph.n)
    return lam


# ---------------------------------------------------------------------------
# File formats: graph files are plain text with a "n m k" header followed by
# m lines "i j weight" (0-based, i < j); assignment files hold one label per
# line. Floats are written with repr so round-trips are exact.
# ---------------------------------------------------------------------------

def save_graph(graph: ConflictGraph, path, k: int):
    """Write a graph file; ``k`` records the intended cluster count."""
    with open(path, "w", newline="\n") as fh:
        fh.write(f"{graph.n} {graph.num_edges} {int(k)}\n")
        for i, j, w in zip(graph.edge_i, graph.edge_j, graph.edge_weight):
            fh.write(f"{i} {j} {repr(float(w))}\n")


def load_graph(path) -> tuple[ConflictGraph, int]:
    """Read a graph file, returning the graph and its recorded cluster count."""
    path = Path(path)
    with open(path) as fh:
        header = fh.readline().split()
        if len(header) != 3:
            raise ValueError(f"{path}: expected header 'n m k'")
        n, m, k = (int(x) for x in header)
        ei = np.empty(m, dtype=np.int64)
        ej = np.empty(m, dtype=np.int64)
        w = np.empty(m, dtype=np.float64)
        for row in range(m):
            parts = fh.readline().split()
            if len(parts) != 3:
                raise ValueError(f"{path}: bad edge line {row + 2}")
            ei[row] = int(parts[0])
            ej[row] = int(parts[1])
            w[row] = float(parts[2])
    kind = "dense" if m == n * (n - 1) // 2 else "sparse"
    return ConflictGraph(n, ei, ej, w, kind=kind), k


def save_assignment(assignment: Assignment, path):
    with open(path, "w", newline="\n") as fh:
        for label in assignment.labels:
            fh.write(f"{int(label)}\n")


def load_assignment(path, k: int | None = None) -> Assignment:
    labels = []
    with open(path) as fh:
        for line in fh:
            line = line.strip()
            if line:
                labels.append(int(line))
    arr = np.array(labels, dtype=np.int64)
    if k is None:
        k = int(arr.max()) + 1 if arr.size else 1
    return Assignment(arr, k)
