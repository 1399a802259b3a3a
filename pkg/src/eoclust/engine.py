"""Extremal-optimization search over a conflict graph.

Each step ranks the vertices by local fitness (worst first), picks a victim,
and reassigns it to a different cluster chosen uniformly at random, whether
or not that helps. Standard mode always picks the worst vertex; tau mode
picks the rank-r vertex with probability proportional to r**(-tau), which
keeps the churn focused on bad vertices while still escaping local minima.
The unconditional move is what drives the avalanche-style exploration; the
answer returned is the best configuration seen, not the final one.

Ranking among equal-fitness vertices is re-randomized every step (a fresh
hash key per vertex), so ties are broken uniformly without index bias.
Fitness values and the current cost are maintained incrementally from the
victim's incident edges; the test suite checks them against full
recomputation.

The default "sort" ranking is exact. The optional "heap" ranking keeps the
fitness values in a binary max-heap and treats heap slot r as rank r, which
is only approximately true beyond the root but substantially cheaper for
large instances.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import _kernels
from .model import Assignment, ConflictGraph, Trace, all_local_fitness, total_cost

__all__ = [
    "PowerLawTable",
    "build_powerlaw",
    "sample_rank",
    "sample_ranks",
    "EngineConfig",
    "SearchState",
    "init_state",
    "step",
    "advance",
    "run",
    "insert_reports",
]

_CHUNK_STEPS = 8192


@dataclass(frozen=True)
class PowerLawTable:
    """Precomputed rank weights a[r] = (r+1)**(-tau) and their running sums.

    The cumulative array normalizes any prefix, so one table serves every
    instance size up to n_max, including sizes that grow mid-run.
    """

    tau: float
    a: np.ndarray
    b: np.ndarray

    @property
    def n_max(self) -> int:
        return self.a.shape[0]

    def probabilities(self, n: int) -> np.ndarray:
        """Selection probability of each rank 1..n."""
        if not 1 <= n <= self.n_max:
            raise ValueError(f"n={n} outside table range 1..{self.n_max}")
        return self.a[:n] / self.b[n - 1]


def build_powerlaw(tau: float, n_max: int) -> PowerLawTable:
    if n_max < 1:
        raise ValueError("n_max must be at least 1")
    if tau < 0:
        raise ValueError("tau must be non-negative")
    ranks = np.arange(1, n_max + 1, dtype=np.float64)
    a = ranks ** (-float(tau))
    return PowerLawTable(tau=float(tau), a=a, b=np.cumsum(a))


def _rank_from_uniform(table: PowerLawTable, n: int, u: float) -> int:
    # Inverse CDF over the cumulative sums; same arithmetic as the kernels.
    t = u * table.b[n - 1]
    r = int(np.searchsorted(table.b[:n], t, side="right"))
    return min(r, n - 1) + 1


def sample_rank(table: PowerLawTable, n: int, rng: np.random.Generator) -> int:
    """Draw a rank in 1..n with probability a[r] / b[n]."""
    if not 1 <= n <= table.n_max:
        raise ValueError(f"n={n} outside table range 1..{table.n_max}")
    return _rank_from_uniform(table, n, rng.random())


def sample_ranks(table: PowerLawTable, n: int, rng: np.random.Generator, size: int) -> np.ndarray:
    """Vectorized `sample_rank`, for statistics at scale."""
    if not 1 <= n <= table.n_max:
        raise ValueError(f"n={n} outside table range 1..{table.n_max}")
    t = rng.random(size) * table.b[n - 1]
    ranks = np.searchsorted(table.b[:n], t, side="right")
    return np.minimum(ranks, n - 1) + 1


@dataclass(frozen=True)
class EngineConfig:
    """Search parameters; together with the graph they fix the whole run."""

    k: int
    mode: str = "tau"        # "tau" (power-law rank selection) or "standard" (always worst)
    tau: float = 1.5
    max_steps: int = 100_000
    seed: int = 0
    ranking: str = "sort"    # "sort" (exact) or "heap" (approximate)

    def __post_init__(self):
        if self.k < 2:
            raise ValueError("k must be at least 2 (a move needs another label)")
        if self.mode not in ("tau", "standard"):
            raise ValueError(f"mode must be 'tau' or 'standard', got {self.mode!r}")
        if self.mode == "tau" and self.tau < 0:
            raise ValueError("tau must be non-negative")
        if self.max_steps < 0:
            raise ValueError("max_steps must be non-negative")
        if self.ranking not in ("sort", "heap"):
            raise ValueError(f"ranking must be 'sort' or 'heap', got {self.ranking!r}")


class SearchState:
    """Mutable state of one search run.

    Holds the graph, the current assignment with its cached fitness values,
    the best snapshot, and the RNG stream. Single-threaded by design; run
    several states in parallel rather than sharing one.
    """

    __slots__ = (
        "graph",
        "config",
        "table",
        "labels",
        "lam",
        "best_labels",
        "rng",
        "step_count",
        "heap_vertex",
        "heap_pos",
        "_cost_box",
        "_tie_box",
        "_idx_buf",
        "_keys_buf",
    )

    @property
    def current_cost(self) -> float:
        return float(self._cost_box[0])

    @property
    def best_cost(self) -> float:
        return float(self._cost_box[1])

    @property
    def assignment(self) -> Assignment:
        return Assignment(self.labels, self.config.k)

    @property
    def best_assignment(self) -> Assignment:
        return Assignment(self.best_labels, self.config.k)

    def __repr__(self):
        return (
            f"SearchState(n={self.graph.n}, step={self.step_count}, "
            f"cost={self.current_cost:.6g}, best={self.best_cost:.6g})"
        )


def init_state(graph: ConflictGraph, config: EngineConfig, n_max: int | None = None) -> SearchState:
    """Random initial assignment plus caches; consumes the seed's RNG stream.

    ``n_max`` sizes the power-law table (default: the graph's n). Pass a
    larger value if reports will be inserted later.
    """
    if graph.n < 1:
        raise ValueError("graph must have at least one vertex")
    if n_max is None:
        n_max = graph.n
    if n_max < graph.n:
        raise ValueError("n_max smaller than the graph")
    state = SearchState.__new__(SearchState)
    state.graph = graph
    state.config = config
    state.table = build_powerlaw(config.tau, n_max)
    state.rng = np.random.default_rng(config.seed)
    state.labels = state.rng.integers(0, config.k, size=graph.n, dtype=np.int64)
    salt = state.rng.integers(0, 2**64, dtype=np.uint64)
    state._tie_box = np.array([salt], dtype=np.uint64)
    assignment = Assignment(state.labels, config.k)
    state.lam = all_local_fitness(graph, assignment)
    cost = total_cost(graph, assignment)
    state._cost_box = np.array([cost, cost], dtype=np.float64)
    state.best_labels = state.labels.copy()
    state.step_count = 0
    state._idx_buf = np.empty(graph.n, dtype=np.int64)
    state._keys_buf = np.empty(graph.n, dtype=np.uint64)
    if config.ranking == "heap":
        state.heap_vertex = np.arange(graph.n, dtype=np.int64)
        state.heap_pos = np.arange(graph.n, dtype=np.int64)
        _kernels.active().heapify(state.heap_vertex, state.heap_pos, state.lam)
    else:
        state.heap_vertex = None
        state.heap_pos = None
    return state


def advance(state: SearchState, num_steps: int, chunk_steps: int = _CHUNK_STEPS):
    """Execute ``num_steps`` search steps, returning per-step cost arrays.

    The RNG stream is consumed two uniforms per step regardless of chunking,
    so results do not depend on ``chunk_steps``.
    """
    if num_steps < 0:
        raise ValueError("num_steps must be non-negative")
    kernels = _kernels.active()
    graph = state.graph
    config = state.config
    use_powerlaw = config.mode == "tau"
    out_cur = np.empty(num_steps, dtype=np.float64)
    out_best = np.empty(num_steps, dtype=np.float64)
    done = 0
    while done < num_steps:
        span = min(chunk_steps, num_steps - done)
        rand_block = state.rng.random((span, 2))
        if config.ranking == "heap":
            kernels.heap_chunk(
                graph.adj_indptr, graph.adj_vertex, graph.adj_weight,
                state.table.b, use_powerlaw, config.k,
                state.labels, state.lam, state.best_labels, state._cost_box,
                state.heap_vertex, state.heap_pos,
                rand_block, out_cur[done:done + span], out_best[done:done + span],
            )
        else:
            kernels.sort_chunk(
                graph.adj_indptr, graph.adj_vertex, graph.adj_weight,
                state.table.b, use_powerlaw, config.k,
                state.labels, state.lam, state.best_labels, state._cost_box,
                state._tie_box, state._idx_buf, state._keys_buf,
                rand_block, out_cur[done:done + span], out_best[done:done + span],
            )
        done += span
    state.step_count += num_steps
    return out_cur, out_best


def step(state: SearchState) -> SearchState:
    """Execute a single search step (one victim reassignment)."""
    advance(state, 1)
    return state


def run(graph: ConflictGraph, config: EngineConfig) -> tuple[Assignment, Trace]:
    """Full search: random start, ``max_steps`` steps, best snapshot returned.

    The trace has one row per step plus row 0 for the initial configuration.
    """
    state = init_state(graph, config)
    initial_cost = state.current_cost
    cur, best = advance(state, config.max_steps)
    trace = Trace(
        steps=np.arange(config.max_steps + 1, dtype=np.int64),
        current_cost=np.concatenate([[initial_cost], cur]),
        best_cost=np.concatenate([[initial_cost], best]),
    )
    return state.best_assignment.copy(), trace


def insert_reports(state: SearchState, new_edges, n_new: int) -> SearchState:
    """Grow the instance mid-run: new vertices, new edges, caches rebuilt.

    New vertices get uniform-random labels from the state's RNG stream. All
    fitness values and the cost are recomputed, and the best snapshot is
    reset to the current configuration: costs over different report sets
    (or edge sets) are not comparable. The search then continues without a
    restart.
    """
    new_edges = list(new_edges)
    if n_new < 0:
        raise ValueError("n_new must be non-negative")
    if n_new == 0 and not new_edges:
        return state
    n_grown = state.graph.n + n_new
    if state.table.n_max < n_grown:
        raise ValueError(
            f"power-law table covers n_max={state.table.n_max} but the graph grows to {n_grown}; "
            "build the state with a larger n_max"
        )
    graph = state.graph.grown(n_new, new_edges)
    new_labels = state.rng.integers(0, state.config.k, size=n_new, dtype=np.int64)
    state.labels = np.concatenate([state.labels, new_labels])
    state.graph = graph
    assignment = Assignment(state.labels, state.config.k)
    state.lam = all_local_fitness(graph, assignment)
    cost = total_cost(graph, assignment)
    state._cost_box[0] = cost
    state._cost_box[1] = cost
    state.best_labels = state.labels.copy()
    state._idx_buf = np.empty(graph.n, dtype=np.int64)
    state._keys_buf = np.empty(graph.n, dtype=np.uint64)
    if state.config.ranking == "heap":
        state.heap_vertex = np.arange(graph.n, dtype=np.int64)
        state.heap_pos = np.arange(graph.n, dtype=np.int64)
        _kernels.active().heapify(state.heap_vertex, state.heap_pos, state.lam)
    return state
