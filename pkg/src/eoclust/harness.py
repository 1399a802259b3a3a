"""Experiment orchestration: reproducible runs, averaging, and scoring.

The experiment protocol averages over two levels of randomness: several
generated scenarios ("problems"), and several sparse cost matrices sampled
for each scenario. Every run gets its own seed derived deterministically
from the master seed, so an experiment is reproducible file-for-file.
"""
from __future__ import annotations

import csv
import time
from dataclasses import dataclass, replace
from pathlib import Path

import numpy as np
from scipy.optimize import linear_sum_assignment

from .conflict import (
    ReportSet,
    ScenarioParams,
    SparseSamplerParams,
    generate_scenario,
    sample_sparse_graph,
)
from .engine import EngineConfig, run
from .model import Assignment, ConflictGraph, Trace, total_cost
from .oracle import exact_min_cost

__all__ = [
    "ExperimentConfig",
    "RunSummary",
    "ExperimentResult",
    "TruthComparison",
    "run_experiment",
    "compare_to_truth",
    "phase_sweep",
    "verify_against_oracle",
]

# seed-derivation namespaces (folded into the SeedSequence entropy tuple)
_TAG_SCENARIO = 101
_TAG_MATRIX = 202
_TAG_RUN = 303


def _child_seed(master_seed: int, *parts: int) -> int:
    seq = np.random.SeedSequence((int(master_seed),) + tuple(int(p) for p in parts))
    return int(seq.generate_state(1, np.uint64)[0])


@dataclass(frozen=True)
class ExperimentConfig:
    """Full protocol description for one averaged experiment."""

    scenario: ScenarioParams
    gamma: float
    tau: float | None = 1.5          # None selects standard mode
    k: int = 3
    steps: int = 100_000
    num_problems: int = 10
    num_matrices: int = 10
    master_seed: int = 0
    output_dir: Path | None = None

    def __post_init__(self):
        if self.num_problems < 1 or self.num_matrices < 1:
            raise ValueError("averaging counts must be at least 1")
        if self.steps < 0:
            raise ValueError("steps must be non-negative")


@dataclass(frozen=True)
class RunSummary:
    problem: int
    matrix: int
    seed: int
    final_best: float
    steps: int
    wall_ms: int


@dataclass(frozen=True)
class ExperimentResult:
    mean_trace: Trace
    traces: list[Trace]
    summaries: list[RunSummary]


def _engine_config(k: int, tau: float | None, steps: int, seed: int) -> EngineConfig:
    if tau is None:
        return EngineConfig(k=k, mode="standard", max_steps=steps, seed=seed)
    return EngineConfig(k=k, mode="tau", tau=tau, max_steps=steps, seed=seed)


def run_experiment(config: ExperimentConfig) -> ExperimentResult:
    """Run problems x matrices searches; collect raw traces, their mean, and summaries.

    When ``config.output_dir`` is set, writes trace_pPP_mMM.csv per run plus
    mean_trace.csv and summary.csv.
    """
    traces: list[Trace] = []
    summaries: list[RunSummary] = []
    for p in range(config.num_problems):
        scenario = replace(
            config.scenario, seed=_child_seed(config.master_seed, _TAG_SCENARIO, p)
        )
        reports = generate_scenario(scenario)
        for m in range(config.num_matrices):
            sampler = SparseSamplerParams(
                gamma=config.gamma,
                seed=_child_seed(config.master_seed, _TAG_MATRIX, p, m),
                weight_mode="measured",
            )
            graph = sample_sparse_graph(reports, sampler)
            seed = _child_seed(config.master_seed, _TAG_RUN, p, m)
            engine_config = _engine_config(config.k, config.tau, config.steps, seed)
            t0 = time.perf_counter()
            _, trace = run(graph, engine_config)
            wall_ms = int((time.perf_counter() - t0) * 1000)
            traces.append(trace)
            summaries.append(
                RunSummary(
                    problem=p,
                    matrix=m,
                    seed=seed,
                    final_best=float(trace.best_cost[-1]),
                    steps=config.steps,
                    wall_ms=wall_ms,
                )
            )
    mean_trace = Trace(
        steps=traces[0].steps,
        current_cost=np.mean([t.current_cost for t in traces], axis=0),
        best_cost=np.mean([t.best_cost for t in traces], axis=0),
    )
    result = ExperimentResult(mean_trace=mean_trace, traces=traces, summaries=summaries)
    if config.output_dir is not None:
        _write_experiment(config, result)
    return result


def _write_experiment(config: ExperimentConfig, result: ExperimentResult):
    outdir = Path(config.output_dir)
    outdir.mkdir(parents=True, exist_ok=True)
    idx = 0
    for p in range(config.num_problems):
        for m in range(config.num_matrices):
            result.traces[idx].to_csv(outdir / f"trace_p{p:02d}_m{m:02d}.csv")
            idx += 1
    result.mean_trace.to_csv(outdir / "mean_trace.csv")
    with open(outdir / "summary.csv", "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["problem", "matrix", "seed", "final_best", "steps", "wall_ms"])
        for s in result.summaries:
            writer.writerow(
                [s.problem, s.matrix, s.seed, repr(s.final_best), s.steps, s.wall_ms]
            )


@dataclass(frozen=True)
class TruthComparison:
    """How a search result fares against the full matrix and the ground truth."""

    cost_on_full_matrix: float
    label_accuracy: float
    optimality_gap: float | None


def compare_to_truth(
    reports: ReportSet,
    best: Assignment,
    dense: ConflictGraph,
    oracle_budget: int = 10**6,
) -> TruthComparison:
    """Score an assignment on the full cost matrix and against true targets.

    Label accuracy is the best achievable agreement over relabelings of the
    clusters (Hungarian matching on the confusion matrix). The gap to the
    exact optimum of the dense instance is included when the enumeration is
    affordable, otherwise None.
    """
    n = len(reports)
    if dense.n != n or len(best) != n:
        raise ValueError("reports, assignment, and dense graph must agree on n")
    truth = reports.true_targets
    if (truth < 0).any():
        raise ValueError("reports lack ground-truth targets")
    cost = total_cost(dense, best)

    k_true = int(truth.max()) + 1
    size = max(best.k, k_true)
    confusion = np.zeros((size, size), dtype=np.int64)
    np.add.at(confusion, (best.labels, truth), 1)
    rows, cols = linear_sum_assignment(confusion, maximize=True)
    accuracy = float(confusion[rows, cols].sum()) / n

    gap = None
    if best.k**n <= oracle_budget:
        optimum, _ = exact_min_cost(dense, best.k)
        gap = cost - optimum
    return TruthComparison(
        cost_on_full_matrix=cost, label_accuracy=accuracy, optimality_gap=gap
    )


def phase_sweep(
    gammas,
    n: int = 100,
    k: int = 3,
    instances_per_gamma: int = 50,
    steps: int = 200_000,
    tau: float | None = 1.5,
    master_seed: int = 0,
    noise_sigma: float = 0.05,
) -> list[tuple[float, int, float]]:
    """Fraction of unit-weight instances clustered at zero cost, per gamma.

    Unit weights make "zero cost" mean a proper k-coloring of the sampled
    G(n, M) graph, so the sweep probes the solvability transition directly.
    The search is incomplete, so fractions are lower bounds on solvability.
    """
    rows = []
    for g_index, gamma in enumerate(gammas):
        solved = 0
        for inst in range(instances_per_gamma):
            scenario = ScenarioParams(
                num_targets=k,
                reports_per_burst=n,
                noise_sigma=noise_sigma,
                seed=_child_seed(master_seed, _TAG_SCENARIO, g_index, inst),
            )
            reports = generate_scenario(scenario)
            sampler = SparseSamplerParams(
                gamma=gamma,
                seed=_child_seed(master_seed, _TAG_MATRIX, g_index, inst),
                weight_mode="unit",
            )
            graph = sample_sparse_graph(reports, sampler)
            seed = _child_seed(master_seed, _TAG_RUN, g_index, inst)
            _, trace = run(graph, _engine_config(k, tau, steps, seed))
            if trace.best_cost[-1] == 0.0:
                solved += 1
        rows.append((float(gamma), instances_per_gamma, solved / instances_per_gamma))
    return rows


def verify_against_oracle(
    instances: int = 50,
    n: int = 10,
    gamma: float = 4.0,
    k: int = 3,
    steps: int = 100_000,
    tau: float | None = 1.5,
    master_seed: int = 0,
    tolerance: float = 1e-9,
) -> tuple[float, list[tuple[int, float, float]]]:
    """Cross-check the engine against brute force on small measured instances.

    Returns the fraction of instances where the search met the exact optimum
    (within tolerance) and per-instance (index, search best, optimum) rows.
    """
    details = []
    hits = 0
    for inst in range(instances):
        scenario = ScenarioParams(
            num_targets=k,
            reports_per_burst=n,
            seed=_child_seed(master_seed, _TAG_SCENARIO, inst),
        )
        reports = generate_scenario(scenario)
        sampler = SparseSamplerParams(
            gamma=gamma, seed=_child_seed(master_seed, _TAG_MATRIX, inst)
        )
        graph = sample_sparse_graph(reports, sampler)
        seed = _child_seed(master_seed, _TAG_RUN, inst)
        best, _ = run(graph, _engine_config(k, tau, steps, seed))
        found = total_cost(graph, best)
        optimum, _ = exact_min_cost(graph, k)
        if found <= optimum + tolerance * max(1.0, optimum):
            hits += 1
        details.append((inst, found, optimum))
    return hits / instances, details
