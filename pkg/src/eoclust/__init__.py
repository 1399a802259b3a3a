"""Extremal-optimization clustering of sensor reports over sparse conflict graphs."""

from ._kernels import active, available_backends, get_kernels, set_backend
from .conflict import (
    ReportSet,
    ScenarioParams,
    SparseSamplerParams,
    critical_gamma,
    full_cost_matrix,
    generate_scenario,
    pairwise_conflict,
    sample_sparse_graph,
)
from .engine import (
    EngineConfig,
    PowerLawTable,
    SearchState,
    advance,
    build_powerlaw,
    init_state,
    insert_reports,
    run,
    sample_rank,
    sample_ranks,
    step,
)
from .harness import (
    ExperimentConfig,
    ExperimentResult,
    TruthComparison,
    compare_to_truth,
    phase_sweep,
    run_experiment,
    verify_against_oracle,
)
from .model import (
    Assignment,
    ConflictGraph,
    Report,
    Trace,
    all_local_fitness,
    load_assignment,
    load_graph,
    local_fitness,
    save_assignment,
    save_graph,
    total_cost,
)
from .oracle import exact_min_cost, is_zero_cost_solvable

__version__ = "0.1.0"
