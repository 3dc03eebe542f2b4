"""Redundant robot-to-goal assignment on transport graphs with uncertain edge travel times."""

from .assignment import (
    AssignmentEdge,
    AssignmentSet,
    MatroidSpec,
    SampledObjective,
    TaskState,
    aggregate_min,
    baseline_random,
    baseline_repeated_hungarian,
    best_aposteriori,
    brute_force_optimal,
    eligible_set,
    greedy_redundant_assignment,
    hungarian,
    initial_assignment,
    is_independent,
    marginal_decrease,
    objective_value,
)
from .costs import (
    EdgeSampleMatrix,
    JointEdgeCostModel,
    ObservedCosts,
    build_random_cost_model,
    draw_observed,
    path_cost_samples,
    sample_edge_costs,
)
from .graph import (
    GraphGenConfig,
    ScenarioPlacement,
    TransportGraph,
    generate_random_graph,
    select_placement,
)
from .metrics import RunResult, coalition_path_correlation, realized_waiting_time
from .paths import CandidatePath, PathTable, build_path_table, k_shortest_paths, shortest_expected_path

__version__ = "0.1.0"
