"""Evaluation measures: realized waiting time and coalition path correlation."""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass
from itertools import combinations

import numpy as np

from .assignment import AssignmentSet
from .costs import EdgeSampleMatrix, ObservedCosts, path_cost_samples
from .paths import PathTable


@dataclass
class RunResult:
    strategy: str
    realized_waiting: float
    normalized_waiting: float
    coalition_correlation: float | None
    deployed: int
    evaluations: int = 0
    wall_ms: float | None = None

    def to_dict(self) -> dict:
        return asdict(self)


def realized_waiting_time(assignment: AssignmentSet, table: PathTable, observed: ObservedCosts) -> float:
    row = observed.realized[None, :]
    m = table.m_goals
    total = 0.0
    for j in range(m):
        costs = [
            float(path_cost_samples(row, table.path(e.robot, e.goal, e.path).edge_indices)[0])
            for e in assignment.edges
            if e.goal == j
        ]
        if not costs:
            raise ValueError(f"goal {j} has no assigned robot")
        total += min(costs)
    return total / m


def pearson(x: np.ndarray, y: np.ndarray) -> float | None:
    """Two-pass Pearson coefficient; ``None`` when either vector is constant."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    dx = x - x.mean()
    dy = y - y.mean()
    sxx = float(dx @ dx)
    syy = float(dy @ dy)
    if sxx == 0.0 or syy == 0.0:
        return None
    return float(dx @ dy) / math.sqrt(sxx * syy)


def coalition_path_correlation(
    assignment: AssignmentSet, table: PathTable, samples: EdgeSampleMatrix
) -> float | None:
    """Mean pairwise path-cost correlation inside each coalition, averaged over coalitions.

    Goals served by a single robot are skipped, as are pairs with a constant
    sample vector. Returns ``None`` when nothing is left to average.
    """
    per_goal = []
    for j in range(table.m_goals):
        members = [e for e in assignment.edges if e.goal == j]
        if len(members) < 2:
            continue
        vecs = [path_cost_samples(samples, table.path(*e).edge_indices) for e in members]
        rs = [r for a, b in combinations(vecs, 2) if (r := pearson(a, b)) is not None]
        if rs:
            per_goal.append(sum(rs) / len(rs))
    if not per_goal:
        return None
    return sum(per_goal) / len(per_goal)


def normalized(value: float, reference: float) -> float:
    if reference == 0.0:
        return 1.0 if value == 0.0 else math.inf
    return value / reference
