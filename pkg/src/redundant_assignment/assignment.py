"""Redundant robot-to-goal assignment.

The objective is the mean, over goals, of the expected earliest arrival among
all robots sent to that goal, estimated on a fixed set of S joint samples.
An initial one-robot-per-goal matching is always present; redundant robots are
added on top of it under a matroid constraint (deployment budget, one goal and
one path per robot).

All sample means go through :func:`ltr_mean`, a strict left-to-right sum, so the
incremental greedy state and the from-scratch objective agree bit for bit.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Iterable, NamedTuple, Sequence

import numpy as np
from scipy.optimize import linear_sum_assignment

from .costs import EdgeSampleMatrix, ObservedCosts, path_cost_samples
from .paths import PathTable


class AssignmentEdge(NamedTuple):
    robot: int
    goal: int
    path: int


def ltr_mean(x: np.ndarray) -> np.ndarray | float:
    """Mean along the last axis, accumulated strictly left to right."""
    x = np.asarray(x, dtype=float)
    total = np.cumsum(x, axis=-1)[..., -1]
    return total / x.shape[-1]


class SampledObjective:
    """Pre-drawn path-cost samples for every (i, j, k), shared by all strategies of a run.

    ``samples`` has shape ``(N, M, K, S)``; slots past the available paths hold NaN.
    """

    def __init__(self, samples: np.ndarray, n_paths: np.ndarray):
        self.samples = samples
        self.n_paths = n_paths
        self.samples.setflags(write=False)
        # (N, M, K) sample means; NaN where no path exists
        self.means = ltr_mean(samples)

    @classmethod
    def from_path_table(cls, table: PathTable, edge_samples: EdgeSampleMatrix) -> "SampledObjective":
        s = edge_samples.sample_count
        k_max = max(1, max(table.n_paths(i, j) for i in range(table.n_robots) for j in range(table.m_goals)))
        out = np.full((table.n_robots, table.m_goals, k_max, s), np.nan)
        n_paths = np.zeros((table.n_robots, table.m_goals), dtype=int)
        by_edges: dict[tuple[int, ...], np.ndarray] = {}
        for (i, j), paths in table.entries.items():
            n_paths[i, j] = len(paths)
            for k, p in enumerate(paths):
                if p.edge_indices not in by_edges:
                    by_edges[p.edge_indices] = path_cost_samples(edge_samples, p.edge_indices)
                out[i, j, k] = by_edges[p.edge_indices]
        return cls(out, n_paths)

    @classmethod
    def from_arrays(cls, per_pair: Sequence[Sequence[Sequence[Sequence[float]]]]) -> "SampledObjective":
        """Build from nested lists ``per_pair[i][j] = [samples of path 0, path 1, ...]``."""
        n = len(per_pair)
        m = len(per_pair[0])
        k_max = max(len(per_pair[i][j]) for i in range(n) for j in range(m))
        s = len(per_pair[0][0][0])
        out = np.full((n, m, k_max, s), np.nan)
        n_paths = np.zeros((n, m), dtype=int)
        for i in range(n):
            for j in range(m):
                n_paths[i, j] = len(per_pair[i][j])
                for k, vec in enumerate(per_pair[i][j]):
                    out[i, j, k] = vec
        return cls(out, n_paths)

    @property
    def sample_count(self) -> int:
        return self.samples.shape[-1]

    @property
    def n_robots(self) -> int:
        return self.samples.shape[0]

    @property
    def m_goals(self) -> int:
        return self.samples.shape[1]

    def __getitem__(self, edge: tuple[int, int, int]) -> np.ndarray:
        i, j, k = edge
        if not 0 <= k < self.n_paths[i, j]:
            raise IndexError(f"path {k} does not exist for pair ({i}, {j})")
        return self.samples[i, j, k]

    def all_edges(self) -> Iterable[AssignmentEdge]:
        for i in range(self.n_robots):
            for j in range(self.m_goals):
                for k in range(self.n_paths[i, j]):
                    yield AssignmentEdge(i, j, k)

    def best_path_means(self) -> tuple[np.ndarray, np.ndarray]:
        """Per (robot, goal): the lowest path sample mean and the path achieving it."""
        means = np.where(np.isnan(self.means), np.inf, self.means)
        return means.min(axis=2), means.argmin(axis=2)


@dataclass
class GreedyTrace:
    deltas: list[float] = field(default_factory=list)
    evaluations: int = 0
    # objective derived from the incremental task state after each pick
    state_objectives: list[float] = field(default_factory=list)


@dataclass
class AssignmentSet:
    initial: tuple[AssignmentEdge, ...]
    redundant: list[AssignmentEdge] = field(default_factory=list)
    trace: GreedyTrace | None = None

    @property
    def edges(self) -> list[AssignmentEdge]:
        return list(self.initial) + list(self.redundant)

    @property
    def deployed(self) -> int:
        return len(self.initial) + len(self.redundant)

    def incident(self, goal: int) -> list[AssignmentEdge]:
        return [e for e in self.edges if e.goal == goal]

    def validate(self, m_goals: int) -> None:
        goals = sorted(e.goal for e in self.initial)
        if goals != list(range(m_goals)):
            raise ValueError("initial assignment must cover every goal exactly once")
        robots = [e.robot for e in self.edges]
        if len(robots) != len(set(robots)):
            raise ValueError("a robot appears more than once")

    def to_dict(self) -> dict:
        out = {
            "initial": [list(e) for e in self.initial],
            "redundant": [list(e) for e in self.redundant],
        }
        if self.trace is not None:
            out["deltas"] = list(self.trace.deltas)
            out["evaluations"] = self.trace.evaluations
        return out


@dataclass(frozen=True)
class MatroidSpec:
    budget: int

    @classmethod
    def for_deployment(cls, n_deploy: int, m_goals: int) -> "MatroidSpec":
        if n_deploy < m_goals:
            raise ValueError("deployment size must be at least the number of goals")
        return cls(n_deploy - m_goals)


class TaskState:
    """Running per-goal minimum over the samples of all assigned robots."""

    def __init__(self, objective: SampledObjective, initial: Iterable[AssignmentEdge]):
        m, s = objective.m_goals, objective.sample_count
        self.per_goal_min = np.full((m, s), np.inf)
        for e in initial:
            self.per_goal_min[e.goal] = aggregate_min(self.per_goal_min[e.goal], objective[e])

    def add(self, edge: AssignmentEdge, samples: np.ndarray) -> None:
        self.per_goal_min[edge.goal] = aggregate_min(self.per_goal_min[edge.goal], samples)

    def goal_means(self) -> np.ndarray:
        return ltr_mean(self.per_goal_min)

    def objective(self) -> float:
        return float(ltr_mean(self.goal_means()))


def hungarian(cost_matrix) -> list[tuple[int, int]]:
    """Min-cost matching of every row to a distinct column (rows <= columns)."""
    c = np.asarray(cost_matrix, dtype=float)
    if c.ndim != 2:
        raise ValueError("cost matrix must be 2-D")
    if c.shape[0] > c.shape[1]:
        raise ValueError(f"more rows ({c.shape[0]}) than columns ({c.shape[1]})")
    if not np.all(np.isfinite(c)) or np.any(c < 0):
        raise ValueError("costs must be finite and non-negative")
    rows, cols = linear_sum_assignment(c)
    return sorted(zip(rows.tolist(), cols.tolist()))


def _match_goals(per_pair_cost: np.ndarray, best_k: np.ndarray, robots: Sequence[int]) -> list[tuple[float, AssignmentEdge]]:
    """Hungarian over goals x ``robots``; returns (cost, edge) per matched pair.

    With fewer robots than goals the matching runs the other way round, so
    every remaining robot still gets a goal.
    """
    sub = per_pair_cost[list(robots)].T  # goals x robots
    if sub.shape[0] <= sub.shape[1]:
        pairs = [(g, col) for g, col in hungarian(sub)]
    else:
        pairs = [(g, col) for col, g in hungarian(sub.T)]
    out = []
    for g, col in pairs:
        r = robots[col]
        out.append((float(sub[g, col]), AssignmentEdge(r, g, int(best_k[r, g]))))
    return out


def initial_assignment(table: PathTable, objective: SampledObjective) -> AssignmentSet:
    if objective.n_robots < objective.m_goals:
        raise ValueError("need at least as many robots as goals")
    cost, best_k = objective.best_path_means()
    matched = _match_goals(cost, best_k, list(range(objective.n_robots)))
    initial = tuple(sorted((e for _, e in matched), key=lambda e: e.goal))
    return AssignmentSet(initial=initial)


def baseline_j0(assignment: AssignmentSet, objective: SampledObjective) -> float:
    return objective_value(AssignmentSet(assignment.initial), objective)


def is_independent(candidate: Iterable[AssignmentEdge], matroid: MatroidSpec, initial: Iterable[AssignmentEdge]) -> bool:
    candidate = list(candidate)
    initial = set(initial)
    if len(candidate) > matroid.budget:
        return False
    if any(e in initial for e in candidate):
        return False
    robots = [e.robot for e in initial] + [e.robot for e in candidate]
    return len(robots) == len(set(robots))


def eligible_set(
    current: Sequence[AssignmentEdge],
    matroid: MatroidSpec,
    initial: Sequence[AssignmentEdge],
    table: PathTable | SampledObjective,
) -> list[AssignmentEdge]:
    """Edges that keep ``current`` independent, in lexicographic order."""
    if len(current) >= matroid.budget:
        return []
    used = {e.robot for e in initial} | {e.robot for e in current}
    return [AssignmentEdge(*e) for e in table.all_edges() if e[0] not in used]


def aggregate_min(state_row: np.ndarray, candidate_samples: np.ndarray) -> np.ndarray:
    state_row = np.asarray(state_row, dtype=float)
    candidate_samples = np.asarray(candidate_samples, dtype=float)
    if state_row.shape != candidate_samples.shape:
        raise ValueError(f"shape mismatch {state_row.shape} vs {candidate_samples.shape}")
    return np.minimum(state_row, candidate_samples)


def marginal_decrease(task_state: TaskState, goal: int, candidate_samples: np.ndarray) -> float:
    row = task_state.per_goal_min[goal]
    curr = ltr_mean(row)
    new = ltr_mean(aggregate_min(row, candidate_samples))
    return float(curr - new)


def greedy_redundant_assignment(
    table: PathTable | None,
    objective: SampledObjective,
    initial: AssignmentSet | Sequence[AssignmentEdge],
    budget: int,
) -> AssignmentSet:
    """Greedy redundant assignment with an incremental per-goal minimum.

    Each round scores every eligible edge by its marginal decrease against the
    current task state and keeps the first maximiser in (robot, goal, path)
    order. Stops early when no unused robot is left.
    """
    if budget < 0:
        raise ValueError("budget must be >= 0")
    init = tuple(initial.initial if isinstance(initial, AssignmentSet) else initial)
    state = TaskState(objective, init)
    trace = GreedyTrace()
    chosen: list[AssignmentEdge] = []
    used = np.zeros(objective.n_robots, dtype=bool)
    used[[e.robot for e in init]] = True
    exists = np.arange(objective.samples.shape[2])[None, None, :] < objective.n_paths[:, :, None]

    for _ in range(budget):
        free = np.flatnonzero(~used)
        if free.size == 0:
            break
        mask = exists[free]  # (F, M, K)
        n_eval = int(mask.sum())
        if n_eval == 0:
            break
        trace.evaluations += n_eval
        curr = state.goal_means()  # (M,)
        cand = objective.samples[free]  # (F, M, K, S)
        new = ltr_mean(np.minimum(cand, state.per_goal_min[None, :, None, :]))
        delta = np.where(mask, curr[None, :, None] - new, -np.inf)
        # flat argmax returns the first maximum in (robot, goal, path) order
        f, j, k = np.unravel_index(int(np.argmax(delta)), delta.shape)
        best = AssignmentEdge(int(free[f]), int(j), int(k))
        trace.deltas.append(float(delta[f, j, k]))
        chosen.append(best)
        used[best.robot] = True
        state.add(best, objective[best])
        trace.state_objectives.append(state.objective())
    return AssignmentSet(initial=init, redundant=chosen, trace=trace)


def objective_value(assignment: AssignmentSet, objective: SampledObjective) -> float:
    """Sampled objective computed from scratch over all incident edges of each goal."""
    per_goal = np.empty(objective.m_goals)
    for j in range(objective.m_goals):
        incident = [e for e in assignment.edges if e.goal == j]
        if not incident:
            raise ValueError(f"goal {j} has no assigned robot")
        row = objective[incident[0]].copy()
        for e in incident[1:]:
            row = np.minimum(row, objective[e])
        per_goal[j] = ltr_mean(row)
    return float(ltr_mean(per_goal))


def baseline_random(table: PathTable, initial: AssignmentSet, budget: int, seed: int) -> AssignmentSet:
    rng = np.random.default_rng(seed)
    used = {e.robot for e in initial.initial}
    free = [i for i in range(table.n_robots) if i not in used]
    count = min(budget, len(free))
    picks = rng.choice(len(free), size=count, replace=False) if count else []
    chosen = []
    for p in picks:
        r = free[int(p)]
        g = int(rng.integers(table.m_goals))
        k = int(rng.integers(table.n_paths(r, g)))
        chosen.append(AssignmentEdge(r, g, k))
    return AssignmentSet(initial=initial.initial, redundant=chosen)


def baseline_repeated_hungarian(
    table: PathTable, objective: SampledObjective, initial: AssignmentSet, budget: int
) -> AssignmentSet:
    """Hungarian rounds over the still-unused robots, M redundant robots at a time."""
    cost, best_k = objective.best_path_means()
    used = {e.robot for e in initial.initial}
    chosen: list[AssignmentEdge] = []
    while len(chosen) < budget:
        free = [i for i in range(objective.n_robots) if i not in used]
        if not free:
            break
        matched = _match_goals(cost, best_k, free)
        room = budget - len(chosen)
        if len(matched) > room:
            # partial final round keeps the cheapest matched pairs
            matched = sorted(matched, key=lambda ce: (ce[0], ce[1]))[:room]
        for _, e in sorted(matched, key=lambda ce: ce[1].goal):
            chosen.append(e)
            used.add(e.robot)
    return AssignmentSet(initial=initial.initial, redundant=chosen)


def realized_pair_costs(table: PathTable, observed: ObservedCosts) -> tuple[np.ndarray, np.ndarray]:
    """Per (robot, goal): cheapest realized path cost and its path index."""
    row = observed.realized[None, :]
    cost = np.empty((table.n_robots, table.m_goals))
    best_k = np.zeros((table.n_robots, table.m_goals), dtype=int)
    for (i, j), paths in table.entries.items():
        vals = [float(path_cost_samples(row, p.edge_indices)[0]) for p in paths]
        best_k[i, j] = int(np.argmin(vals))
        cost[i, j] = vals[best_k[i, j]]
    return cost, best_k


def best_aposteriori(table: PathTable, observed: ObservedCosts) -> AssignmentSet:
    """Hindsight-optimal one-robot-per-goal matching under the realized edge costs."""
    cost, best_k = realized_pair_costs(table, observed)
    matched = _match_goals(cost, best_k, list(range(table.n_robots)))
    return AssignmentSet(initial=tuple(sorted((e for _, e in matched), key=lambda e: e.goal)))


def brute_force_optimal(
    table: PathTable | None,
    objective: SampledObjective,
    initial: AssignmentSet,
    budget: int,
    limit: int = 1_000_000,
) -> tuple[AssignmentSet, float]:
    """Exhaustive minimiser of the sampled objective over all independent sets.

    Larger sets are tried first and only strict improvements replace the
    incumbent, so ties resolve toward including more robots.
    """
    init = initial.initial
    used = {e.robot for e in init}
    free = [i for i in range(objective.n_robots) if i not in used]
    options = {
        r: [AssignmentEdge(r, j, k) for j in range(objective.m_goals) for k in range(objective.n_paths[r, j])]
        for r in free
    }
    top = min(budget, len(free))
    # by_size[s] = number of independent sets with s redundant robots
    by_size = [1] + [0] * top
    for r in free:
        for s in range(top, 0, -1):
            by_size[s] += by_size[s - 1] * len(options[r])
    total = sum(by_size)
    if total > limit:
        raise ValueError(f"instance too large for exhaustive search ({total} sets)")

    best_set, best_val = None, np.inf
    for size in range(top, -1, -1):
        for robots in itertools.combinations(free, size):
            for combo in itertools.product(*(options[r] for r in robots)):
                cand = AssignmentSet(initial=init, redundant=list(combo))
                val = objective_value(cand, objective)
                if best_set is None or val < best_val:
                    best_set, best_val = cand, val
    return best_set, best_val
