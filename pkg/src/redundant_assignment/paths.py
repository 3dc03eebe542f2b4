"""Candidate routes: the K cheapest loopless paths (by expected travel time) per robot-goal pair.

Paths are ordered by ``(expected_cost, node sequence)``, so equal-cost paths come
out in lexicographic node order and every enumeration is reproducible.
"""

from __future__ import annotations

import heapq
from dataclasses import dataclass
from typing import Any, Iterable, Sequence

import numpy as np

from .costs import JointEdgeCostModel
from .graph import ScenarioPlacement, TransportGraph


class NoPathError(RuntimeError):
    pass


@dataclass(frozen=True)
class CandidatePath:
    nodes: tuple[int, ...]
    edge_indices: tuple[int, ...]
    expected_cost: float

    @property
    def source(self) -> int:
        return self.nodes[0]

    @property
    def target(self) -> int:
        return self.nodes[-1]


def _weights(model) -> np.ndarray:
    if isinstance(model, JointEdgeCostModel):
        return model.mean
    return np.asarray(model, dtype=float)


def path_from_nodes(graph: TransportGraph, weights, nodes: Sequence[int]) -> CandidatePath:
    w = _weights(weights)
    edges = tuple(graph.edge_index(u, v) for u, v in zip(nodes[:-1], nodes[1:]))
    cost = 0.0
    for e in edges:
        cost += float(w[e])
    return CandidatePath(tuple(int(n) for n in nodes), edges, cost)


def _dijkstra(
    graph: TransportGraph,
    w: np.ndarray,
    source: int,
    target: int,
    banned_nodes: frozenset[int] | set[int] = frozenset(),
    banned_arcs: set[tuple[int, int]] | frozenset = frozenset(),
) -> tuple[int, ...] | None:
    """Lexicographically smallest among the minimum-cost paths, or ``None``."""
    heap: list[tuple[float, tuple[int, ...]]] = [(0.0, (source,))]
    settled: set[int] = set()
    best: dict[int, float] = {source: 0.0}
    while heap:
        cost, path = heapq.heappop(heap)
        u = path[-1]
        if u in settled:
            continue
        settled.add(u)
        if u == target:
            return path
        for v, idx in graph.neighbors(u):
            if v in settled or v in banned_nodes or (u, v) in banned_arcs:
                continue
            c = cost + float(w[idx])
            # keep equal-cost labels: the lexicographic winner is decided on pop
            if c <= best.get(v, np.inf):
                best[v] = c
                heapq.heappush(heap, (c, path + (v,)))
    return None


def shortest_expected_path(graph: TransportGraph, model, source: int, target: int) -> CandidatePath:
    if source == target:
        raise ValueError("source and target must differ")
    nodes = _dijkstra(graph, _weights(model), source, target)
    if nodes is None:
        raise NoPathError(f"node {target} unreachable from {source}; graph is not connected")
    return path_from_nodes(graph, model, nodes)


def k_shortest_paths(graph: TransportGraph, model, source: int, target: int, k: int) -> list[CandidatePath]:
    """Yen's deviation enumeration of the ``k`` cheapest simple paths."""
    if k < 1:
        raise ValueError("k must be >= 1")
    w = _weights(model)
    found = [shortest_expected_path(graph, w, source, target)]
    candidates: list[tuple[float, tuple[int, ...]]] = []
    seen = {found[0].nodes}

    while len(found) < k:
        last = found[-1].nodes
        for i in range(len(last) - 1):
            spur, root = last[i], last[: i + 1]
            banned_arcs = {p.nodes[i : i + 2] for p in found if p.nodes[: i + 1] == root}
            spur_path = _dijkstra(graph, w, spur, target, set(root[:-1]), banned_arcs)
            if spur_path is None:
                continue
            nodes = root[:-1] + spur_path
            if nodes in seen:
                continue
            seen.add(nodes)
            heapq.heappush(candidates, (path_from_nodes(graph, w, nodes).expected_cost, nodes))
        if not candidates:
            break
        _, nodes = heapq.heappop(candidates)
        found.append(path_from_nodes(graph, w, nodes))
    return found


class PathTable:
    """Up to K candidate paths for every (robot, goal) pair, cheapest first."""

    def __init__(self, entries: dict[tuple[int, int], list[CandidatePath]], n_robots: int, m_goals: int, k: int):
        self.entries = entries
        self.n_robots = n_robots
        self.m_goals = m_goals
        self.k = k

    def __getitem__(self, pair: tuple[int, int]) -> list[CandidatePath]:
        return self.entries[pair]

    def path(self, robot: int, goal: int, k: int) -> CandidatePath:
        return self.entries[(robot, goal)][k]

    def n_paths(self, robot: int, goal: int) -> int:
        return len(self.entries[(robot, goal)])

    def all_edges(self) -> Iterable[tuple[int, int, int]]:
        """Every (robot, goal, path) triple, in lexicographic order."""
        for i in range(self.n_robots):
            for j in range(self.m_goals):
                for k in range(self.n_paths(i, j)):
                    yield (i, j, k)

    def total_paths(self) -> int:
        return sum(len(v) for v in self.entries.values())

    def truncated(self, k: int) -> "PathTable":
        """The K-prefix table; equals a fresh build with ``k`` since enumeration order is fixed."""
        if k > self.k:
            raise ValueError(f"cannot widen a K={self.k} table to {k}")
        return PathTable({p: v[:k] for p, v in self.entries.items()}, self.n_robots, self.m_goals, k)

    def to_dict(self) -> dict[str, Any]:
        return {
            "k": self.k,
            "entries": [
                {"robot": i, "goal": j, "paths": [list(p.nodes) for p in self.entries[(i, j)]]}
                for i in range(self.n_robots)
                for j in range(self.m_goals)
            ],
        }

    @classmethod
    def from_dict(cls, doc: dict[str, Any], graph: TransportGraph, model) -> "PathTable":
        entries = {}
        for item in doc["entries"]:
            entries[(item["robot"], item["goal"])] = [
                path_from_nodes(graph, model, nodes) for nodes in item["paths"]
            ]
        n = 1 + max(i for i, _ in entries)
        m = 1 + max(j for _, j in entries)
        return cls(entries, n, m, doc["k"])


def build_path_table(graph: TransportGraph, model, placement: ScenarioPlacement, k: int) -> PathTable:
    cache: dict[tuple[int, int], list[CandidatePath]] = {}
    entries = {}
    for i, r in enumerate(placement.robot_locations):
        for j, g in enumerate(placement.goal_locations):
            if (r, g) not in cache:
                cache[(r, g)] = k_shortest_paths(graph, model, r, g, k)
            entries[(i, j)] = cache[(r, g)]
    return PathTable(entries, placement.n_robots, placement.m_goals, k)
