"""Transport networks: generation, robot/goal placement and JSON round-tripping.

Undirected graphs keep one entry per edge in ``edges``; the position of an edge
in that list is its cost index, shared by both traversal directions.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Any

import numpy as np
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import connected_components
from scipy.spatial.distance import pdist, squareform


class GraphFormatError(ValueError):
    """Raised when a graph document cannot be parsed."""


@dataclass(frozen=True)
class TransportGraph:
    coords: tuple[tuple[float, float], ...]
    edges: tuple[tuple[int, int], ...]
    directed: bool = False
    _adjacency: tuple[tuple[tuple[int, int], ...], ...] = field(
        init=False, repr=False, compare=False
    )

    def __post_init__(self):
        n = len(self.coords)
        seen = set()
        adj: list[list[tuple[int, int]]] = [[] for _ in range(n)]
        for idx, (u, v) in enumerate(self.edges):
            if not (0 <= u < n and 0 <= v < n):
                raise ValueError(f"edge {idx} ({u}, {v}) references a missing node")
            if u == v:
                raise ValueError(f"edge {idx} is a self-loop on node {u}")
            key = (u, v) if self.directed else (min(u, v), max(u, v))
            if key in seen:
                raise ValueError(f"duplicate edge {key}")
            seen.add(key)
            adj[u].append((v, idx))
            if not self.directed:
                adj[v].append((u, idx))
        for row in adj:
            row.sort()
        object.__setattr__(self, "_adjacency", tuple(tuple(r) for r in adj))

    @property
    def node_count(self) -> int:
        return len(self.coords)

    @property
    def edge_count(self) -> int:
        """Number of cost indices (one per undirected edge)."""
        return len(self.edges)

    def neighbors(self, u: int) -> tuple[tuple[int, int], ...]:
        """``(neighbor, cost_index)`` pairs leaving ``u``, sorted by neighbor."""
        return self._adjacency[u]

    def edge_index(self, u: int, v: int) -> int:
        for w, idx in self._adjacency[u]:
            if w == v:
                return idx
        raise KeyError(f"no edge {u} -> {v}")

    def is_connected(self) -> bool:
        """Breadth-first reachability of every node from node 0 (and back, if directed)."""
        if self.node_count == 0:
            return False

        def reach(adj) -> int:
            seen = {0}
            frontier = [0]
            while frontier:
                nxt = []
                for u in frontier:
                    for v in adj[u]:
                        if v not in seen:
                            seen.add(v)
                            nxt.append(v)
                frontier = nxt
            return len(seen)

        fwd = [[v for v, _ in self._adjacency[u]] for u in range(self.node_count)]
        if reach(fwd) != self.node_count:
            return False
        if not self.directed:
            return True
        rev: list[list[int]] = [[] for _ in range(self.node_count)]
        for u, v in self.edges:
            rev[v].append(u)
        return reach(rev) == self.node_count


@dataclass(frozen=True)
class GraphGenConfig:
    node_count: int = 50
    connectivity_radius: float = 0.25
    hub_count: int = 10
    seed: int = 0
    # "geometric" or "erdos_renyi"
    model: str = "geometric"
    edge_probability: float = 0.1

    def __post_init__(self):
        if self.node_count < 2:
            raise ValueError(f"node_count must be >= 2, got {self.node_count}")
        if self.connectivity_radius <= 0:
            raise ValueError("connectivity_radius must be positive")
        if not 1 <= self.hub_count <= self.node_count:
            raise ValueError(
                f"hub_count must be in [1, node_count={self.node_count}], got {self.hub_count}"
            )
        if self.model not in ("geometric", "erdos_renyi"):
            raise ValueError(f"unknown graph model {self.model!r}")


@dataclass(frozen=True)
class ScenarioPlacement:
    robot_locations: tuple[int, ...]
    goal_locations: tuple[int, ...]
    hub_nodes: tuple[int, ...]

    def __post_init__(self):
        if not len(self.robot_locations) >= len(self.goal_locations) >= 1:
            raise ValueError("need N >= M >= 1")
        if len(set(self.goal_locations)) != len(self.goal_locations):
            raise ValueError("goal locations must be distinct")
        hubs = set(self.hub_nodes)
        if any(r not in hubs for r in self.robot_locations):
            raise ValueError("every robot must start at a hub")

    @property
    def n_robots(self) -> int:
        return len(self.robot_locations)

    @property
    def m_goals(self) -> int:
        return len(self.goal_locations)


def _bridge_components(
    n: int, dist: np.ndarray, edges: set[tuple[int, int]]
) -> set[tuple[int, int]]:
    """Add shortest inter-component edges (Kruskal over the complete graph) until connected."""
    parent = list(range(n))

    def find(x: int) -> int:
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    components = n
    for u, v in edges:
        ru, rv = find(u), find(v)
        if ru != rv:
            parent[ru] = rv
            components -= 1
    if components == 1:
        return edges

    iu, iv = np.triu_indices(n, k=1)
    order = np.lexsort((iv, iu, dist[iu, iv]))
    for idx in order:
        u, v = int(iu[idx]), int(iv[idx])
        ru, rv = find(u), find(v)
        if ru != rv:
            parent[ru] = rv
            edges.add((u, v))
            components -= 1
            if components == 1:
                break
    return edges


def generate_random_graph(config: GraphGenConfig) -> TransportGraph:
    """Random connected undirected graph on points in the unit square.

    The geometric model links node pairs closer than ``connectivity_radius``;
    the Erdos-Renyi model links each pair with ``edge_probability``. Either way,
    leftover components are joined by their shortest bridging edges.
    """
    rng = np.random.default_rng(config.seed)
    n = config.node_count
    pts = rng.random((n, 2))
    dist = squareform(pdist(pts))
    iu, iv = np.triu_indices(n, k=1)
    if config.model == "geometric":
        mask = dist[iu, iv] < config.connectivity_radius
    else:
        mask = rng.random(iu.size) < config.edge_probability
    edges = {(int(u), int(v)) for u, v in zip(iu[mask], iv[mask])}
    edges = _bridge_components(n, dist, edges)
    coords = tuple((float(x), float(y)) for x, y in pts)
    return TransportGraph(coords=coords, edges=tuple(sorted(edges)), directed=False)


def select_placement(
    graph: TransportGraph, n_robots: int, m_goals: int, hub_count: int, seed: int
) -> ScenarioPlacement:
    n = graph.node_count
    if hub_count > n or m_goals > n:
        raise ValueError("hub_count and m_goals must not exceed node count")
    if m_goals + hub_count > n:
        raise ValueError(
            f"m_goals + hub_count = {m_goals + hub_count} exceeds node count {n}"
        )
    if n_robots < m_goals:
        raise ValueError("need at least as many robots as goals")
    rng = np.random.default_rng(seed)
    perm = rng.permutation(n)
    hubs = tuple(int(x) for x in perm[:hub_count])
    rest = perm[hub_count:]
    goals = tuple(int(x) for x in rng.choice(rest, size=m_goals, replace=False))
    robots = tuple(int(hubs[i]) for i in rng.integers(0, hub_count, size=n_robots))
    return ScenarioPlacement(robot_locations=robots, goal_locations=goals, hub_nodes=hubs)


def graph_to_dict(graph: TransportGraph) -> dict[str, Any]:
    return {
        "nodes": [{"id": i, "x": x, "y": y} for i, (x, y) in enumerate(graph.coords)],
        "edges": [{"u": u, "v": v} for u, v in graph.edges],
        "directed": graph.directed,
    }


def graph_from_dict(doc: Any) -> TransportGraph:
    if not isinstance(doc, dict):
        raise GraphFormatError("graph document must be an object")
    for key in ("nodes", "edges", "directed"):
        if key not in doc:
            raise GraphFormatError(f"missing field '{key}'")
    if not isinstance(doc["directed"], bool):
        raise GraphFormatError("field 'directed' must be a boolean")
    nodes, edges = doc["nodes"], doc["edges"]
    if not isinstance(nodes, list):
        raise GraphFormatError("field 'nodes' must be a list")
    if not isinstance(edges, list):
        raise GraphFormatError("field 'edges' must be a list")
    coords = []
    for pos, node in enumerate(nodes):
        try:
            if int(node["id"]) != pos:
                raise GraphFormatError(f"field 'nodes[{pos}].id' must equal {pos}")
            coords.append((float(node["x"]), float(node["y"])))
        except (KeyError, TypeError, ValueError) as exc:
            if isinstance(exc, GraphFormatError):
                raise
            raise GraphFormatError(f"malformed field 'nodes[{pos}]': {exc!r}") from None
    pairs = []
    for pos, edge in enumerate(edges):
        try:
            pairs.append((int(edge["u"]), int(edge["v"])))
        except (KeyError, TypeError, ValueError) as exc:
            raise GraphFormatError(f"malformed field 'edges[{pos}]': {exc!r}") from None
    try:
        return TransportGraph(coords=tuple(coords), edges=tuple(pairs), directed=doc["directed"])
    except ValueError as exc:
        raise GraphFormatError(f"invalid field 'edges': {exc}") from None


def serialize(graph: TransportGraph) -> str:
    return json.dumps(graph_to_dict(graph))


def deserialize(text: str) -> TransportGraph:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise GraphFormatError(f"unparseable graph document: {exc}") from None
    return graph_from_dict(doc)


def adjacency_matrix(graph: TransportGraph):
    """Sparse 0/1 adjacency, mostly for component checks."""
    n = graph.node_count
    if not graph.edges:
        return coo_matrix((n, n))
    u, v = np.array(graph.edges).T
    if not graph.directed:
        u, v = np.concatenate([u, v]), np.concatenate([v, u])
    return coo_matrix((np.ones(u.size), (u, v)), shape=(n, n))


def component_count(graph: TransportGraph) -> int:
    count, _ = connected_components(adjacency_matrix(graph), directed=graph.directed, connection="strong")
    return int(count)
