"""Experiment driver: seeded instance generation, strategy runs, sweeps and aggregation."""

from __future__ import annotations

import csv
import dataclasses
import io
import json
import logging
import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Sequence

import numpy as np

from . import assignment as asg
from .costs import EdgeSampleMatrix, JointEdgeCostModel, ObservedCosts, build_random_cost_model, draw_observed, sample_edge_costs
from .graph import GraphGenConfig, ScenarioPlacement, TransportGraph, generate_random_graph, graph_to_dict, select_placement
from .metrics import RunResult, coalition_path_correlation, normalized, realized_waiting_time
from .paths import PathTable, build_path_table

log = logging.getLogger(__name__)

STRATEGIES = ("hungarian", "random", "repeated-hungarian", "greedy", "best-aposteriori")

CSV_COLUMNS = (
    "run_id", "seed", "strategy", "n_robots", "m_goals", "n_deploy", "k_paths",
    "sample_count", "waiting_time_s", "normalized_waiting", "coalition_correlation",
    "deployed", "wall_ms",
)

# Fixed stream ids: adding a stream or strategy never shifts the others.
STREAMS = {"graph": 0, "model": 1, "placement": 2, "samples": 3, "observed": 4, "random": 5}

PROFILES = {
    "desk": dict(nodes=50, radius=0.25, runs=100),
    "paper": dict(nodes=200, radius=0.13, runs=500),
}


class ConfigError(ValueError):
    pass


class RunFailure(RuntimeError):
    pass


@dataclass(frozen=True)
class ExperimentConfig:
    graph: GraphGenConfig = field(default_factory=GraphGenConfig)
    n_robots: int = 25
    m_goals: int = 5
    n_deploy: int = 20
    k_paths: int = 4
    sample_count: int = 200
    run_count: int = 100
    correlation_strength: float = 0.5
    strategies: tuple[str, ...] = STRATEGIES
    master_seed: int = 42
    # ("deploy" | "k", values) or None
    sweep: tuple[str, tuple[int, ...]] | None = None

    def points(self) -> list[tuple[int, int]]:
        """(n_deploy, k_paths) for every sweep point."""
        if self.sweep is None:
            return [(self.n_deploy, self.k_paths)]
        axis, values = self.sweep
        if axis == "deploy":
            return [(v, self.k_paths) for v in values]
        return [(self.n_deploy, v) for v in values]

    def validate(self) -> None:
        def bad(name, msg):
            raise ConfigError(f"invalid {name}: {msg}")

        if self.m_goals < 1:
            bad("m_goals", "need at least one goal")
        if self.n_robots < self.m_goals:
            bad("n_robots", f"{self.n_robots} < m_goals={self.m_goals}")
        if self.sample_count < 1:
            bad("sample_count", "must be >= 1")
        if self.run_count < 1:
            bad("run_count", "must be >= 1")
        if not 0.0 <= self.correlation_strength <= 1.0:
            bad("correlation_strength", "must lie in [0, 1]")
        unknown = [s for s in self.strategies if s not in STRATEGIES]
        if unknown or not self.strategies:
            bad("strategies", f"unknown or empty: {unknown}")
        if self.graph.hub_count + self.m_goals > self.graph.node_count:
            bad("graph.hub_count", "hubs plus goals exceed node count")
        if self.sweep is not None:
            axis, values = self.sweep
            if axis not in ("deploy", "k") or not values:
                bad("sweep", f"{self.sweep!r}")
        for nd, k in self.points():
            if not self.m_goals <= nd <= self.n_robots:
                bad("n_deploy", f"{nd} outside [m_goals={self.m_goals}, n_robots={self.n_robots}]")
            if k < 1:
                bad("k_paths", f"{k} < 1")

    def to_dict(self) -> dict[str, Any]:
        d = dataclasses.asdict(self)
        d["strategies"] = list(self.strategies)
        if self.sweep is not None:
            d["sweep"] = {"axis": self.sweep[0], "values": list(self.sweep[1])}
        return d

    @classmethod
    def from_dict(cls, doc: dict[str, Any]) -> "ExperimentConfig":
        doc = dict(doc)
        known = {f.name for f in dataclasses.fields(cls)}
        extra = set(doc) - known
        if extra:
            raise ConfigError(f"unknown config fields: {sorted(extra)}")
        if "graph" in doc:
            doc["graph"] = GraphGenConfig(**doc["graph"])
        if "strategies" in doc:
            doc["strategies"] = tuple(doc["strategies"])
        if doc.get("sweep") is not None:
            sw = doc["sweep"]
            doc["sweep"] = (sw["axis"], tuple(sw["values"]))
        return cls(**doc)


def parse_sweep(text: str) -> tuple[str, tuple[int, ...]]:
    """``deploy=5:20:3`` (inclusive range) or ``k=1,2,4,8``."""
    try:
        axis, spec = text.split("=", 1)
        axis = {"deploy": "deploy", "n_deploy": "deploy", "k": "k", "k_paths": "k"}[axis.strip()]
        if ":" in spec:
            start, stop, *step = (int(p) for p in spec.split(":"))
            values = tuple(range(start, stop + 1, step[0] if step else 1))
        else:
            values = tuple(int(p) for p in spec.split(","))
    except (ValueError, KeyError, IndexError):
        raise ConfigError(f"invalid sweep: cannot parse {text!r}") from None
    if not values:
        raise ConfigError(f"invalid sweep: {text!r} is empty")
    return axis, values


def run_seed(master_seed: int, run_id: int) -> int:
    hi, lo = np.random.SeedSequence(master_seed, spawn_key=(run_id,)).generate_state(2)
    return (int(hi) << 32) | int(lo)


def child_seed(seed: int, stream: str) -> int:
    hi, lo = np.random.SeedSequence(seed, spawn_key=(STREAMS[stream],)).generate_state(2)
    return (int(hi) << 32) | int(lo)


@dataclass
class Instance:
    seed: int
    seeds: dict[str, int]
    graph: TransportGraph
    model: JointEdgeCostModel
    placement: ScenarioPlacement
    paths: PathTable  # built at the largest K of the run
    samples: EdgeSampleMatrix
    observed: ObservedCosts

    def scenario_document(self) -> dict[str, Any]:
        return {
            "seed": self.seed,
            "seeds": self.seeds,
            "graph": graph_to_dict(self.graph),
            "cost_model": self.model.to_dict(),
            "placement": {
                "robot_locations": list(self.placement.robot_locations),
                "goal_locations": list(self.placement.goal_locations),
                "hub_nodes": list(self.placement.hub_nodes),
            },
            "paths": self.paths.to_dict(),
        }


def build_instance(config: ExperimentConfig, seed: int) -> Instance:
    seeds = {name: child_seed(seed, name) for name in STREAMS}
    gcfg = dataclasses.replace(config.graph, seed=seeds["graph"])
    graph = generate_random_graph(gcfg)
    model = build_random_cost_model(graph.edge_count, config.correlation_strength, seeds["model"])
    placement = select_placement(graph, config.n_robots, config.m_goals, gcfg.hub_count, seeds["placement"])
    k_max = max(k for _, k in config.points())
    table = build_path_table(graph, model, placement, k_max)
    samples = sample_edge_costs(model, config.sample_count, seeds["samples"])
    observed = draw_observed(model, seeds["observed"])
    return Instance(seed, seeds, graph, model, placement, table, samples, observed)


@dataclass
class StrategyOutcome:
    assignment: asg.AssignmentSet
    j0: float
    j: float
    result: RunResult


def solve_point(instance: Instance, config: ExperimentConfig, n_deploy: int, k: int) -> dict[str, StrategyOutcome]:
    """Run every configured strategy on one sweep point of one instance."""
    table = instance.paths.truncated(k)
    objective = asg.SampledObjective.from_path_table(table, instance.samples)
    budget = n_deploy - config.m_goals

    t0 = time.perf_counter()
    base = asg.initial_assignment(table, objective)
    base_ms = (time.perf_counter() - t0) * 1e3
    j0 = asg.objective_value(base, objective)

    solved: dict[str, tuple[asg.AssignmentSet, float]] = {}
    for name in config.strategies:
        t0 = time.perf_counter()
        if name == "hungarian":
            sol = base
        elif name == "random":
            sol = asg.baseline_random(table, base, budget, instance.seeds["random"])
        elif name == "repeated-hungarian":
            sol = asg.baseline_repeated_hungarian(table, objective, base, budget)
        elif name == "greedy":
            sol = asg.greedy_redundant_assignment(table, objective, base, budget)
        else:
            sol = asg.best_aposteriori(table, instance.observed)
        ms = (time.perf_counter() - t0) * 1e3 + (base_ms if name != "best-aposteriori" else 0.0)
        solved[name] = (sol, ms)

    reference = realized_waiting_time(base, table, instance.observed)
    out = {}
    for name, (sol, ms) in solved.items():
        waiting = realized_waiting_time(sol, table, instance.observed)
        result = RunResult(
            strategy=name,
            realized_waiting=waiting,
            normalized_waiting=normalized(waiting, reference),
            coalition_correlation=coalition_path_correlation(sol, table, instance.samples),
            deployed=sol.deployed,
            evaluations=sol.trace.evaluations if sol.trace else 0,
            wall_ms=ms,
        )
        out[name] = StrategyOutcome(sol, j0, asg.objective_value(sol, objective), result)
    return out


def _run_one(args: tuple[ExperimentConfig, int]) -> list[dict[str, Any]]:
    config, run_id = args
    seed = run_seed(config.master_seed, run_id)
    try:
        instance = build_instance(config, seed)
        rows = []
        for nd, k in config.points():
            for name, oc in solve_point(instance, config, nd, k).items():
                r = oc.result
                rows.append({
                    "run_id": run_id,
                    "seed": seed,
                    "strategy": name,
                    "n_robots": config.n_robots,
                    "m_goals": config.m_goals,
                    "n_deploy": nd,
                    "k_paths": k,
                    "sample_count": config.sample_count,
                    "waiting_time_s": r.realized_waiting,
                    "normalized_waiting": r.normalized_waiting,
                    "coalition_correlation": r.coalition_correlation,
                    "deployed": r.deployed,
                    "wall_ms": r.wall_ms,
                    "evaluations": r.evaluations,
                })
        return rows
    except Exception as exc:
        raise RunFailure(f"run {run_id} failed (seed {seed}): {exc!r}") from exc


def _summary(values: Sequence[float]) -> dict[str, Any]:
    n = len(values)
    if n == 0:
        return {"n": 0, "mean": None, "std": None, "ci_low": None, "ci_high": None}
    arr = np.asarray(values, dtype=float)
    mean = float(arr.mean())
    std = float(arr.std(ddof=1)) if n > 1 else 0.0
    half = 1.96 * std / math.sqrt(n)
    return {"n": n, "mean": mean, "std": std, "ci_low": mean - half, "ci_high": mean + half}


def aggregate(rows: Sequence[dict[str, Any]]) -> list[dict[str, Any]]:
    """Mean, sample std and normal 95% CI per (n_deploy, k_paths, strategy)."""
    groups: dict[tuple[int, int, str], list[dict[str, Any]]] = {}
    for r in rows:
        groups.setdefault((r["n_deploy"], r["k_paths"], r["strategy"]), []).append(r)
    out = []
    for (nd, k, name), rs in groups.items():
        out.append({
            "n_deploy": nd,
            "k_paths": k,
            "strategy": name,
            "runs": len(rs),
            "waiting_time_s": _summary([r["waiting_time_s"] for r in rs]),
            "normalized_waiting": _summary([r["normalized_waiting"] for r in rs]),
            "coalition_correlation": _summary(
                [r["coalition_correlation"] for r in rs if r["coalition_correlation"] is not None]
            ),
            "deployed": float(np.mean([r["deployed"] for r in rs])),
            "evaluations": _summary([r["evaluations"] for r in rs]),
        })
    return out


@dataclass
class ExperimentResult:
    config: ExperimentConfig
    rows: list[dict[str, Any]]
    aggregates: list[dict[str, Any]]

    def aggregate_for(self, strategy: str, n_deploy: int | None = None, k_paths: int | None = None) -> dict[str, Any]:
        for a in self.aggregates:
            if a["strategy"] != strategy:
                continue
            if n_deploy is not None and a["n_deploy"] != n_deploy:
                continue
            if k_paths is not None and a["k_paths"] != k_paths:
                continue
            return a
        raise KeyError((strategy, n_deploy, k_paths))


def run_experiment(config: ExperimentConfig, jobs: int = 1) -> ExperimentResult:
    config.validate()
    tasks = [(config, r) for r in range(config.run_count)]
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            per_run = list(pool.map(_run_one, tasks))
    else:
        per_run = []
        for t in tasks:
            per_run.append(_run_one(t))
            log.debug("run %d done", t[1])
    rows = [r for run in per_run for r in run]
    return ExperimentResult(config, rows, aggregate(rows))


def _cell(value: Any) -> Any:
    return "" if value is None else value


def csv_text(rows: Sequence[dict[str, Any]], timing: bool = False) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(CSV_COLUMNS)
    for r in rows:
        writer.writerow([
            _cell(r[c]) if (c != "wall_ms" or timing) else "" for c in CSV_COLUMNS
        ])
    return buf.getvalue()


def emit_csv(result: ExperimentResult | Sequence[dict[str, Any]], path: str | Path, timing: bool = False) -> None:
    rows = result.rows if isinstance(result, ExperimentResult) else result
    Path(path).write_text(csv_text(rows, timing))


def emit_json(result: ExperimentResult, path: str | Path, timing: bool = False) -> None:
    keep = CSV_COLUMNS + ("evaluations",)
    runs = [{c: (r[c] if c != "wall_ms" or timing else None) for c in keep} for r in result.rows]
    doc = {"config": result.config.to_dict(), "runs": runs, "aggregates": result.aggregates}
    Path(path).write_text(json.dumps(doc, indent=1, allow_nan=True) + "\n")


def replay(config: ExperimentConfig, seed: int) -> dict[str, Any]:
    """Re-run one instance from its run seed and return the solution document."""
    config.validate()
    instance = build_instance(config, seed)
    points = []
    for nd, k in config.points():
        strategies = {}
        for name, oc in solve_point(instance, config, nd, k).items():
            doc = oc.assignment.to_dict()
            doc.update(
                J0=oc.j0,
                J=oc.j,
                realized_waiting=oc.result.realized_waiting,
                normalized_waiting=oc.result.normalized_waiting,
                coalition_correlation=oc.result.coalition_correlation,
            )
            strategies[name] = doc
        points.append({"n_deploy": nd, "k_paths": k, "strategies": strategies})
    return {"seed": seed, "seeds": instance.seeds, "points": points}
