"""``bench`` command line: run experiments and replay single runs."""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

from .bench import (
    PROFILES,
    STRATEGIES,
    ConfigError,
    ExperimentConfig,
    RunFailure,
    build_instance,
    emit_csv,
    emit_json,
    parse_sweep,
    replay,
    run_experiment,
)
from .graph import GraphGenConfig


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="bench", description="Redundant robot assignment benchmark")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run an experiment and write per-run CSV")
    run.add_argument("--profile", choices=sorted(PROFILES), default="desk",
                     help="default node count, radius and run count")
    run.add_argument("--nodes", type=int)
    run.add_argument("--radius", type=float, help="geometric connectivity radius")
    run.add_argument("--graph-model", choices=["geometric", "erdos_renyi"], default="geometric")
    run.add_argument("--edge-prob", type=float, default=0.1, help="Erdos-Renyi edge probability")
    run.add_argument("--hubs", type=int, default=10)
    run.add_argument("--robots", type=int, default=25)
    run.add_argument("--goals", type=int, default=5)
    run.add_argument("--deploy", type=int, default=20)
    run.add_argument("--k-paths", type=int, default=4)
    run.add_argument("--samples", type=int, default=200)
    run.add_argument("--runs", type=int)
    run.add_argument("--corr", type=float, default=0.5)
    run.add_argument("--strategies", default=",".join(STRATEGIES))
    run.add_argument("--seed", type=int, default=42)
    run.add_argument("--sweep", help="deploy=5:20:3 or k=1,2,4,8")
    run.add_argument("--out", required=True, help="per-run CSV path")
    run.add_argument("--json", help="optional JSON with config, runs and aggregates")
    run.add_argument("--timing", action="store_true",
                     help="fill wall_ms (makes output non-reproducible)")
    run.add_argument("--jobs", type=int, default=1)

    rep = sub.add_parser("replay", help="re-execute one run and print its solution document")
    rep.add_argument("--seed", type=int, required=True, help="run seed from the CSV 'seed' column")
    rep.add_argument("--config", required=True, help="config JSON, or a results JSON from --json")
    rep.add_argument("--scenario", help="also write the scenario document here")
    return parser


def _config_from_args(args) -> ExperimentConfig:
    profile = PROFILES[args.profile]
    try:
        graph = GraphGenConfig(
            node_count=args.nodes if args.nodes is not None else profile["nodes"],
            connectivity_radius=args.radius if args.radius is not None else profile["radius"],
            hub_count=args.hubs,
            model=args.graph_model,
            edge_probability=args.edge_prob,
        )
    except ValueError as exc:
        raise ConfigError(f"invalid graph: {exc}") from None
    return ExperimentConfig(
        graph=graph,
        n_robots=args.robots,
        m_goals=args.goals,
        n_deploy=args.deploy,
        k_paths=args.k_paths,
        sample_count=args.samples,
        run_count=args.runs if args.runs is not None else profile["runs"],
        correlation_strength=args.corr,
        strategies=tuple(s.strip() for s in args.strategies.split(",") if s.strip()),
        master_seed=args.seed,
        sweep=parse_sweep(args.sweep) if args.sweep else None,
    )


def _print_summary(result) -> None:
    for a in sorted(result.aggregates, key=lambda a: (a["n_deploy"], a["k_paths"], a["strategy"])):
        nw = a["normalized_waiting"]
        cc = a["coalition_correlation"]
        corr = f"{cc['mean']:.3f}" if cc["mean"] is not None else "-"
        print(
            f"N_d={a['n_deploy']:<3d} K={a['k_paths']:<2d} {a['strategy']:<20s} "
            f"J/J0={nw['mean']:.4f} [{nw['ci_low']:.4f}, {nw['ci_high']:.4f}]  corr={corr}"
        )


def main(argv: list[str] | None = None) -> int:
    args = _build_parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING)
    try:
        if args.command == "run":
            config = _config_from_args(args)
            result = run_experiment(config, jobs=args.jobs)
            emit_csv(result, args.out, timing=args.timing)
            if args.json:
                emit_json(result, args.json, timing=args.timing)
            _print_summary(result)
        else:
            doc = json.loads(Path(args.config).read_text())
            config = ExperimentConfig.from_dict(doc.get("config", doc))
            print(json.dumps(replay(config, args.seed), indent=1))
            if args.scenario:
                instance = build_instance(config, args.seed)
                Path(args.scenario).write_text(json.dumps(instance.scenario_document()) + "\n")
    except (ConfigError, TypeError) as exc:
        print(f"bench: {exc}", file=sys.stderr)
        return 2
    except (OSError, json.JSONDecodeError) as exc:
        print(f"bench: {exc}", file=sys.stderr)
        return 1
    except RunFailure as exc:
        print(f"bench: {exc}", file=sys.stderr)
        return 3
    return 0


if __name__ == "__main__":
    sys.exit(main())
