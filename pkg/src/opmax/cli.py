"""Command-line interface.

Exit codes: 0 on success, 1 on usage/configuration errors, 2 on runtime
errors (e.g. a disconnected input graph).
"""

from __future__ import annotations

import argparse
import io
import json
import os
import sys
import time

import numpy as np

from . import engine, toy
from .engine import ConfigError, EngineError, GraphSpec, SimConfig
from .graph import (
    GraphError,
    classic_centrality,
    current_flow_closeness,
    generate_pa,
    load_edge_list,
    write_edge_list,
)
from .strategies import StrategyConfig

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_RUNTIME = 2


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    """argparse exits with status 2 on bad usage; the contract here is 1."""

    def error(self, message):
        raise _UsageError(message)


def _presets() -> dict[str, SimConfig]:
    pa1k = SimConfig(
        graph=GraphSpec("pa", n=1000, m=3),
        strategy=StrategyConfig(temperature=0.015, n_q=4, window=4),
    )
    pa10k = SimConfig(
        graph=GraphSpec("pa", n=10000, m=3),
        strategy=StrategyConfig(temperature=0.03, n_q=5, window=5),
    )
    fb = SimConfig(
        graph=GraphSpec("file", path="facebook_combined.txt"),
        strategy=StrategyConfig(temperature=0.03, n_q=5, window=5),
    )
    return {"pa1k": pa1k, "pa10k": pa10k, "fb-ego": fb}


def _load_config(args) -> SimConfig:
    base: dict = {}
    if getattr(args, "preset", None):
        base = _presets()[args.preset].to_dict()
    if getattr(args, "config", None):
        try:
            with open(args.config) as f:
                file_cfg = json.load(f)
        except OSError as exc:
            raise _UsageError(f"cannot read config file: {exc}") from exc
        except json.JSONDecodeError as exc:
            raise _UsageError(f"config file is not valid JSON: {exc}") from exc
        base = _merge(base, file_cfg)
    if not base:
        raise _UsageError("either --config or --preset is required")
    # flag overrides
    if getattr(args, "seed", None) is not None:
        base["master_seed"] = args.seed
    if getattr(args, "algorithm", None):
        base["algorithm"] = args.algorithm
    if getattr(args, "replications", None) is not None:
        base["replications"] = args.replications
    if getattr(args, "horizon", None) is not None:
        base["horizon"] = args.horizon
    if getattr(args, "snapshot_at", None):
        base["snapshot_at"] = _parse_int_list(args.snapshot_at)
    try:
        return SimConfig.from_dict(base)
    except (ConfigError, KeyError, TypeError, ValueError) as exc:
        raise _UsageError(f"invalid configuration: {exc}") from exc


def _merge(base: dict, override: dict) -> dict:
    out = dict(base)
    for k, v in override.items():
        if isinstance(v, dict) and isinstance(out.get(k), dict):
            out[k] = _merge(out[k], v)
        else:
            out[k] = v
    return out


def _parse_int_list(text: str) -> list[int]:
    try:
        return [int(x) for x in text.split(",") if x.strip() != ""]
    except ValueError as exc:
        raise _UsageError(f"expected comma-separated integers, got {text!r}") from exc


# -- subcommands ----------------------------------------------------------------


def _cmd_run(args) -> int:
    cfg = _load_config(args)
    out_dir = args.out
    started = time.monotonic()
    g = engine.build_graph(cfg)
    traces = []
    for r in range(cfg.replications):
        traces.append(engine.run(cfg, r, graph=g))
        print(f"replication {r + 1}/{cfg.replications} done", file=sys.stderr)
    summary = engine.aggregate(traces)
    for tr in traces:
        engine.write_trace(tr, out_dir)
    engine.write_summary(cfg, summary, time.monotonic() - started, out_dir)
    print(f"wrote {len(traces)} trace(s) and summary.json to {out_dir}")
    return EXIT_OK


def _cmd_sweep(args) -> int:
    cfg = _load_config(args)
    g = engine.build_graph(cfg)
    roles = engine.resolve_roles(cfg, g)
    if args.placements:
        placements = _parse_int_list(args.placements)
    else:
        placements = _quantile_placements(g, roles, args.num_placements)
    result = engine.centrality_sweep(cfg, placements, graph=g)
    lines = ["placement,algorithm,mean_final_total," + ",".join(engine.SWEEP_CENTRALITIES)]
    for i, v in enumerate(result.placements):
        cents = ",".join(
            format(result.centralities[k][i], ".17g") for k in engine.SWEEP_CENTRALITIES
        )
        lines.append(
            f"{v},{cfg.algorithm},{format(result.mean_final_total[i], '.17g')},{cents}"
        )
    os.makedirs(args.out, exist_ok=True)
    engine.atomic_write(os.path.join(args.out, "sweep.csv"), "\n".join(lines) + "\n")
    engine.atomic_write(
        os.path.join(args.out, "sweep_pcc.json"),
        json.dumps({"algorithm": cfg.algorithm, "pcc": result.pcc}, sort_keys=True, indent=2),
    )
    for kind, value in sorted(result.pcc.items()):
        print(f"PCC[{kind}] = {value:+.4f}")
    return EXIT_OK


def _quantile_placements(g, roles, count: int) -> list[int]:
    """Spread placements across the current-flow-closeness range."""
    if count < 2:
        raise _UsageError("--num-placements must be >= 2")
    scores = current_flow_closeness(g)
    order = [v for v in np.argsort(scores, kind="stable")
             if v not in roles.random_sources]
    idx = np.linspace(0, len(order) - 1, count).round().astype(int)
    return sorted({int(order[i]) for i in idx})


def _cmd_toy(args) -> int:
    rows = toy.toy_table(args.samples, args.seed, mc_trials=args.mc_trials)
    cols = list(rows[0].keys())
    lines = [",".join(cols)]
    for row in rows:
        lines.append(",".join(
            format(v, ".17g") if isinstance(v, float) else str(v) for v in row.values()
        ))
    os.makedirs(args.out, exist_ok=True)
    path = os.path.join(args.out, "toy_results.csv")
    engine.atomic_write(path, "\n".join(lines) + "\n")
    n_cond = sum(r["condition"] for r in rows)
    print(f"wrote {len(rows)} instances to {path} "
          f"({n_cond} satisfy the mixed-strategy condition)")
    return EXIT_OK


def _cmd_gen_graph(args) -> int:
    if args.nodes < 2 or args.edges_per_node < 1 or args.edges_per_node >= args.nodes:
        raise _UsageError("need nodes >= 2 and 1 <= edges-per-node < nodes")
    g = generate_pa(args.nodes, args.edges_per_node, args.seed)
    buf = io.StringIO()
    write_edge_list(g, buf)
    engine.atomic_write(args.out, buf.getvalue())
    print(f"wrote PA graph ({g.n} nodes, {g.edge_count} edges) to {args.out}")
    return EXIT_OK


def _cmd_centrality(args) -> int:
    try:
        with open(args.graph) as f:
            g = load_edge_list(f).graph
    except OSError as exc:
        raise _UsageError(f"cannot read graph file: {exc}") from exc
    kinds = args.kind.split(",") if args.kind else list(engine.SWEEP_CENTRALITIES)
    scores = {}
    for kind in kinds:
        if kind == "current_flow_closeness":
            scores[kind] = current_flow_closeness(g)
        elif kind in ("degree", "closeness", "betweenness"):
            scores[kind] = classic_centrality(g, kind)
        else:
            raise _UsageError(f"unknown centrality kind {kind!r}")
    lines = ["node," + ",".join(kinds)]
    for v in range(g.n):
        lines.append(f"{v}," + ",".join(format(scores[k][v], ".17g") for k in kinds))
    text = "\n".join(lines) + "\n"
    if args.out:
        engine.atomic_write(args.out, text)
        print(f"wrote centrality scores to {args.out}")
    else:
        sys.stdout.write(text)
    return EXIT_OK


# -- parser ----------------------------------------------------------------------


def _add_config_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", help="JSON config file mirroring the simulation fields")
    p.add_argument("--preset", choices=("pa1k", "pa10k", "fb-ego"),
                   help="baked-in default configuration")
    p.add_argument("--seed", type=int, help="master seed override")
    p.add_argument("--algorithm", choices=engine.ALGORITHMS)
    p.add_argument("--replications", type=int)
    p.add_argument("--horizon", type=int)
    p.add_argument("--out", default="out", help="output directory")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="opmax", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="run one experiment: traces + summary")
    _add_config_flags(p_run)
    p_run.add_argument("--snapshot-at", dest="snapshot_at",
                       help="comma-separated step indices for extra belief snapshots")
    p_run.set_defaults(func=_cmd_run)

    p_sweep = sub.add_parser("sweep", help="smart-source placement sweep")
    _add_config_flags(p_sweep)
    p_sweep.add_argument("--placements", help="comma-separated placement node ids")
    p_sweep.add_argument("--num-placements", type=int, default=20,
                         help="auto-pick placements across the centrality range")
    p_sweep.set_defaults(func=_cmd_sweep)

    p_toy = sub.add_parser("toy", help="closed-form toy-game table with oracle deltas")
    p_toy.add_argument("--samples", type=int, default=1000)
    p_toy.add_argument("--seed", type=int, default=0)
    p_toy.add_argument("--mc-trials", type=int, default=2000)
    p_toy.add_argument("--out", default="out")
    p_toy.set_defaults(func=_cmd_toy)

    p_gen = sub.add_parser("gen-graph", help="generate a preferential-attachment graph")
    p_gen.add_argument("--nodes", type=int, required=True)
    p_gen.add_argument("--edges-per-node", type=int, required=True)
    p_gen.add_argument("--seed", type=int, default=0)
    p_gen.add_argument("--out", required=True, help="edge-list output file")
    p_gen.set_defaults(func=_cmd_gen_graph)

    p_cent = sub.add_parser("centrality", help="centrality scores for a graph file")
    p_cent.add_argument("--graph", required=True, help="edge-list file")
    p_cent.add_argument("--kind", help="comma-separated kinds (default: all)")
    p_cent.add_argument("--out", help="CSV output file (default: stdout)")
    p_cent.set_defaults(func=_cmd_centrality)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        return args.func(args)
    except _UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except ConfigError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (EngineError, GraphError) as exc:
        print(f"runtime error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
