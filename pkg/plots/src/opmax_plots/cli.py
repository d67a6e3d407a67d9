"""Command-line entry point for figure generation.

Exit codes: 0 success, 1 usage error, 2 input/figure error.
"""

from __future__ import annotations

import argparse
import sys

from . import figures
from .io import PlotsError

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_RUNTIME = 2


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise _UsageError(message)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="opmax-plots",
                     description="Generate figures from simulator outputs.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("total-opinion",
                       help="per-class total opinion vs time from a trace dir")
    p.add_argument("trace_dir")
    p.add_argument("--out", required=True, help="output image path (.png/.svg)")
    p.add_argument("--highlight-class", type=int, default=None)
    p.set_defaults(func=_cmd_total_opinion)

    p = sub.add_parser("centrality-box",
                       help="final opinion vs placement centrality from "
                            "sweep CSVs (one per algorithm)")
    p.add_argument("sweeps", nargs="+", help="sweep.csv paths")
    p.add_argument("--out", required=True)
    p.add_argument("--centrality", default="current_flow_closeness")
    p.add_argument("--bins", type=int, default=5)
    p.set_defaults(func=_cmd_centrality_box)

    p = sub.add_parser("simplex",
                       help="belief-simplex density from a trace JSON sidecar")
    p.add_argument("sidecar")
    p.add_argument("--out", required=True)
    p.add_argument("--times", default="",
                   help="comma-separated snapshot steps to include")
    p.set_defaults(func=_cmd_simplex)
    return parser


def _cmd_total_opinion(args) -> int:
    result = figures.plot_total_opinion(args.trace_dir, args.out,
                                        highlight_class=args.highlight_class)
    print(f"wrote {result.path} "
          f"({result.info['n_replications']} replication(s))")
    return EXIT_OK


def _cmd_centrality_box(args) -> int:
    result = figures.plot_centrality_box(args.sweeps, args.out,
                                         centrality=args.centrality,
                                         n_bins=args.bins)
    for algorithm, pcc in sorted(result.info["pcc"].items()):
        print(f"{algorithm}: PCC = {pcc:+.4f}")
    print(f"wrote {result.path}")
    return EXIT_OK


def _cmd_simplex(args) -> int:
    times = [int(s) for s in args.times.split(",") if s.strip()]
    result = figures.plot_belief_simplex(args.sidecar, args.out, times=times)
    print(f"wrote {result.path} (panels: {', '.join(result.info['panels'])})")
    return EXIT_OK


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except _UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    try:
        return args.func(args)
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except PlotsError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
