"""Command-line entry points: scenario runs, engine comparisons, and serving.

Exit codes: 0 success, 1 pipeline error, 2 usage or I/O error.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .config import load_config
from .errors import ValidationError, ZonePlannerError
from .harness import ENGINES, compare_engines, load_scenario, run_scenario
from .wire import canonical_dumps, envelope

EXIT_OK = 0
EXIT_PIPELINE = 1
EXIT_USAGE = 2


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="zoneplanner",
        description="Mixed-initiative XR window-layout engine",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run a scenario end to end")
    run.add_argument("scenario", help="scenario file (wire schema JSON)")
    run.add_argument("--engine", choices=ENGINES, help="override the scenario engine")
    run.add_argument("--seed", type=int, help="override the scenario seed")
    run.add_argument("--config", help="engine config file")
    run.add_argument("--out", help="write the report here instead of stdout")
    run.add_argument("--format", choices=("text", "json", "csv"), default="json")
    run.add_argument("--verbose", action="store_true")

    compare = sub.add_parser("compare", help="compare engines on random instances")
    compare.add_argument("scenario", help="scenario file (wire schema JSON)")
    compare.add_argument(
        "--engines", default="greedy,oracle", help="comma-separated engine list"
    )
    compare.add_argument("--trials", type=int, default=20)
    compare.add_argument("--seed", type=int, default=0)
    compare.add_argument("--config", help="engine config file")
    compare.add_argument("--out", help="write the table here instead of stdout")
    compare.add_argument("--format", choices=("text", "json", "csv"), default="text")
    compare.add_argument("--verbose", action="store_true")

    serve = sub.add_parser("serve", help="run the HTTP service")
    serve.add_argument("--config", help="engine config file")
    serve.add_argument("--host", help="bind address override")
    serve.add_argument("--port", type=int, help="bind port override")
    return parser


def _emit(document: dict, kind: str, fmt: str, out: str | None) -> None:
    if fmt == "json":
        text = canonical_dumps(envelope(kind, document))
    elif fmt == "csv":
        text = _to_csv(document, kind)
    else:
        text = _to_text(document, kind)
    if out:
        Path(out).write_text(text + "\n")
    else:
        print(text)


def _to_csv(document: dict, kind: str) -> str:
    lines = []
    if kind == "comparison":
        lines.append("engine,mean_cost,mean_regret,runtime_seconds")
        for engine, row in sorted(document.get("engines", {}).items()):
            lines.append(
                f"{engine},{row['mean_cost']:.9g},{row['mean_regret']:.9g},"
                f"{row['runtime_seconds']:.9g}"
            )
    else:
        lines.append("key,value")
        lines.append(f"engine,{document['engine']}")
        lines.append(f"total_cost,{document['total_cost']:.9g}")
        lines.append(f"placed,{len(document['assignment']['entries'])}")
        lines.append(f"unassigned,{len(document['assignment']['unassigned'])}")
        lines.append(f"wall_time_seconds,{document['wall_time_seconds']:.9g}")
    return "\n".join(lines)


def _to_text(document: dict, kind: str) -> str:
    lines = []
    if kind == "comparison":
        lines.append(f"trials: {document['trials']}  seed: {document['seed']}")
        lines.append(f"{'engine':<10}{'mean cost':>14}{'mean regret':>14}{'runtime s':>12}")
        for engine, row in sorted(document.get("engines", {}).items()):
            lines.append(
                f"{engine:<10}{row['mean_cost']:>14.6f}{row['mean_regret']:>14.6f}"
                f"{row['runtime_seconds']:>12.3f}"
            )
    else:
        lines.append(f"engine: {document['engine']}")
        lines.append(f"goal: {document['goal']['text']}")
        lines.append(f"total cost: {document['total_cost']:.6f}")
        entries = document["assignment"]["entries"]
        lines.append(f"placed {len(entries)} apps:")
        for app, cell in sorted(entries.items()):
            lines.append(f"  {app:<14} -> {cell[0]}:{cell[1]}")
        for result in document["sizing"]:
            lines.append(
                f"zone {result['zone']}: theta*=({result['theta_star']['w0']:.3f},"
                f" {result['theta_star']['h0']:.3f}) scale={result['scale_factor']:.3f}"
            )
        if document["assignment"]["unassigned"]:
            lines.append(f"unassigned: {', '.join(document['assignment']['unassigned'])}")
        lines.append(f"wall time: {document['wall_time_seconds']:.3f}s")
    return "\n".join(lines)


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code not in (0, None) else EXIT_OK

    try:
        if args.command == "run":
            scenario = load_scenario(args.scenario)
            if args.config:
                scenario.config = load_config(args.config)
            if args.seed is not None:
                scenario.seed = args.seed
            report = run_scenario(scenario, engine=args.engine)
            _emit(report, "scenario_report", args.format, args.out)
            return EXIT_OK

        if args.command == "compare":
            scenario = load_scenario(args.scenario)
            if args.config:
                scenario.config = load_config(args.config)
            engines = [e.strip() for e in args.engines.split(",") if e.strip()]
            table = compare_engines(scenario, engines, args.trials, args.seed)
            _emit(table, "comparison", args.format, args.out)
            return EXIT_OK

        if args.command == "serve":
            from .service import serve

            config = load_config(args.config)
            if args.host:
                config.host = args.host
            if args.port is not None:
                config.port = args.port
            serve(config)
            return EXIT_OK
    except (FileNotFoundError, ValidationError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except ZonePlannerError as exc:
        print(f"pipeline error: {exc}", file=sys.stderr)
        return EXIT_PIPELINE
    return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
