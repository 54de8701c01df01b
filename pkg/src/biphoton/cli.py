"""Command-line front end: validate configs, list scenarios, run experiments.

Exit codes: 0 success, 2 schema error (unknown/missing/mistyped config
keys), 3 domain error (invalid physics parameters or unsatisfiable
resolution), 4 resource limit (a computation would exceed its memory
budget).
"""

from __future__ import annotations

import argparse
import sys

from .config import describe_scenarios, validate_config
from .errors import (
    ConfigError,
    DomainError,
    GeometryError,
    ResolutionError,
    ResourceLimitError,
    ShapeError,
)
from .scenarios import run_scenario

EXIT_OK = 0
EXIT_SCHEMA = 2
EXIT_DOMAIN = 3
EXIT_RESOURCE = 4


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="biphoton",
        description="Two-photon interference through far-field phase distortions",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    run = sub.add_parser("run", help="run a scenario described by a YAML config")
    run.add_argument("config", help="path to the scenario config")
    val = sub.add_parser("validate", help="check a config and echo the resolved parameters")
    val.add_argument("config", help="path to the scenario config")
    sub.add_parser("scenarios", help="list scenarios with their keys and defaults")
    return parser


def _report_config_error(exc: ConfigError) -> int:
    for category, message in exc.errors:
        print(f"{category} error: {message}", file=sys.stderr)
    return EXIT_SCHEMA if exc.has_schema_errors else EXIT_DOMAIN


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    if args.command == "scenarios":
        print(describe_scenarios())
        return EXIT_OK
    try:
        cfg = validate_config(args.config)
    except ConfigError as exc:
        return _report_config_error(exc)
    if args.command == "validate":
        print(f"scenario: {cfg.scenario}")
        print(f"output_dir: {cfg.output_dir}")
        print(f"render: {cfg.render}")
        for key in sorted(cfg.params):
            print(f"{key}: {cfg.params[key]}")
        return EXIT_OK
    try:
        report = run_scenario(cfg)
    except ResourceLimitError as exc:
        print(f"resource error: {exc}", file=sys.stderr)
        return EXIT_RESOURCE
    except (DomainError, ResolutionError, GeometryError, ShapeError) as exc:
        print(f"domain error: {exc}", file=sys.stderr)
        return EXIT_DOMAIN
    print(f"scenario {report.scenario} finished; wrote {len(report.artifacts)} artifacts "
          f"to {cfg.output_dir}")
    for name in sorted(report.metrics):
        print(f"  {name} = {report.metrics[name]:.6g}")
    return EXIT_OK


def entrypoint():
    raise SystemExit(main())


if __name__ == "__main__":
    entrypoint()
