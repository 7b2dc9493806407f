"""``inplane-dirac`` command line.

Exit codes: 0 success, 1 usage or configuration error, 2 physics-invariant
violation.
"""

from __future__ import annotations

import argparse
import sys

from .config import parse_config
from .errors import ConfigError, DomainError, PhysicsInvariantError
from .scenarios import run_scenario
from .table import FORMATS, write_table

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_PHYSICS = 2


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="inplane-dirac", description="Run in-plane Dirac transport scenarios.")
    sub = p.add_subparsers(dest="command", required=True)
    run = sub.add_parser("run", help="run a scenario config and emit a table")
    run.add_argument("config", help="path to the scenario config")
    run.add_argument("--jobs", type=int, default=1, help="worker processes (default 1)")
    run.add_argument("--format", choices=FORMATS, default=None, help="override the config format")
    run.add_argument("--out", default=None, help="output path (default: config value or stdout)")
    val = sub.add_parser("validate", help="parse and validate a config without running it")
    val.add_argument("config")
    return p


def _read(path: str) -> str:
    try:
        with open(path, encoding="utf-8") as fh:
            return fh.read()
    except OSError as exc:
        raise UsageError(f"cannot read {path}: {exc.strerror}") from None


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
        cfg = parse_config(_read(args.config))
        if args.command == "validate":
            print(f"ok: {cfg.scenario}")
            return EXIT_OK
        if args.jobs < 1:
            raise UsageError("--jobs must be >= 1")
        fmt = args.format or cfg.format
        out = args.out or cfg.output_path
        table = run_scenario(cfg, jobs=args.jobs)
        try:
            payload = write_table(table, fmt, out)
        except OSError as exc:
            print(f"error: cannot write {out}: {exc.strerror}", file=sys.stderr)
            return EXIT_USAGE
        if not out:
            sys.stdout.buffer.write(payload)
            sys.stdout.flush()
        return EXIT_OK
    except (UsageError, ConfigError, DomainError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except PhysicsInvariantError as exc:
        print(f"physics invariant violated: {exc}", file=sys.stderr)
        return EXIT_PHYSICS


if __name__ == "__main__":
    sys.exit(main())
