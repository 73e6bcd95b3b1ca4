"""Command-line entry point: ``coopsim run | list | validate``."""
from __future__ import annotations

import argparse
import os
import sys
from typing import Optional, Sequence

from .edge_ai import parse_latency
from .errors import CoopSimError, DomainError, SpecError, UnknownScenario
from .harness import DEFAULT_EPISODES, PARTICIPANT_SETS, Overrides, emit_outputs, run_batch
from .scenarios import BUILTIN_NAMES, builtin, load_path, resolve

EXIT_OK = 0
EXIT_INVALID = 1
EXIT_RUNTIME = 2
OUT_ENV = "COOPSIM_OUT"


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    # usage mistakes share the validation exit code instead of argparse's 2
    def error(self, message):
        raise UsageError(f"{self.prog}: error: {message}")


def _drop_rate(text: str) -> float:
    try:
        value = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a number: {text!r}") from None
    if not 0.0 <= value <= 1.0:
        raise argparse.ArgumentTypeError(f"drop rate must be in [0, 1], got {value}")
    return value


def _latency(text: str) -> str:
    try:
        parse_latency(text)
    except DomainError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None
    return text


def _positive_int(text: str) -> int:
    try:
        value = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an integer: {text!r}") from None
    if value < 1:
        raise argparse.ArgumentTypeError("must be at least 1")
    return value


def _seed(text: str) -> int:
    try:
        value = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an integer: {text!r}") from None
    if value < 0:
        raise argparse.ArgumentTypeError("seed must be non-negative")
    return value


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="coopsim", description="Cooperative-perception driving simulator")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    run = sub.add_parser("run", help="run a batch of episodes and write logs")
    run.add_argument("--scenario", required=True, help="built-in name or path to a scenario document")
    run.add_argument("--episodes", type=_positive_int, default=DEFAULT_EPISODES)
    run.add_argument("--seed", type=_seed, default=0, help="seed of the first episode")
    run.add_argument("--latency", type=_latency, help="none | det:<s> | uniform:<lo>,<hi> | <seconds>")
    run.add_argument("--drop", type=_drop_rate, help="frame drop probability per link")
    run.add_argument("--participants", choices=PARTICIPANT_SETS,
                     help="which cooperating agents feed the ego's fusion")
    run.add_argument("--perception", choices=("oracle", "noisy"))
    run.add_argument("--out", help=f"output directory (default ${OUT_ENV} or ./coopsim_out)")

    sub.add_parser("list", help="list built-in scenarios")

    val = sub.add_parser("validate", help="check a scenario document")
    val.add_argument("path")
    return parser


def _cmd_run(args) -> int:
    spec = resolve(args.scenario)
    ov = Overrides(args.latency, args.drop, args.participants, args.perception)
    stats = run_batch(spec, args.episodes, args.seed, ov)
    out = args.out or os.environ.get(OUT_ENV) or "coopsim_out"
    emit_outputs(stats, spec, out, ov)
    mean = "n/a" if stats.min_distance_mean is None else f"{stats.min_distance_mean:.3f} m"
    print(f"{spec.name}: {stats.n_cf}/{stats.n_total} collision-free "
          f"({stats.success_rate:g}%), mean min distance {mean}; wrote {out}")
    return EXIT_OK


def _cmd_list(_args) -> int:
    for name in BUILTIN_NAMES:
        print(f"{name:10s} {builtin(name).description}")
    return EXIT_OK


def _cmd_validate(args) -> int:
    spec = load_path(args.path)
    print(f"{args.path}: ok ({spec.name}, {len(spec.agents)} agents)")
    return EXIT_OK


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except UsageError as exc:
        parser.print_usage(sys.stderr)
        print(exc, file=sys.stderr)
        return EXIT_INVALID
    handler = {"run": _cmd_run, "list": _cmd_list, "validate": _cmd_validate}[args.command]
    try:
        return handler(args)
    except (SpecError, UnknownScenario) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except FileNotFoundError as exc:
        print(f"error: {exc.filename}: no such file", file=sys.stderr)
        return EXIT_INVALID
    except (CoopSimError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
