"""Command-line entry point: ``budgeted-ucb {run,sweep,validate-config}``.

Exit codes: 0 success, 1 configuration error, 2 runtime error.
"""

from __future__ import annotations

import argparse
import dataclasses
import logging
import sys
import time

from .config import ConfigError, ExperimentConfig
from .environment import ScheduleKind
from .harness import emit_outputs, emit_scalability, run_experiment, run_scalability

log = logging.getLogger("budgeted_ucb")

EXIT_OK, EXIT_CONFIG, EXIT_RUNTIME = 0, 1, 2
DEFAULT_ARM_COUNTS = "5,10,15,20,25,30"


def _add_common(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--config", help="flat key = value config file")
    parser.add_argument("--seeds", type=int, help="use seeds 0..n-1")
    parser.add_argument("--schedule", choices=[k.value for k in ScheduleKind])
    parser.add_argument("--policies", help="comma-separated policy names")
    parser.add_argument("--horizon", type=int)
    parser.add_argument("-v", "--verbose", action="store_true")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="budgeted-ucb", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run one experiment and write traces and curves")
    _add_common(run)
    run.add_argument("--out", required=True, help="output directory")
    run.add_argument("--workers", type=int, default=1)

    sweep = sub.add_parser("sweep", help="final objective versus number of arms (linear schedule)")
    _add_common(sweep)
    sweep.add_argument("--out", required=True, help="output directory")
    sweep.add_argument("--arms", default=DEFAULT_ARM_COUNTS, help=f"comma-separated K values (default {DEFAULT_ARM_COUNTS})")
    sweep.add_argument("--workers", type=int, default=1)

    check = sub.add_parser("validate-config", help="parse and validate a config, then echo it")
    _add_common(check)
    return parser


def resolve_config(args: argparse.Namespace) -> ExperimentConfig:
    config = ExperimentConfig.load(args.config) if args.config else ExperimentConfig()
    overrides = {}
    if args.seeds is not None:
        if args.seeds < 0:
            raise ConfigError("seeds", "count must be nonnegative")
        overrides["seeds"] = list(range(args.seeds))
    if args.schedule is not None:
        overrides["schedule"] = ScheduleKind(args.schedule)
    if args.policies is not None:
        overrides["policies"] = [p.strip() for p in args.policies.split(",") if p.strip()]
    if args.horizon is not None:
        overrides["horizon"] = args.horizon
    return dataclasses.replace(config, **overrides).validate()


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.INFO, format="%(levelname)s %(message)s")
    try:
        config = resolve_config(args)
        arm_counts = None
        if args.command == "sweep":
            try:
                arm_counts = [int(k) for k in args.arms.split(",") if k.strip()]
            except ValueError:
                raise ConfigError("arms", f"cannot parse {args.arms!r}") from None
            if not arm_counts or any(k < 2 for k in arm_counts):
                raise ConfigError("arms", "need at least one K and every K >= 2")
    except (ConfigError, OSError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG

    if args.command == "validate-config":
        sys.stdout.write(config.to_text())
        return EXIT_OK

    start = time.perf_counter()
    try:
        if args.command == "run":
            artifact = run_experiment(config, args.workers)
            paths = emit_outputs(artifact, args.out)
            for name, agg in artifact.aggregates.items():
                log.info(
                    "%-15s V(T)=%8.1f  objective=%.6g  regret=%.6g",
                    name,
                    agg.cumulative_violations[-1],
                    agg.overall_objective[-1],
                    agg.absolute_regret[-1],
                )
            if artifact.failures:
                log.error("%d run(s) failed", len(artifact.failures))
                return EXIT_RUNTIME
        else:
            table = run_scalability(config, arm_counts, args.workers)
            paths = emit_scalability(table, config, args.out)
    except Exception as exc:
        log.error("%s", exc)
        return EXIT_RUNTIME
    log.info("wrote %d file(s) to %s in %.1fs", len(paths), args.out, time.perf_counter() - start)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
