"""Multi-seed experiment driver, scalability sweep and CSV/manifest writer."""

from __future__ import annotations

import csv
import dataclasses
import logging
import traceback
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import __version__
from .baselines import EpsilonGreedyPolicy, ThompsonPolicy, UCB1Policy, VirtualQueuePolicy
from .config import POLICY_NAMES, ExperimentConfig, format_float
from .environment import (
    ConstraintSchedule,
    PowerGrid,
    RoundRecord,
    ScheduleKind,
    WirelessEnvironment,
    WirelessLink,
    throughput,
)
from .metrics import MetricCurves, aggregate, clairvoyant, curves_from_trace
from .policy_core import BudgetedUCB, BudgetSchedule, ViolationLedger, budget_at, violation_rate

log = logging.getLogger(__name__)

TRACE_HEADER = ("t", "threshold", "arm", "reward", "cost", "violated", "mode", "budget", "empirical_rate")
CURVE_FILES = {
    "violations": "cumulative_violations",
    "objective": "overall_objective",
    "regret": "absolute_regret",
}

# spawn_key prefixes; policy streams are keyed by name, not list position,
# so adding or reordering policies never shifts another policy's randomness
_ENV_STREAM = 0
_POLICY_STREAM = 1


def link_for(config: ExperimentConfig) -> WirelessLink:
    return WirelessLink(config.bandwidth, config.noise_density, config.distance, config.pathloss_exponent)


def grid_for(config: ExperimentConfig) -> PowerGrid:
    return PowerGrid(config.p_min, config.p_max, config.num_arms)


def make_environment(config: ExperimentConfig, seed: int) -> WirelessEnvironment:
    schedule = ConstraintSchedule(config.schedule, config.p_min, config.p_max, config.horizon)
    ss = np.random.SeedSequence(seed, spawn_key=(_ENV_STREAM,))
    return WirelessEnvironment(link_for(config), grid_for(config), schedule, ss, config.reward_noise_std)


def make_policy(name: str, config: ExperimentConfig, seed: int):
    k = config.num_arms
    rng = np.random.default_rng(
        np.random.SeedSequence(seed, spawn_key=(_POLICY_STREAM, POLICY_NAMES.index(name)))
    )
    if name == "budgeted_ucb":
        schedule = BudgetSchedule(config.delta0, config.effective_budget_horizon)
        return BudgetedUCB(k, schedule, exploration_scale=config.exploration_scale)
    if name == "ucb1":
        return UCB1Policy(k)
    if name == "thompson":
        sigma0 = config.sigma0
        if sigma0 is None:
            sigma0 = throughput(link_for(config), config.p_max)
        return ThompsonPolicy(k, sigma0, rng)
    if name == "epsilon_greedy":
        return EpsilonGreedyPolicy(k, config.epsilon, rng)
    if name == "virtual_queue":
        return VirtualQueuePolicy(k, config.queue_penalty_weight)
    raise ValueError(f"unknown policy {name!r}")


def run_policy(config: ExperimentConfig, name: str, seed: int) -> list[RoundRecord]:
    """Play one policy for ``config.horizon`` rounds against the seed's environment."""
    env = make_environment(config, seed)
    policy = make_policy(name, config, seed)
    budget = BudgetSchedule(config.delta0, config.effective_budget_horizon)
    ledger = ViolationLedger()
    trace = []
    for t in range(1, config.horizon + 1):
        cap = env.threshold(t)
        delta = budget_at(budget, t)
        rate = violation_rate(ledger)
        arm = policy.select(t, cap)
        reward, cost = env.step(arm)
        policy.update(arm, reward, cost, cap)
        violated = cost > cap
        ledger.rounds_seen += 1
        ledger.violation_count += violated
        mode = policy.last_mode.value if policy.last_mode is not None else None
        trace.append(RoundRecord(t, cap, arm, reward, cost, violated, mode, delta, rate))
    return trace


@dataclass
class RunArtifact:
    config: ExperimentConfig
    traces: dict[tuple[str, int], list[RoundRecord]] = field(default_factory=dict)
    curves: dict[tuple[str, int], MetricCurves] = field(default_factory=dict)
    aggregates: dict[str, MetricCurves] = field(default_factory=dict)
    failures: dict[tuple[str, int], str] = field(default_factory=dict)

    def mean_final(self, policy: str, series: str) -> float:
        return float(getattr(self.aggregates[policy], series)[-1])


def _run_job(config: ExperimentConfig, name: str, seed: int):
    try:
        return run_policy(config, name, seed), None
    except Exception:
        return None, traceback.format_exc()


def run_experiment(config: ExperimentConfig, workers: int | None = None) -> RunArtifact:
    """Run every (policy, seed) pair and aggregate their metric curves per policy.

    A policy that raises loses only its own run; the traceback lands in
    ``artifact.failures`` and the remaining runs proceed. ``workers > 1`` runs
    the pairs in a process pool; results do not depend on it.
    """
    config.validate()
    artifact = RunArtifact(config)
    if not config.policies:
        log.warning("no policies configured; nothing to run")
        return artifact
    jobs = [(name, seed) for name in config.policies for seed in config.seeds]
    if workers and workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            futures = [pool.submit(_run_job, config, name, seed) for name, seed in jobs]
            results = [f.result() for f in futures]
    else:
        results = [_run_job(config, name, seed) for name, seed in jobs]

    link, grid = link_for(config), grid_for(config)
    oracles = {}
    for (name, seed), (trace, err) in zip(jobs, results):
        if err is not None:
            log.error("run %s seed %d failed:\n%s", name, seed, err)
            artifact.failures[(name, seed)] = err
            continue
        if seed not in oracles:
            oracles[seed] = clairvoyant(grid, link, [rec.threshold for rec in trace])
        artifact.traces[(name, seed)] = trace
        artifact.curves[(name, seed)] = curves_from_trace(trace, oracles[seed], config.penalty)

    for name in config.policies:
        runs = [artifact.curves[(name, s)] for s in config.seeds if (name, s) in artifact.curves]
        if runs:
            artifact.aggregates[name] = aggregate(runs)
    return artifact


def run_scalability(
    config: ExperimentConfig, arm_counts: list[int], workers: int | None = None
) -> dict[int, dict[str, float]]:
    """Mean final overall objective per (K, policy) under the linear cap schedule."""
    if not arm_counts:
        raise ValueError("arm_counts must not be empty")
    table = {}
    for k in arm_counts:
        cfg = dataclasses.replace(config, num_arms=k, schedule=ScheduleKind.LINEAR_V_SHAPE)
        artifact = run_experiment(cfg, workers)
        table[k] = {name: artifact.mean_final(name, "overall_objective") for name in artifact.aggregates}
    return table


def _cell(value) -> str:
    if isinstance(value, bool):
        return "1" if value else "0"
    if isinstance(value, (float, np.floating)):
        return format_float(float(value))
    if value is None:
        return "none"
    return str(value)


def _write_csv(path: Path, header, rows) -> None:
    try:
        with open(path, "w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(header)
            for row in rows:
                writer.writerow([_cell(v) for v in row])
    except OSError as exc:
        raise OSError(f"cannot write {path}: {exc.strerror or exc}") from exc


def manifest_text(config: ExperimentConfig, extra: dict[str, str] | None = None) -> str:
    lines = [f"code_version = {__version__}"]
    lines += config.to_text().splitlines()
    for key, value in (extra or {}).items():
        lines.append(f"{key} = {value}")
    return "\n".join(lines) + "\n"


def write_manifest(out_dir: Path, config: ExperimentConfig, extra: dict[str, str] | None = None) -> Path:
    path = out_dir / "manifest.txt"
    try:
        path.write_text(manifest_text(config, extra), encoding="utf-8")
    except OSError as exc:
        raise OSError(f"cannot write {path}: {exc.strerror or exc}") from exc
    return path


def emit_outputs(artifact: RunArtifact, out_dir: str | Path) -> list[Path]:
    """Write per-run traces, per-metric aggregate CSVs and the manifest."""
    out = Path(out_dir)
    try:
        out.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise OSError(f"cannot create {out}: {exc.strerror or exc}") from exc
    written = []
    if not artifact.config.policies:
        log.warning("empty policy list; writing manifest only")

    if artifact.traces:
        trace_dir = out / "traces"
        trace_dir.mkdir(exist_ok=True)
        for (name, seed), trace in artifact.traces.items():
            path = trace_dir / f"{name}_seed{seed}.csv"
            _write_csv(path, TRACE_HEADER, (dataclasses.astuple(rec) for rec in trace))
            written.append(path)

    if artifact.aggregates:
        names = list(artifact.aggregates)
        horizon = len(next(iter(artifact.aggregates.values())))
        header = ["t"] + [f"{n}_{stat}" for n in names for stat in ("mean", "std")]
        for stem, attr in CURVE_FILES.items():
            cols = []
            for n in names:
                agg = artifact.aggregates[n]
                cols += [getattr(agg, attr), getattr(agg, attr + "_std")]
            rows = ([t + 1] + [float(c[t]) for c in cols] for t in range(horizon))
            path = out / f"{stem}.csv"
            _write_csv(path, header, rows)
            written.append(path)

    extra = {}
    if artifact.failures:
        extra["failed_runs"] = ",".join(f"{n}:{s}" for n, s in artifact.failures)
    written.append(write_manifest(out, artifact.config, extra))
    return written


def emit_scalability(table: dict[int, dict[str, float]], config: ExperimentConfig, out_dir: str | Path) -> list[Path]:
    """Write ``scalability.csv`` (``K,<policy>_mean,...``) and the manifest."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    names = [n for n in config.policies if any(n in row for row in table.values())]
    path = out / "scalability.csv"
    rows = ([k] + [table[k].get(n, float("nan")) for n in names] for k in table)
    _write_csv(path, ["K"] + [f"{n}_mean" for n in names], rows)
    manifest = write_manifest(out, config, {"arm_counts": ",".join(str(k) for k in table)})
    return [path, manifest]
