"""Evaluation curves and the clairvoyant constrained optimum they compare against."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .environment import PowerGrid, WirelessLink, power_levels, throughput

DEFAULT_PENALTY = 1e6


@dataclass(frozen=True)
class ClairvoyantOptimum:
    optimal_arm: np.ndarray
    optimal_reward: np.ndarray

    def __len__(self) -> int:
        return len(self.optimal_arm)


def clairvoyant(grid: PowerGrid, link: WirelessLink, thresholds: Sequence[float]) -> ClairvoyantOptimum:
    """Best throughput among arms whose power fits under each round's cap.

    Rounds where even the lowest level exceeds the cap fall back to the
    cheapest arm.
    """
    if len(thresholds) == 0:
        raise ValueError("clairvoyant needs at least one threshold")
    levels = power_levels(grid)
    rates = [throughput(link, p) for p in levels]
    cheapest = min(range(len(levels)), key=lambda a: (levels[a], a))
    arms = np.empty(len(thresholds), dtype=np.int64)
    for i, cap in enumerate(thresholds):
        best = -1
        for a, p in enumerate(levels):
            if p <= cap and (best < 0 or rates[a] > rates[best]):
                best = a
        arms[i] = best if best >= 0 else cheapest
    return ClairvoyantOptimum(arms, np.asarray(rates)[arms])


@dataclass
class MetricCurves:
    """Per-round evaluation series for one run, or their cross-run mean.

    ``*_std`` fields are only filled in by :func:`aggregate`.
    """

    cumulative_violations: np.ndarray
    overall_objective: np.ndarray
    absolute_regret: np.ndarray
    final_violation_rate: float
    cumulative_violations_std: np.ndarray | None = None
    overall_objective_std: np.ndarray | None = None
    absolute_regret_std: np.ndarray | None = None

    def __len__(self) -> int:
        return len(self.cumulative_violations)


def compute_curves(
    rewards: Sequence[float],
    violated: Sequence[bool],
    oracle: ClairvoyantOptimum,
    penalty: float = DEFAULT_PENALTY,
) -> MetricCurves:
    """Cumulative violations, penalised objective and ``|sum(mu* - r)|`` per round.

    ``violated`` holds the per-round indicator ``cost > threshold``.
    """
    if not (len(rewards) == len(violated) == len(oracle)):
        raise ValueError(
            f"length mismatch: {len(rewards)} rewards, {len(violated)} flags, {len(oracle)} oracle rounds"
        )
    r = np.asarray(rewards, dtype=np.float64)
    v = np.cumsum(np.asarray(violated, dtype=np.int64))
    objective = np.cumsum(r) - penalty * v
    regret = np.abs(np.cumsum(oracle.optimal_reward - r))
    rate = float(v[-1] / len(v)) if len(v) else 0.0
    return MetricCurves(v, objective, regret, rate)


def curves_from_trace(trace, oracle: ClairvoyantOptimum, penalty: float = DEFAULT_PENALTY) -> MetricCurves:
    """:func:`compute_curves` on a list of ``RoundRecord``-like objects."""
    return compute_curves([rec.reward for rec in trace], [rec.violated for rec in trace], oracle, penalty)


def aggregate(runs: Sequence[MetricCurves]) -> MetricCurves:
    """Pointwise mean and sample standard deviation across runs.

    A single run yields a zero standard deviation rather than NaN.
    """
    if not runs:
        raise ValueError("aggregate needs at least one run")
    lengths = {len(r) for r in runs}
    if len(lengths) != 1:
        raise ValueError(f"runs differ in length: {sorted(lengths)}")

    def stack(attr: str) -> tuple[np.ndarray, np.ndarray]:
        data = np.stack([np.asarray(getattr(r, attr), dtype=np.float64) for r in runs])
        std = data.std(axis=0, ddof=1) if len(runs) > 1 else np.zeros(data.shape[1])
        return data.mean(axis=0), std

    v_mean, v_std = stack("cumulative_violations")
    o_mean, o_std = stack("overall_objective")
    g_mean, g_std = stack("absolute_regret")
    rate = float(np.mean([r.final_violation_rate for r in runs]))
    return MetricCurves(v_mean, o_mean, g_mean, rate, v_std, o_std, g_std)


@dataclass(frozen=True)
class LogGrowthReport:
    """Outcome of comparing linear and logarithmic fits of a violation curve.

    ``better`` is ``"log"`` or ``"linear"`` when a post-budget region with at
    least three rounds exists, else ``None`` and only ``sublinear`` is set.
    """

    region_start: int
    linear_sse: float | None
    log_sse: float | None
    better: str | None
    sublinear: bool


def _sse(design: np.ndarray, y: np.ndarray) -> float:
    coef, *_ = np.linalg.lstsq(design, y, rcond=None)
    resid = y - design @ coef
    return float(resid @ resid)


def log_growth_check(series: Sequence[float], horizon: int | None = None, budget_horizon: int = 0) -> LogGrowthReport:
    """Fit ``V(t) ~ a + b t`` and ``V(t) ~ a + b ln t`` over rounds ``t > budget_horizon``.

    ``series[i]`` is the cumulative violation count after round ``i + 1``.
    The sublinearity flag is ``V(T) - V(T/2) < V(T/2)``.
    """
    y_all = np.asarray(series, dtype=np.float64)
    T = len(y_all) if horizon is None else horizon
    if T > len(y_all):
        raise ValueError(f"horizon {T} exceeds series length {len(y_all)}")
    y_all = y_all[:T]
    half = y_all[T // 2 - 1]
    sublinear = bool(y_all[T - 1] - half < half)

    t = np.arange(1, T + 1, dtype=np.float64)
    mask = t > budget_horizon
    if mask.sum() < 3:
        return LogGrowthReport(budget_horizon + 1, None, None, None, sublinear)
    tt, y = t[mask], y_all[mask]
    ones = np.ones_like(tt)
    linear = _sse(np.column_stack([ones, tt]), y)
    log = _sse(np.column_stack([ones, np.log(tt)]), y)
    return LogGrowthReport(budget_horizon + 1, linear, log, "log" if log < linear else "linear", sublinear)
