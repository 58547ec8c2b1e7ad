"""Exit criteria for the package, one test per criterion.

Each test records a one-line verdict that ``conftest.py`` prints in the
terminal summary, so ``pytest tests/test_acceptance.py`` ends with a
pass/fail table regardless of capture settings.
"""

import math
import random
import time

import numpy as np
import pytest

from budgeted_ucb.config import ExperimentConfig
from budgeted_ucb.environment import PowerGrid, ScheduleKind, WirelessLink, power_levels, throughput
from budgeted_ucb.harness import emit_outputs, run_experiment, run_scalability
from budgeted_ucb.metrics import clairvoyant
from budgeted_ucb.policy_core import (
    ArmStats,
    BudgetSchedule,
    Mode,
    ViolationLedger,
    budget_at,
    select_action,
)

BASELINES = ("ucb1", "thompson", "epsilon_greedy", "virtual_queue")
VERDICTS: list[str] = []


def record(number: int, title: str, ok: bool, detail: str) -> None:
    VERDICTS.append(f"[{'PASS' if ok else 'FAIL'}] {number:2d}. {title}: {detail}")
    assert ok, detail


@pytest.fixture(scope="module")
def experiments():
    """Default-config runs of both cap schedules, with wall-clock times."""
    out = {}
    for kind in ScheduleKind:
        start = time.perf_counter()
        artifact = run_experiment(ExperimentConfig(schedule=kind))
        out[kind] = (artifact, time.perf_counter() - start)
    return out


def finals(artifact, series):
    return {name: artifact.mean_final(name, series) for name in artifact.aggregates}


def test_01_throughput_point_check():
    link = WirelessLink()
    hi, lo = throughput(link, 1.0), throughput(link, 0.1)
    ok = math.isclose(hi, 1e6, rel_tol=1e-9) and math.isclose(lo, 1e6 * math.log2(1.1), rel_tol=1e-9)
    record(1, "throughput formula", ok, f"r(1.0 W)={hi:.6f}, r(0.1 W)={lo:.6f}")


def test_02_budget_decay_exactness():
    worst = 0.0
    ok = True
    for delta0, t_bud in [(0.5, 2000), (0.3, 777), (0.9, 10)]:
        sched = BudgetSchedule(delta0, t_bud)
        ok &= abs(budget_at(sched, 1) - delta0) <= 1e-12
        ok &= abs(budget_at(sched, t_bud + 1)) <= 1e-12
        a, b, c = 1, (t_bud + 2) // 2, t_bud + 1
        ya, yb, yc = (budget_at(sched, t) for t in (a, b, c))
        # cross product of (b-a, yb-ya) and (c-a, yc-ya)
        cross = (b - a) * (yc - ya) - (c - a) * (yb - ya)
        worst = max(worst, abs(cross) / (c - a))
    ok &= worst <= 1e-12
    record(2, "budget decay", bool(ok), f"endpoints exact, max collinearity residual {worst:.2e}")


def _independent_branch(stats, t, cap, sched, ledger):
    n = [s.play_count for s in stats]
    r = [math.inf if k == 0 else s.reward_sum / k + math.sqrt(2 * math.log(t) / k) for s, k in zip(stats, n)]
    c = [math.inf if k == 0 else s.cost_sum / k + math.sqrt(2 * math.log(t) / k) for s, k in zip(stats, n)]
    rate = ledger.violation_count / ledger.rounds_seen if ledger.rounds_seen else 0.0
    budget = max(0.0, sched.delta0 * (1 - (t - 1) / sched.budget_horizon))
    if rate <= budget:
        return Mode.EXPLORE, r.index(max(r))
    feasible = [a for a in range(len(stats)) if c[a] <= cap]
    if feasible:
        best = max(r[a] for a in feasible)
        return Mode.SAFE_EXPLORE, min(a for a in feasible if r[a] == best)
    return Mode.MIN_VIOLATION, c.index(min(c))


def test_03_branch_coverage():
    start = time.perf_counter()
    cases = [
        (([ArmStats(2, 1.0, 0.1), ArmStats()], 3, 0.5, BudgetSchedule(0.5, 100), ViolationLedger()),
         (1, Mode.EXPLORE)),
        # UCB_c = 1.0 + 1.224 and 0.9 + 1.224, both above the 0.3 cap; v = 0.63 > delta = 0.025
        (([ArmStats(4, 4.0, 4.0), ArmStats(4, 8.0, 3.6)], 20, 0.3, BudgetSchedule(0.5, 20), ViolationLedger(19, 12)),
         (1, Mode.MIN_VIOLATION)),
        # UCB_c = 0.1 + 1.239 <= 1.5 < 0.9 + 1.239
        (([ArmStats(3, 6.0, 0.3), ArmStats(3, 9.0, 2.7)], 10, 1.5, BudgetSchedule(0.1, 10**9), ViolationLedger(10, 5)),
         (0, Mode.SAFE_EXPLORE)),
    ]
    hand = []
    for args, expected in cases:
        d = select_action(*args)
        hand.append((d.arm, d.mode) == expected)
    rng = random.Random(2024)
    mismatches, seen_modes = 0, set()
    for _ in range(1000):
        k = rng.randint(1, 4)
        stats = []
        for _ in range(k):
            n = rng.randint(0, 6)
            stats.append(ArmStats(n, rng.uniform(0, 5) * n, rng.uniform(0.1, 1.0) * n) if n else ArmStats())
        t = rng.randint(1, 60)
        seen = rng.randint(0, t - 1)
        ledger = ViolationLedger(seen, rng.randint(0, seen))
        sched = BudgetSchedule(rng.choice([0.05, 0.2, 0.5]), rng.randint(1, 80))
        cap = rng.uniform(0.1, 4.0)
        d = select_action(stats, t, cap, sched, ledger)
        seen_modes.add(d.mode)
        mismatches += (d.mode, d.arm) != _independent_branch(stats, t, cap, sched, ledger)
    elapsed = time.perf_counter() - start
    ok = all(hand) and mismatches == 0 and seen_modes == set(Mode) and elapsed < 1.0
    record(3, "branch coverage", ok, f"hand cases {sum(hand)}/3, {mismatches} mismatches in 1000 states, {elapsed:.2f}s")


def test_04_violation_dominance(experiments):
    lines, ok = [], True
    for kind, (artifact, elapsed) in experiments.items():
        v = finals(artifact, "cumulative_violations")
        good = all(v["budgeted_ucb"] < v[b] for b in BASELINES) and elapsed < 10.0
        ok &= good
        lines.append(f"{kind.value}: budgeted {v['budgeted_ucb']:.1f} vs min baseline "
                     f"{min(v[b] for b in BASELINES):.1f} ({elapsed:.1f}s)")
    record(4, "violation dominance", ok, "; ".join(lines))


def test_05_sublinear_violations(experiments):
    artifact, _ = experiments[ScheduleKind.UNIFORM_RANDOM]
    agg = artifact.aggregates["budgeted_ucb"]
    v1000, v2000 = agg.cumulative_violations[999], agg.cumulative_violations[1999]
    rate = agg.final_violation_rate
    ok = (v2000 - v1000 < v1000) and rate < 0.5
    record(5, "sublinear violation growth", ok, f"V(1000)={v1000:.1f}, V(2000)={v2000:.1f}, v_T={rate:.3f}")


def test_06_objective_dominance(experiments):
    lines, ok = [], True
    for kind, (artifact, _) in experiments.items():
        obj = finals(artifact, "overall_objective")
        best_base = max(BASELINES, key=obj.get)
        ok &= all(obj["budgeted_ucb"] > obj[b] for b in BASELINES)
        lines.append(f"{kind.value}: budgeted {obj['budgeted_ucb']:.4g} vs {best_base} {obj[best_base]:.4g}")
    record(6, "objective dominance", ok, "; ".join(lines))


def test_07_regret_sublinearity(experiments):
    artifact, _ = experiments[ScheduleKind.UNIFORM_RANDOM]
    reg = artifact.aggregates["budgeted_ucb"].absolute_regret
    early, late = reg[499] / 500, reg[1999] / 2000
    record(7, "regret sublinearity", late < early, f"R(500)/500={early:.4g}, R(2000)/2000={late:.4g}")


def test_08_scalability_ordering():
    start = time.perf_counter()
    table = run_scalability(ExperimentConfig(), [5, 10, 15, 20, 25, 30])
    elapsed = time.perf_counter() - start
    losing = [k for k, row in table.items() if not all(row["budgeted_ucb"] > row[b] for b in BASELINES)]
    ok = not losing and elapsed < 60.0
    detail = ", ".join(
        f"K={k}: {row['budgeted_ucb']:.3g} vs {max(row[b] for b in BASELINES):.3g}" for k, row in table.items()
    )
    record(8, "scalability ordering", ok, f"{detail} ({elapsed:.1f}s)")


def _sorted_scan(levels, rates, cap):
    for a in sorted(range(len(levels)), key=lambda a: -rates[a]):
        if levels[a] <= cap:
            return a
    return int(np.argmin(levels))


def test_09_oracle_equivalence():
    rng = np.random.default_rng(99)
    link = WirelessLink()
    disagreements = 0
    for _ in range(10_000):
        grid = PowerGrid(0.1, 1.0, int(rng.integers(2, 31)))
        cap = float(rng.uniform(0.0, 1.1))
        levels = power_levels(grid)
        rates = [throughput(link, p) for p in levels]
        disagreements += int(clairvoyant(grid, link, [cap]).optimal_arm[0]) != _sorted_scan(levels, rates, cap)
    record(9, "oracle equivalence", disagreements == 0, f"{disagreements} disagreements in 10000 instances")


def test_10_determinism_and_pairing(experiments, tmp_path):
    artifact, _ = experiments[ScheduleKind.UNIFORM_RANDOM]
    emit_outputs(artifact, tmp_path / "a")
    emit_outputs(run_experiment(ExperimentConfig()), tmp_path / "b")
    files = sorted(p.relative_to(tmp_path / "a") for p in (tmp_path / "a").rglob("*") if p.is_file())
    identical = all((tmp_path / "a" / f).read_bytes() == (tmp_path / "b" / f).read_bytes() for f in files)
    paired = True
    for kind, (art, _) in experiments.items():
        for seed in art.config.seeds:
            caps = [[r.threshold for r in art.traces[(p, seed)]] for p in art.config.policies]
            paired &= all(c == caps[0] for c in caps)
    record(10, "determinism and pairing", identical and paired,
           f"{len(files)} files byte-identical={identical}, thresholds paired={paired}")


def test_11_conservation(experiments):
    worst = 0.0
    for artifact, _ in experiments.values():
        lam = artifact.config.penalty
        for key, curves in artifact.curves.items():
            total = math.fsum(r.reward for r in artifact.traces[key])
            lhs = curves.overall_objective[-1] + lam * curves.cumulative_violations[-1]
            worst = max(worst, abs(lhs - total) / abs(total))
    record(11, "conservation", worst <= 1e-12, f"max relative residual {worst:.2e}")
