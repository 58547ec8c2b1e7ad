"""Budgeted UCB with a linearly decaying violation budget.

The policy keeps two upper confidence bounds per arm (one on the reward
signal, one on the cost signal) and switches between three modes depending
on whether the empirical violation rate over completed rounds is within the
current budget.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Literal, Sequence

Signal = Literal["reward", "cost"]


class Mode(str, enum.Enum):
    """Branch of the decision rule that produced an action."""

    EXPLORE = "Explore"
    SAFE_EXPLORE = "SafeExplore"
    MIN_VIOLATION = "MinViolation"


@dataclass
class ArmStats:
    """Play count plus running totals of reward and cost feedback for one arm."""

    play_count: int = 0
    reward_sum: float = 0.0
    cost_sum: float = 0.0

    def mean(self, which: Signal) -> float:
        if self.play_count == 0:
            return 0.0
        total = self.reward_sum if which == "reward" else self.cost_sum
        return total / self.play_count


@dataclass(frozen=True)
class BudgetSchedule:
    """Violation budget that starts at ``delta0`` and reaches zero after ``budget_horizon`` rounds."""

    delta0: float
    budget_horizon: int

    def __post_init__(self) -> None:
        if not 0.0 < self.delta0 < 1.0:
            raise ValueError(f"delta0 must lie in (0, 1), got {self.delta0}")
        if self.budget_horizon < 1:
            raise ValueError(f"budget_horizon must be positive, got {self.budget_horizon}")


@dataclass
class ViolationLedger:
    """Counts of completed rounds and of those that violated the threshold."""

    rounds_seen: int = 0
    violation_count: int = 0


@dataclass(frozen=True)
class PolicyDecision:
    arm: int
    mode: Mode


def ucb_index(stats: ArmStats, t: int, which: Signal, scale: float = 1.0) -> float:
    """Empirical mean plus ``scale * sqrt(2 ln t / N)``; ``+inf`` for an arm never played."""
    if stats.play_count == 0:
        return math.inf
    return stats.mean(which) + scale * math.sqrt(2.0 * math.log(t) / stats.play_count)


def budget_at(schedule: BudgetSchedule, t: int) -> float:
    """Permissible violation rate at round ``t`` (1-based), clamped at zero."""
    return max(0.0, schedule.delta0 * (1.0 - (t - 1) / schedule.budget_horizon))


def violation_rate(ledger: ViolationLedger) -> float:
    """Fraction of completed rounds that violated; 0 before any round completes."""
    if ledger.rounds_seen == 0:
        return 0.0
    return ledger.violation_count / ledger.rounds_seen


def _argmax(values: Sequence[float], candidates: Sequence[int]) -> int:
    # strict comparison keeps the lowest index on ties
    best = candidates[0]
    for a in candidates[1:]:
        if values[a] > values[best]:
            best = a
    return best


def _argmin(values: Sequence[float], candidates: Sequence[int]) -> int:
    best = candidates[0]
    for a in candidates[1:]:
        if values[a] < values[best]:
            best = a
    return best


def select_action(
    stats: Sequence[ArmStats],
    t: int,
    threshold: float,
    schedule: BudgetSchedule,
    ledger: ViolationLedger,
    exploration_scale: float = 1.0,
) -> PolicyDecision:
    """Pick an arm for round ``t`` given the issued cost threshold.

    Explores for reward while the empirical violation rate is within budget.
    Otherwise restricts to arms whose cost UCB is at most ``threshold`` and
    takes the best reward UCB among them, falling back to the smallest cost
    UCB when no arm qualifies. Ties go to the lowest arm index.

    ``exploration_scale`` multiplies the confidence bonus of both indices;
    1.0 is the textbook ``sqrt(2 ln t / N)`` bonus.
    """
    if not stats:
        raise ValueError("select_action needs at least one arm")
    arms = range(len(stats))
    ucb_r = [ucb_index(s, t, "reward", exploration_scale) for s in stats]
    if violation_rate(ledger) <= budget_at(schedule, t):
        return PolicyDecision(_argmax(ucb_r, arms), Mode.EXPLORE)

    ucb_c = [ucb_index(s, t, "cost", exploration_scale) for s in stats]
    feasible = [a for a in arms if ucb_c[a] <= threshold]
    if feasible:
        return PolicyDecision(_argmax(ucb_r, feasible), Mode.SAFE_EXPLORE)
    return PolicyDecision(_argmin(ucb_c, arms), Mode.MIN_VIOLATION)


def record_feedback(
    stats: ArmStats,
    ledger: ViolationLedger,
    reward: float,
    cost: float,
    threshold: float,
) -> bool:
    """Fold one round of feedback into the played arm and the ledger.

    Returns whether the round violated (``cost > threshold``, strictly).
    """
    stats.play_count += 1
    stats.reward_sum += reward
    stats.cost_sum += cost
    violated = cost > threshold
    ledger.rounds_seen += 1
    if violated:
        ledger.violation_count += 1
    return violated


@dataclass
class BudgetedUCB:
    """Stateful wrapper around :func:`select_action` / :func:`record_feedback`.

    Exposes the common policy interface used by the experiment harness:
    ``select(t, threshold)`` followed by ``update(arm, reward, cost, threshold)``.
    The mode behind the latest choice is kept in ``last_mode``.
    """

    num_arms: int
    schedule: BudgetSchedule
    stats: list[ArmStats] = field(default_factory=list)
    ledger: ViolationLedger = field(default_factory=ViolationLedger)
    last_mode: Mode | None = None
    exploration_scale: float = 1.0

    name = "budgeted_ucb"

    def __post_init__(self) -> None:
        if self.num_arms < 1:
            raise ValueError("BudgetedUCB needs at least one arm")
        if not self.exploration_scale >= 0:
            raise ValueError("exploration_scale must be nonnegative")
        if not self.stats:
            self.stats = [ArmStats() for _ in range(self.num_arms)]

    def select(self, t: int, threshold: float) -> int:
        decision = select_action(
            self.stats, t, threshold, self.schedule, self.ledger, self.exploration_scale
        )
        self.last_mode = decision.mode
        return decision.arm

    def update(self, arm: int, reward: float, cost: float, threshold: float) -> None:
        record_feedback(self.stats[arm], self.ledger, reward, cost, threshold)

    def snapshot(self) -> dict[str, float | int]:
        """Flat key-value view of the state, stable across runs for golden files."""
        snap: dict[str, float | int] = {
            "rounds_seen": self.ledger.rounds_seen,
            "violation_count": self.ledger.violation_count,
        }
        for a, s in enumerate(self.stats):
            snap[f"arm{a}.play_count"] = s.play_count
            snap[f"arm{a}.reward_sum"] = s.reward_sum
            snap[f"arm{a}.cost_sum"] = s.cost_sum
        return snap

    @classmethod
    def from_snapshot(
        cls, snap: dict[str, float | int], schedule: BudgetSchedule, exploration_scale: float = 1.0
    ) -> "BudgetedUCB":
        num_arms = sum(1 for k in snap if k.endswith(".play_count"))
        stats = [
            ArmStats(
                int(snap[f"arm{a}.play_count"]),
                float(snap[f"arm{a}.reward_sum"]),
                float(snap[f"arm{a}.cost_sum"]),
            )
            for a in range(num_arms)
        ]
        ledger = ViolationLedger(int(snap["rounds_seen"]), int(snap["violation_count"]))
        return cls(num_arms, schedule, stats, ledger, exploration_scale=exploration_scale)
