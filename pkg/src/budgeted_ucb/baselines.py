"""Comparison policies: unconstrained UCB1, Gaussian Thompson sampling,
epsilon-greedy, and a drift-plus-penalty virtual-queue policy.

All four share the interface of :class:`~budgeted_ucb.policy_core.BudgetedUCB`
(``select(t, threshold)`` then ``update(arm, reward, cost, threshold)``) so the
harness can drive any of them. Only the virtual-queue policy looks at the cost
feedback or the threshold.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .policy_core import ArmStats, _argmax, ucb_index


def _require_arms(stats: Sequence) -> None:
    if len(stats) == 0:
        raise ValueError("policy needs at least one arm")


def ucb1_select(stats: Sequence[ArmStats], t: int) -> int:
    """Arm with the largest reward UCB; unplayed arms first, lowest index on ties."""
    _require_arms(stats)
    return _argmax([ucb_index(s, t, "reward") for s in stats], range(len(stats)))


@dataclass
class GaussianPosterior:
    """Per-arm sampling distribution ``Normal(mean, sigma0 / sqrt(n))``.

    An arm with no observations is sampled from ``Normal(0, sigma0)``.
    """

    sigma0: float
    observation_count: int = 0
    reward_sum: float = 0.0

    def __post_init__(self) -> None:
        if not (self.sigma0 > 0 and math.isfinite(self.sigma0)):
            raise ValueError(f"sigma0 must be finite and positive, got {self.sigma0}")

    @property
    def mean_estimate(self) -> float:
        if self.observation_count == 0:
            return 0.0
        return self.reward_sum / self.observation_count

    @property
    def sampling_scale(self) -> float:
        return self.sigma0 / math.sqrt(max(self.observation_count, 1))

    def observe(self, reward: float) -> None:
        self.observation_count += 1
        self.reward_sum += reward


def thompson_select(posteriors: Sequence[GaussianPosterior], rng: np.random.Generator) -> int:
    """Draw one sample per arm and return the index of the largest."""
    _require_arms(posteriors)
    means = [p.mean_estimate for p in posteriors]
    scales = [p.sampling_scale for p in posteriors]
    samples = rng.normal(means, scales)
    return int(np.argmax(samples))


def epsilon_greedy_select(stats: Sequence[ArmStats], epsilon: float, rng: np.random.Generator) -> int:
    """Uniform arm with probability ``epsilon``, else the best empirical reward mean.

    Unplayed arms count as mean 0 in the greedy branch.
    """
    _require_arms(stats)
    if not 0.0 <= epsilon <= 1.0:
        raise ValueError(f"epsilon must lie in [0, 1], got {epsilon}")
    if rng.random() < epsilon:
        return int(rng.integers(len(stats)))
    return _argmax([s.mean("reward") for s in stats], range(len(stats)))


@dataclass
class VirtualQueue:
    penalty_weight: float = 1.0
    backlog: float = 0.0

    def __post_init__(self) -> None:
        if not self.penalty_weight > 0:
            raise ValueError("penalty_weight must be positive")
        if self.backlog < 0:
            raise ValueError("backlog must be nonnegative")


def virtual_queue_select(
    stats: Sequence[ArmStats], queue: VirtualQueue, threshold: float, t: int
) -> int:
    """Maximise ``UCB_r(a) - (Q / V) * mean_cost(a)``.

    ``threshold`` is accepted for interface symmetry; the current cap only
    enters through the backlog update.
    """
    _require_arms(stats)
    unplayed = [a for a, s in enumerate(stats) if s.play_count == 0]
    if unplayed:
        return unplayed[0]
    weight = queue.backlog / queue.penalty_weight
    if math.isinf(weight):
        # every UCB_r is finite here, so the penalty alone decides
        scores = [-s.mean("cost") for s in stats]
    else:
        scores = [ucb_index(s, t, "reward") - weight * s.mean("cost") for s in stats]
    return _argmax(scores, range(len(stats)))


def virtual_queue_update(queue: VirtualQueue, cost: float, threshold: float) -> VirtualQueue:
    """Backlog recursion ``Q <- max(0, Q + c - C)``; mutates and returns ``queue``."""
    queue.backlog = max(0.0, queue.backlog + cost - threshold)
    return queue


class UCB1Policy:
    name = "ucb1"
    last_mode = None

    def __init__(self, num_arms: int):
        if num_arms < 1:
            raise ValueError("policy needs at least one arm")
        self.stats = [ArmStats() for _ in range(num_arms)]

    def select(self, t: int, threshold: float) -> int:
        return ucb1_select(self.stats, t)

    def update(self, arm: int, reward: float, cost: float, threshold: float) -> None:
        s = self.stats[arm]
        s.play_count += 1
        s.reward_sum += reward
        s.cost_sum += cost


class ThompsonPolicy:
    name = "thompson"
    last_mode = None

    def __init__(self, num_arms: int, sigma0: float, rng: np.random.Generator):
        if num_arms < 1:
            raise ValueError("policy needs at least one arm")
        self.posteriors = [GaussianPosterior(sigma0) for _ in range(num_arms)]
        self.rng = rng

    def select(self, t: int, threshold: float) -> int:
        return thompson_select(self.posteriors, self.rng)

    def update(self, arm: int, reward: float, cost: float, threshold: float) -> None:
        self.posteriors[arm].observe(reward)


class EpsilonGreedyPolicy(UCB1Policy):
    name = "epsilon_greedy"

    def __init__(self, num_arms: int, epsilon: float, rng: np.random.Generator):
        super().__init__(num_arms)
        if not 0.0 <= epsilon <= 1.0:
            raise ValueError(f"epsilon must lie in [0, 1], got {epsilon}")
        self.epsilon = epsilon
        self.rng = rng

    def select(self, t: int, threshold: float) -> int:
        return epsilon_greedy_select(self.stats, self.epsilon, self.rng)


class VirtualQueuePolicy(UCB1Policy):
    name = "virtual_queue"

    def __init__(self, num_arms: int, penalty_weight: float = 1.0):
        super().__init__(num_arms)
        self.queue = VirtualQueue(penalty_weight)

    def select(self, t: int, threshold: float) -> int:
        return virtual_queue_select(self.stats, self.queue, threshold, t)

    def update(self, arm: int, reward: float, cost: float, threshold: float) -> None:
        super().update(arm, reward, cost, threshold)
        virtual_queue_update(self.queue, cost, threshold)
