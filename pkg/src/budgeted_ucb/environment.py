"""Battery-powered wireless transmitter choosing among discrete power levels.

Throughput follows the Shannon capacity of an AWGN link with distance-based
path loss; the energy cost of a round is simply the transmit power. Per-round
energy caps come from one of two schedules: i.i.d. uniform draws, or a
V-shaped linear ramp.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class WirelessLink:
    bandwidth: float = 1e6  # Hz
    noise_density: float = 1e-9  # W/Hz
    distance: float = 10.0  # m
    pathloss_exponent: float = 3.0

    def __post_init__(self) -> None:
        for name in ("bandwidth", "noise_density", "distance", "pathloss_exponent"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be strictly positive")

    @property
    def gain(self) -> float:
        return self.distance ** (-self.pathloss_exponent)


@dataclass(frozen=True)
class PowerGrid:
    p_min: float = 0.1  # W
    p_max: float = 1.0  # W
    num_levels: int = 11

    def __post_init__(self) -> None:
        if self.num_levels < 2:
            raise ValueError(f"num_levels must be at least 2, got {self.num_levels}")
        if not 0 < self.p_min < self.p_max:
            raise ValueError("power grid needs 0 < p_min < p_max")

    @property
    def step(self) -> float:
        return (self.p_max - self.p_min) / (self.num_levels - 1)

    def level(self, arm: int) -> float:
        if not 0 <= arm < self.num_levels:
            raise IndexError(f"arm {arm} outside 0..{self.num_levels - 1}")
        if arm == self.num_levels - 1:
            return self.p_max
        return self.p_min + arm * self.step


def throughput(link: WirelessLink, power: float) -> float:
    """Shannon rate ``B log2(1 + P g / (N0 B))`` in bits/s."""
    if not power > 0:
        raise ValueError(f"transmit power must be positive, got {power}")
    snr = power * link.gain / (link.noise_density * link.bandwidth)
    return link.bandwidth * math.log2(1.0 + snr)


def power_levels(grid: PowerGrid) -> list[float]:
    return [grid.level(a) for a in range(grid.num_levels)]


class ScheduleKind(str, enum.Enum):
    UNIFORM_RANDOM = "random"
    LINEAR_V_SHAPE = "linear"


@dataclass(frozen=True)
class ConstraintSchedule:
    kind: ScheduleKind
    low: float
    high: float
    horizon: int

    def __post_init__(self) -> None:
        if not self.low <= self.high:
            raise ValueError("constraint schedule needs low <= high")
        if self.horizon < 1:
            raise ValueError("constraint schedule horizon must be positive")


def threshold_at(schedule: ConstraintSchedule, t: int, rng: np.random.Generator | None = None) -> float:
    """Energy cap issued at round ``t`` (1-based).

    The V-shaped ramp falls from ``high`` at t=1 to ``low`` at t=ceil(T/2)
    and climbs back to ``high`` at t=T. The uniform schedule draws one value
    from ``rng`` per call.
    """
    if not 1 <= t <= schedule.horizon:
        raise ValueError(f"round {t} outside 1..{schedule.horizon}")
    lo, hi = schedule.low, schedule.high
    if schedule.kind is ScheduleKind.UNIFORM_RANDOM:
        if rng is None:
            raise ValueError("uniform thresholds need a random stream")
        return float(rng.uniform(lo, hi))

    mid = math.ceil(schedule.horizon / 2)
    if t <= mid:
        span = mid - 1
        frac = (t - 1) / span if span > 0 else 0.0
        return hi - (hi - lo) * frac
    span = schedule.horizon - mid
    return lo + (hi - lo) * (t - mid) / span


@dataclass(frozen=True)
class RoundRecord:
    """One row of a run trace.

    ``mode`` is ``None`` for policies without modes; ``budget`` and
    ``empirical_rate`` are the budget and the violation rate over completed
    rounds seen at decision time.
    """

    t: int
    threshold: float
    arm: int
    reward: float
    cost: float
    violated: bool
    mode: str | None
    budget: float
    empirical_rate: float


class WirelessEnvironment:
    """Wires a link, a power grid and a cap schedule behind a seeded stream.

    Thresholds and feedback noise use separate child streams so that the
    threshold sequence depends only on the seed, never on the arms played.
    """

    def __init__(
        self,
        link: WirelessLink,
        grid: PowerGrid,
        schedule: ConstraintSchedule,
        seed: int | np.random.SeedSequence = 0,
        reward_noise_std: float = 0.0,
    ):
        if reward_noise_std < 0:
            raise ValueError("reward_noise_std must be nonnegative")
        self.link = link
        self.grid = grid
        self.schedule = schedule
        self.reward_noise_std = reward_noise_std
        ss = seed if isinstance(seed, np.random.SeedSequence) else np.random.SeedSequence(seed)
        threshold_ss, noise_ss = ss.spawn(2)
        self._threshold_rng = np.random.default_rng(threshold_ss)
        self._noise_rng = np.random.default_rng(noise_ss)
        self.levels = power_levels(grid)
        self.rates = [throughput(link, p) for p in self.levels]
        if any(b <= a for a, b in zip(self.rates, self.rates[1:])):
            raise AssertionError("throughput must be strictly increasing across power levels")

    @property
    def num_arms(self) -> int:
        return self.grid.num_levels

    def threshold(self, t: int) -> float:
        return threshold_at(self.schedule, t, self._threshold_rng)

    def thresholds(self) -> list[float]:
        """The full cap sequence; consumes the threshold stream."""
        return [self.threshold(t) for t in range(1, self.schedule.horizon + 1)]

    def step(self, arm: int) -> tuple[float, float]:
        """Feedback ``(reward, cost)`` for playing ``arm``."""
        if not 0 <= arm < self.num_arms:
            raise IndexError(f"arm {arm} outside 0..{self.num_arms - 1}")
        reward = self.rates[arm]
        if self.reward_noise_std > 0:
            reward += float(self._noise_rng.normal(0.0, self.reward_noise_std))
        return reward, self.levels[arm]


def step(
    link: WirelessLink,
    grid: PowerGrid,
    arm: int,
    rng: np.random.Generator | None = None,
    reward_noise_std: float = 0.0,
) -> tuple[float, float]:
    """Stateless one-shot feedback for ``arm``; noise only when ``reward_noise_std > 0``."""
    power = grid.level(arm)
    reward = throughput(link, power)
    if reward_noise_std > 0:
        if rng is None:
            raise ValueError("noisy feedback needs a random stream")
        reward += float(rng.normal(0.0, reward_noise_std))
    return reward, power
