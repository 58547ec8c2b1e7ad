"""Experiment configuration and its flat ``key = value`` text form."""

from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass, field
from pathlib import Path

from .environment import ScheduleKind

POLICY_NAMES = ("budgeted_ucb", "ucb1", "thompson", "epsilon_greedy", "virtual_queue")


class ConfigError(ValueError):
    """Invalid configuration; ``field`` names the offending key."""

    def __init__(self, field: str, message: str):
        super().__init__(f"{field}: {message}")
        self.field = field


@dataclass
class ExperimentConfig:
    horizon: int = 2000
    num_arms: int = 11
    delta0: float = 0.5
    budget_horizon: int | None = None  # None means "same as horizon"
    schedule: ScheduleKind = ScheduleKind.UNIFORM_RANDOM
    penalty: float = 1e6
    seeds: list[int] = field(default_factory=lambda: [0, 1, 2, 3, 4])
    policies: list[str] = field(default_factory=lambda: list(POLICY_NAMES))
    bandwidth: float = 1e6
    noise_density: float = 1e-9
    distance: float = 10.0
    pathloss_exponent: float = 3.0
    p_min: float = 0.1
    p_max: float = 1.0
    epsilon: float = 0.1
    sigma0: float | None = None  # None means "largest achievable rate"
    queue_penalty_weight: float = 1.0
    reward_noise_std: float = 0.0
    exploration_scale: float = 1.0  # Budgeted UCB confidence-bonus multiplier

    @property
    def effective_budget_horizon(self) -> int:
        return self.horizon if self.budget_horizon is None else self.budget_horizon

    def validate(self) -> "ExperimentConfig":
        if self.horizon < 1:
            raise ConfigError("horizon", "must be a positive integer")
        if self.num_arms < 2:
            raise ConfigError("num_arms", "need at least two power levels")
        if not 0.0 < self.delta0 < 1.0:
            raise ConfigError("delta0", "must lie strictly between 0 and 1")
        if self.budget_horizon is not None and not 1 <= self.budget_horizon <= self.horizon:
            raise ConfigError("budget_horizon", "must lie in 1..horizon")
        if not isinstance(self.schedule, ScheduleKind):
            raise ConfigError("schedule", f"unknown schedule {self.schedule!r}")
        if not (self.penalty >= 0 and math.isfinite(self.penalty)):
            raise ConfigError("penalty", "must be finite and nonnegative")
        if len(set(self.seeds)) != len(self.seeds) or any(s < 0 for s in self.seeds):
            raise ConfigError("seeds", "must be distinct nonnegative integers")
        unknown = [p for p in self.policies if p not in POLICY_NAMES]
        if unknown:
            raise ConfigError("policies", f"unknown policy {unknown[0]!r}; choose from {', '.join(POLICY_NAMES)}")
        if len(set(self.policies)) != len(self.policies):
            raise ConfigError("policies", "listed twice")
        for name in ("bandwidth", "noise_density", "distance", "pathloss_exponent", "p_min", "queue_penalty_weight"):
            if not getattr(self, name) > 0:
                raise ConfigError(name, "must be strictly positive")
        if not self.p_max > self.p_min:
            raise ConfigError("p_max", "must exceed p_min")
        if not 0.0 <= self.epsilon <= 1.0:
            raise ConfigError("epsilon", "must lie in [0, 1]")
        if self.sigma0 is not None and not (self.sigma0 > 0 and math.isfinite(self.sigma0)):
            raise ConfigError("sigma0", "must be finite and strictly positive")
        if not self.reward_noise_std >= 0:
            raise ConfigError("reward_noise_std", "must be nonnegative")
        if not (self.exploration_scale >= 0 and math.isfinite(self.exploration_scale)):
            raise ConfigError("exploration_scale", "must be finite and nonnegative")
        return self

    def to_text(self) -> str:
        lines = []
        for f in dataclasses.fields(self):
            lines.append(f"{f.name} = {_format_value(getattr(self, f.name))}")
        return "\n".join(lines) + "\n"

    @classmethod
    def from_text(cls, text: str) -> "ExperimentConfig":
        """Parse ``key = value`` lines; ``#`` starts a comment. Unknown keys are errors."""
        kwargs = {}
        for lineno, raw in enumerate(text.splitlines(), 1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ConfigError(f"line {lineno}", f"expected 'key = value', got {raw!r}")
            key, value = (part.strip() for part in line.split("=", 1))
            if key not in _PARSERS:
                raise ConfigError(key, "unknown configuration key")
            try:
                kwargs[key] = _PARSERS[key](value)
            except ValueError as exc:
                raise ConfigError(key, f"cannot parse {value!r} ({exc})") from None
        return cls(**kwargs).validate()

    @classmethod
    def load(cls, path: str | Path) -> "ExperimentConfig":
        return cls.from_text(Path(path).read_text(encoding="utf-8"))


def _format_value(value) -> str:
    if value is None:
        return "auto"
    if isinstance(value, ScheduleKind):
        return value.value
    if isinstance(value, float):
        return format_float(value)
    if isinstance(value, list):
        return ",".join(str(v) for v in value)
    return str(value)


def format_float(x: float) -> str:
    """17 significant digits: enough for an exact float round-trip."""
    return f"{x:.17g}"


def _optional(parse):
    def inner(text: str):
        return None if text.lower() in ("auto", "none", "") else parse(text)

    return inner


def _int_list(text: str) -> list[int]:
    return [int(v) for v in text.split(",") if v.strip()]


def _str_list(text: str) -> list[str]:
    return [v.strip() for v in text.split(",") if v.strip()]


_PARSERS = {
    "horizon": int,
    "num_arms": int,
    "delta0": float,
    "budget_horizon": _optional(int),
    "schedule": ScheduleKind,
    "penalty": float,
    "seeds": _int_list,
    "policies": _str_list,
    "bandwidth": float,
    "noise_density": float,
    "distance": float,
    "pathloss_exponent": float,
    "p_min": float,
    "p_max": float,
    "epsilon": float,
    "sigma0": _optional(float),
    "queue_penalty_weight": float,
    "reward_noise_std": float,
    "exploration_scale": float,
}
