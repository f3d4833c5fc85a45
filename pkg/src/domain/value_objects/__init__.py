"""
Value objects for the IGFT desk trainer.

Small immutable settings bundles validated on construction. They are
built by the configuration layer and passed to the services.
"""
import math
from dataclasses import dataclass, field
from typing import Tuple

from src.domain.exceptions import ConfigError, DomainValueError


@dataclass(frozen=True)
class MixtureWeights:
    """Convex weights of the semantic, assessor and keyword coverage signals."""
    alpha: float = 1.0 / 3.0
    beta: float = 1.0 / 3.0
    gamma: float = 1.0 / 3.0

    def __post_init__(self):
        values = (self.alpha, self.beta, self.gamma)
        if any(v < 0 or not math.isfinite(v) for v in values):
            raise DomainValueError(f"mixture weights must be finite and >= 0, got {values}")
        if abs(sum(values) - 1.0) > 1e-9:
            raise DomainValueError(f"mixture weights must sum to 1.0, got {sum(values)!r}")

    def as_tuple(self) -> Tuple[float, float, float]:
        return (self.alpha, self.beta, self.gamma)


@dataclass(frozen=True)
class ClipBounds:
    """Probability interval coverage estimates are clipped into."""
    p_min: float = 0.05
    p_max: float = 0.95

    def __post_init__(self):
        if not (0.0 < self.p_min < self.p_max < 1.0):
            raise DomainValueError(
                f"clip bounds must satisfy 0 < p_min < p_max < 1, got ({self.p_min}, {self.p_max})"
            )

    def clip(self, p: float) -> float:
        return min(max(p, self.p_min), self.p_max)


@dataclass(frozen=True)
class RewardSettings:
    """Everything the per-question reward depends on besides the services."""
    weights: MixtureWeights = field(default_factory=MixtureWeights)
    clip: ClipBounds = field(default_factory=ClipBounds)
    quality_lambda: float = 0.5
    semantic_threshold: float = 0.85

    def __post_init__(self):
        if self.quality_lambda < 0:
            raise DomainValueError(f"quality lambda must be >= 0, got {self.quality_lambda}")
        if not (0.0 < self.semantic_threshold <= 1.0):
            raise DomainValueError(
                f"semantic threshold must lie in (0, 1], got {self.semantic_threshold}"
            )


@dataclass(frozen=True)
class SimulatorSettings:
    """Gradual-disclosure knobs of the rule-based patient and episode length."""
    disclosure_cap: int = 2
    reveal_threshold: float = 0.4
    max_turns: int = 8

    def __post_init__(self):
        if self.disclosure_cap < 1:
            raise DomainValueError("disclosure_cap must be >= 1")
        if not (0.0 <= self.reveal_threshold <= 1.0):
            raise DomainValueError("reveal_threshold must lie in [0, 1]")
        if self.max_turns < 1:
            raise DomainValueError("max_turns must be >= 1")


@dataclass(frozen=True)
class GrpoConfig:
    """Group size, ranking temperature, optimizer and schedule of a training run."""
    group_size: int = 2
    tau: float = 1.0
    learning_rate: float = 1e-4
    weight_decay: float = 0.01
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8
    batch_size: int = 8
    epochs: int = 150
    steps_per_epoch: int = 10
    discount: float = 1.0
    checkpoint_every: int = 10
    seed: int = 0

    def __post_init__(self):
        errors = []
        if self.tau <= 0:
            errors.append(f"grpo.tau: must be > 0, got {self.tau}")
        if self.group_size < 2:
            errors.append(f"grpo.group_size: must be >= 2, got {self.group_size}")
        for name in ("learning_rate", "weight_decay", "eps", "discount"):
            if getattr(self, name) < 0:
                errors.append(f"grpo.{name}: must be >= 0")
        for name in ("beta1", "beta2"):
            if not (0.0 <= getattr(self, name) < 1.0):
                errors.append(f"grpo.{name}: must lie in [0, 1)")
        for name in ("batch_size", "steps_per_epoch", "checkpoint_every"):
            if getattr(self, name) < 1:
                errors.append(f"grpo.{name}: must be >= 1")
        if self.epochs < 0:
            errors.append("grpo.epochs: must be >= 0")
        if errors:
            raise ConfigError(errors)
