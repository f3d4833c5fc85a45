"""Training-run records."""
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional

from src.domain.entities.policy import AdamState, PolicyParameters


@dataclass(frozen=True)
class StepMetrics:
    """One optimizer step of a training run."""
    epoch: int
    step: int
    mean_reward: float
    loss: float
    mean_episode_ig: float
    wall_ms: Optional[float] = None
    skipped: bool = False

    def to_record(self) -> Dict[str, Any]:
        return {
            "epoch": self.epoch,
            "step": self.step,
            "mean_reward": self.mean_reward,
            "loss": self.loss,
            "mean_episode_ig": self.mean_episode_ig,
            "wall_ms": self.wall_ms,
            "skipped": self.skipped,
        }

    @classmethod
    def from_record(cls, record: Dict[str, Any]) -> "StepMetrics":
        return cls(
            epoch=int(record["epoch"]),
            step=int(record["step"]),
            mean_reward=float(record["mean_reward"]),
            loss=float(record["loss"]),
            mean_episode_ig=float(record["mean_episode_ig"]),
            wall_ms=record.get("wall_ms"),
            skipped=bool(record.get("skipped", False)),
        )


@dataclass(frozen=True, eq=False)
class TrainingResult:
    params: PolicyParameters
    adam_state: AdamState
    next_epoch: int
    history: List[StepMetrics] = field(default_factory=list)
