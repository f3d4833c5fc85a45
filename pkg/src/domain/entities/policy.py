"""Policy parameters, optimizer state and GRPO groups."""
from dataclasses import dataclass
from typing import Any, Dict, Tuple

import numpy as np

from src.domain.exceptions import ContractViolationError


@dataclass(frozen=True, eq=False)
class PolicyParameters:
    """Weight matrix theta (M x F) and bias b (M) of the softmax question policy."""
    theta: np.ndarray
    bias: np.ndarray

    def __post_init__(self):
        if self.theta.ndim != 2 or self.bias.ndim != 1:
            raise ContractViolationError("theta must be 2-d and bias 1-d")
        if self.theta.shape[0] != self.bias.shape[0]:
            raise ContractViolationError(
                f"theta rows {self.theta.shape[0]} != bias length {self.bias.shape[0]}"
            )
        if not (np.all(np.isfinite(self.theta)) and np.all(np.isfinite(self.bias))):
            raise ContractViolationError("policy parameters must be finite")

    @classmethod
    def zeros(cls, n_actions: int, n_features: int) -> "PolicyParameters":
        return cls(np.zeros((n_actions, n_features)), np.zeros(n_actions))

    @property
    def n_actions(self) -> int:
        return self.theta.shape[0]

    @property
    def n_features(self) -> int:
        return self.theta.shape[1]

    def to_dict(self) -> Dict[str, Any]:
        return {"theta": self.theta.tolist(), "bias": self.bias.tolist()}

    @classmethod
    def from_dict(cls, payload: Dict[str, Any]) -> "PolicyParameters":
        return cls(
            np.asarray(payload["theta"], dtype=np.float64),
            np.asarray(payload["bias"], dtype=np.float64),
        )

    def equals(self, other: "PolicyParameters") -> bool:
        return np.array_equal(self.theta, other.theta) and np.array_equal(self.bias, other.bias)


@dataclass(frozen=True, eq=False)
class PolicyGradient:
    theta: np.ndarray
    bias: np.ndarray

    def is_finite(self) -> bool:
        return bool(np.all(np.isfinite(self.theta)) and np.all(np.isfinite(self.bias)))


@dataclass(frozen=True, eq=False)
class AdamState:
    """First/second moments and step count of the decoupled-decay optimizer."""
    m_theta: np.ndarray
    m_bias: np.ndarray
    v_theta: np.ndarray
    v_bias: np.ndarray
    step: int = 0

    @classmethod
    def zeros_like(cls, params: PolicyParameters) -> "AdamState":
        return cls(
            np.zeros_like(params.theta),
            np.zeros_like(params.bias),
            np.zeros_like(params.theta),
            np.zeros_like(params.bias),
            0,
        )

    def to_dict(self) -> Dict[str, Any]:
        return {
            "m_theta": self.m_theta.tolist(),
            "m_bias": self.m_bias.tolist(),
            "v_theta": self.v_theta.tolist(),
            "v_bias": self.v_bias.tolist(),
            "step": self.step,
        }

    @classmethod
    def from_dict(cls, payload: Dict[str, Any]) -> "AdamState":
        return cls(
            np.asarray(payload["m_theta"], dtype=np.float64),
            np.asarray(payload["m_bias"], dtype=np.float64),
            np.asarray(payload["v_theta"], dtype=np.float64),
            np.asarray(payload["v_bias"], dtype=np.float64),
            int(payload["step"]),
        )


@dataclass(frozen=True, eq=False)
class GroupSample:
    """K candidates drawn at one state with their rewards and ranking weights u."""
    features: np.ndarray
    actions: Tuple[int, ...]
    rewards: Tuple[float, ...]
    log_probs: Tuple[float, ...]
    weights: Tuple[float, ...]

    def __post_init__(self):
        k = len(self.actions)
        if not (len(self.rewards) == len(self.log_probs) == len(self.weights) == k):
            raise ContractViolationError("group fields must all have length K")
        if any(not w > 0 for w in self.weights) or abs(sum(self.weights) - 1.0) > 1e-9:
            raise ContractViolationError("ranking weights must be positive and sum to 1")

    @property
    def size(self) -> int:
        return len(self.actions)
