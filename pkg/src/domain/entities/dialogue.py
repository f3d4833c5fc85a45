"""Self-play conversation data model: candidates, turns and trajectories."""
from dataclasses import dataclass, field, replace
from typing import List, Optional, Tuple

import numpy as np

from src.domain.entities.coverage import CoverageState
from src.domain.entities.rewards import RewardBreakdown
from src.domain.entities.vignette import VignetteCase


@dataclass(frozen=True, eq=False)
class QuestionCandidate:
    """One question drawn from a policy, with its log-probability and reward."""
    text: str
    log_prob: float = 0.0
    template_index: Optional[int] = None
    features: Optional[np.ndarray] = None
    reward: Optional[RewardBreakdown] = None

    def with_reward(self, reward: RewardBreakdown) -> "QuestionCandidate":
        return replace(self, reward=reward)


@dataclass(frozen=True)
class PatientReply:
    answer: str
    revealed: Tuple[str, ...] = ()


@dataclass(frozen=True)
class DialogueContext:
    """Everything a policy may condition on at the start of a turn."""
    case: VignetteCase
    coverage: CoverageState
    turn: int
    max_turns: int
    history: Tuple[Tuple[str, str], ...] = ()

    @property
    def last_answer_informative(self) -> bool:
        return bool(self.history) and any(
            record.turn == self.turn - 1 for record in self.coverage.covered.values()
        )


@dataclass(frozen=True, eq=False)
class Turn:
    """One question/answer exchange with its coverage snapshot and reward."""
    index: int
    question: str
    answer: str
    revealed: Tuple[str, ...]
    coverage: CoverageState
    reward: RewardBreakdown
    candidates: Tuple[QuestionCandidate, ...] = ()
    realized_gain: float = 0.0


@dataclass(frozen=True, eq=False)
class Trajectory:
    """A finished (or aborted) self-play episode."""
    case_id: str
    chief_complaint: str
    initial_coverage: CoverageState
    turns: Tuple[Turn, ...] = ()
    discount: float = 1.0
    aborted: bool = False

    @property
    def final_coverage(self) -> CoverageState:
        return self.turns[-1].coverage if self.turns else self.initial_coverage

    @property
    def rewards(self) -> List[float]:
        return [turn.reward.total for turn in self.turns]

    @property
    def total_reward(self) -> float:
        return sum((self.discount ** t) * r for t, r in enumerate(self.rewards))

    @property
    def episode_ig(self) -> float:
        """Realized information: sum of per-turn weighted revealed bits."""
        return sum(turn.realized_gain for turn in self.turns)

    def __len__(self) -> int:
        return len(self.turns)


@dataclass(frozen=True)
class TurnSample:
    """The state before one turn's question, as a training sample."""
    case_id: str
    turn_index: int
    state_text: str
    uncovered_ids: Tuple[str, ...] = field(default_factory=tuple)
