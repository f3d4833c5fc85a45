"""
Per-question reward scoring.

Combines coverage-probability estimation, information gain and the quality
assessor into the scalar reward a candidate question earns before the
patient answers.
"""
from typing import Dict, Sequence, Tuple

from src.application.services import IEmbeddingProvider, IQualityAssessor
from src.application.services.infogain import estimate_all, information_gain
from src.application.services.quality import combine_reward
from src.domain.entities import (
    ClinicalEntity,
    CoverageState,
    RewardBreakdown,
    UncoveredDigest,
)
from src.domain.exceptions import IgftError, RewardComputationError
from src.domain.value_objects import RewardSettings


def realized_gain(revealed_ids: Tuple[str, ...], coverage: CoverageState) -> float:
    """Weighted bits actually resolved by one answer (one bit per revealed entity)."""
    weights: Dict[str, float] = {e.id: e.importance_weight for e in coverage.all_entities}
    return sum(weights[entity_id] for entity_id in revealed_ids)


class RewardScorer:
    """Scores candidate questions against a coverage state."""

    def __init__(
        self,
        provider: IEmbeddingProvider,
        assessor: IQualityAssessor,
        settings: RewardSettings = RewardSettings(),
    ):
        self.provider = provider
        self.assessor = assessor
        self.settings = settings

    def _gain(self, question: str, coverage: CoverageState):
        uncovered: Tuple[ClinicalEntity, ...] = coverage.uncovered
        probabilities = estimate_all(
            uncovered,
            question,
            self.provider,
            self.assessor,
            self.settings.weights,
            self.settings.clip,
        )
        gain = information_gain(uncovered, probabilities)
        digest = UncoveredDigest(
            uncovered=uncovered,
            all_entities=coverage.all_entities,
            predicted=probabilities.as_mapping(),
        )
        return probabilities, gain, digest

    def score(self, question: str, coverage: CoverageState, conversation: str = "") -> RewardBreakdown:
        return self.score_many([question], coverage, conversation)[0]

    def score_many(
        self, questions: Sequence[str], coverage: CoverageState, conversation: str = ""
    ) -> Tuple[RewardBreakdown, ...]:
        # Duplicate questions are scored independently.
        signals = [self._gain(question, coverage) for question in questions]
        try:
            qualities = self.assessor.assess_many(list(questions), conversation, [d for _, _, d in signals])
        except RewardComputationError:
            raise
        except IgftError as exc:
            raise RewardComputationError(f"quality assessment failed: {exc}") from exc
        return tuple(
            combine_reward(
                gain.weighted_ig,
                quality,
                self.settings.quality_lambda,
                gain=gain,
                probabilities=probabilities,
            )
            for (probabilities, gain, _), quality in zip(signals, qualities)
        )
