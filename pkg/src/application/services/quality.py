"""
Question quality scoring and reward combination.

The heuristic assessor scores the five quality dimensions from measurable
proxies so runs stay deterministic without a remote judge.
"""
from typing import Optional

from src.application.services import IEmbeddingProvider, IQualityAssessor
from src.application.services.coverage import best_keyword_overlap, cosine_similarity
from src.application.services.infogain import estimate_coverage_probability
from src.domain.entities import (
    ClinicalEntity,
    CoverageProbabilities,
    GainBreakdown,
    QualityScores,
    RewardBreakdown,
    UncoveredDigest,
)
from src.domain.exceptions import DomainValueError
from src.domain.value_objects import ClipBounds, MixtureWeights
from src.shared.text import STOPWORDS, important_words, tokenize

ENGAGEMENT_WORD_LIMIT = 30
CATEGORY_COSINE_FLOOR = 0.3


def _clamp(value: float) -> float:
    return min(max(value, 0.0), 1.0)


def category_phrase(label: str) -> str:
    return label.replace("_", " ")


class HeuristicQualityAssessor(IQualityAssessor):
    """Deterministic stand-in for an LLM quality judge."""

    def __init__(
        self,
        provider: IEmbeddingProvider,
        weights: MixtureWeights = MixtureWeights(),
        clip: ClipBounds = ClipBounds(),
    ):
        self.provider = provider
        self.weights = weights
        self.clip = clip

    def relevance(self, entity: ClinicalEntity, question: str) -> float:
        # No content words means no evidence at all; content words that miss
        # the entity leave it undecided at 0.5.
        if not important_words(question):
            return 0.0
        return 0.5 + 0.5 * best_keyword_overlap(entity, question)

    def assess(self, question: str, conversation: str, digest: UncoveredDigest) -> QualityScores:
        question_vector = self.provider.embed(question)
        return QualityScores(
            information_gathering=self._information_gathering(question, digest),
            specificity=self._specificity(question),
            patient_engagement=self._engagement(question),
            clinical_relevance=_clamp(max(
                (cosine_similarity(question_vector, self.provider.embed(e.surface))
                 for e in digest.all_entities),
                default=0.0,
            )),
            comprehensiveness=self._comprehensiveness(question_vector, digest),
            provenance="heuristic",
        )

    def _information_gathering(self, question: str, digest: UncoveredDigest) -> float:
        if not digest.uncovered:
            return 0.0
        best = 0.0
        for entity in digest.uncovered:
            p = digest.predicted.get(entity.id)
            if p is None:
                p = estimate_coverage_probability(
                    entity, question, self.provider, self, self.weights, self.clip
                ).p
            best = max(best, p)
        return _clamp(best)

    @staticmethod
    def _specificity(question: str) -> float:
        tokens = tokenize(question)
        if not tokens:
            return 0.0
        stops = sum(1 for token in tokens if token in STOPWORDS)
        return _clamp(1.0 - stops / len(tokens))

    @staticmethod
    def _engagement(question: str) -> float:
        n_words = len(tokenize(question))
        if n_words <= ENGAGEMENT_WORD_LIMIT:
            score = 1.0
        else:
            score = 1.0 - (n_words - ENGAGEMENT_WORD_LIMIT) / ENGAGEMENT_WORD_LIMIT
        if not question.rstrip().endswith("?"):
            score *= 0.5
        return _clamp(score)

    def _comprehensiveness(self, question_vector, digest: UncoveredDigest) -> float:
        categories = digest.uncovered_categories
        if not categories:
            return 0.0
        hits = sum(
            1
            for label in categories
            if cosine_similarity(question_vector, self.provider.embed(category_phrase(label)))
            > CATEGORY_COSINE_FLOOR
        )
        return _clamp(hits / len(categories))


def combine_reward(
    weighted_ig: float,
    scores: QualityScores,
    quality_lambda: float,
    gain: Optional[GainBreakdown] = None,
    probabilities: Optional[CoverageProbabilities] = None,
) -> RewardBreakdown:
    """r_t = weighted IG + lambda * aggregate quality."""
    if quality_lambda < 0:
        raise DomainValueError(f"quality lambda must be >= 0, got {quality_lambda}")
    return RewardBreakdown(
        weighted_ig=weighted_ig,
        quality=scores,
        quality_lambda=quality_lambda,
        gain=gain,
        probabilities=probabilities,
    )
