"""
Information-gain reward.

Each uncovered entity is a binary variable (revealed or not). Before a
question the entropy is |U_t| bits; after it, the expected entropy is the
sum of binary entropies of p(e|a_t). The gain is their difference, and
the weighted gain scales each entity's share by its category weight w_c.
All logarithms are base 2.
"""
import math
from typing import Dict, Iterable, Optional, Sequence

from src.application.services import IEmbeddingProvider, IQualityAssessor
from src.application.services.coverage import cosine_similarity
from src.domain.entities import (
    ClinicalEntity,
    CoverageEstimate,
    CoverageProbabilities,
    GainBreakdown,
)
from src.domain.exceptions import (
    ContractViolationError,
    DomainValueError,
    IgftError,
    RewardComputationError,
)
from src.domain.value_objects import ClipBounds, MixtureWeights
from src.shared.text import keyword_overlap


def binary_entropy(p: float) -> float:
    """-p log2 p - (1-p) log2 (1-p), with 0 log 0 = 0."""
    if not (0.0 <= p <= 1.0) or math.isnan(p):
        raise DomainValueError(f"probability must lie in [0, 1], got {p}")
    if p == 0.0 or p == 1.0:
        return 0.0
    return -p * math.log2(p) - (1.0 - p) * math.log2(1.0 - p)


def entity_gain(p: float) -> float:
    """Expected entropy reduction of one entity starting from maximal uncertainty."""
    return 1.0 - binary_entropy(p)


def mix_coverage_signals(
    sem: float,
    llm: float,
    key: float,
    weights: MixtureWeights,
    clip: ClipBounds,
) -> float:
    p = weights.alpha * sem + weights.beta * llm + weights.gamma * key
    return clip.clip(p)


def _estimate(
    entity: ClinicalEntity,
    question: str,
    sem: float,
    llm: float,
    weights: MixtureWeights,
    clip: ClipBounds,
) -> CoverageEstimate:
    sem = min(max(sem, 0.0), 1.0)
    llm = min(max(llm, 0.0), 1.0)
    key = keyword_overlap(entity.surface, question)
    p = mix_coverage_signals(sem, llm, key, weights, clip)
    return CoverageEstimate(entity_id=entity.id, p=p, sem=sem, llm=llm, key=key)


def _signal_failure(exc: Exception, entity_id: Optional[str] = None) -> RewardComputationError:
    if isinstance(exc, RewardComputationError):
        return exc
    if isinstance(exc, IgftError):
        return RewardComputationError(str(exc), entity_id=entity_id)
    return RewardComputationError(f"coverage signal failed: {exc}", entity_id=entity_id)


def estimate_coverage_probability(
    entity: ClinicalEntity,
    question: str,
    provider: IEmbeddingProvider,
    assessor: IQualityAssessor,
    weights: MixtureWeights = MixtureWeights(),
    clip: ClipBounds = ClipBounds(),
) -> CoverageEstimate:
    """p(e|a_t) as a clipped convex mix of semantic, assessor and keyword signals."""
    try:
        sem = cosine_similarity(provider.embed(question), provider.embed(entity.surface))
        llm = float(assessor.relevance(entity, question))
    except Exception as exc:
        raise _signal_failure(exc, entity.id) from exc
    return _estimate(entity, question, sem, llm, weights, clip)


def estimate_all(
    uncovered: Iterable[ClinicalEntity],
    question: str,
    provider: IEmbeddingProvider,
    assessor: IQualityAssessor,
    weights: MixtureWeights = MixtureWeights(),
    clip: ClipBounds = ClipBounds(),
) -> CoverageProbabilities:
    """Estimates for every uncovered entity, with one batched call per signal source."""
    uncovered = tuple(uncovered)
    if not uncovered:
        return CoverageProbabilities(estimates={}, weights=weights)
    try:
        question_vector, *surface_vectors = provider.embed_many([question] + [e.surface for e in uncovered])
        relevances = assessor.relevance_many(uncovered, question)
        sems = [cosine_similarity(question_vector, vector) for vector in surface_vectors]
        llms = [float(value) for value in relevances]
    except Exception as exc:
        entity_id = uncovered[0].id if len(uncovered) == 1 else None
        raise _signal_failure(exc, entity_id) from exc
    if len(llms) != len(uncovered):
        raise ContractViolationError(f"assessor returned {len(llms)} relevances for {len(uncovered)} entities")
    estimates = {
        entity.id: _estimate(entity, question, sem, llm, weights, clip)
        for entity, sem, llm in zip(uncovered, sems, llms)
    }
    return CoverageProbabilities(estimates=estimates, weights=weights)


def information_gain(
    uncovered: Sequence[ClinicalEntity],
    probs: CoverageProbabilities,
) -> GainBreakdown:
    """Prior, conditional entropy and (weighted) information gain of a question."""
    expected = {entity.id for entity in uncovered}
    given = set(probs.estimates)
    if expected != given:
        missing = sorted(expected - given)
        extra = sorted(given - expected)
        raise ContractViolationError(
            f"probabilities must cover exactly U_t (missing={missing}, extra={extra})"
        )

    prior = float(len(uncovered))
    conditional = 0.0
    per_category: Dict[str, float] = {}
    weighted = 0.0
    for entity in uncovered:
        h = binary_entropy(probs.p(entity.id))
        conditional += h
        gain = 1.0 - h
        per_category[entity.category] = per_category.get(entity.category, 0.0) + gain
        weighted += entity.importance_weight * gain
    return GainBreakdown(
        prior_entropy=prior,
        conditional_entropy=conditional,
        per_category_ig=per_category,
        weighted_ig=weighted,
    )
