"""Reward data model: coverage probabilities, information gain and quality."""
from dataclasses import dataclass, field
from typing import Dict, Mapping, Optional, Tuple

from src.domain.entities.vignette import ClinicalEntity
from src.domain.exceptions import ContractViolationError
from src.domain.value_objects import MixtureWeights

QUALITY_DIMENSIONS: Tuple[str, ...] = (
    "information_gathering",
    "specificity",
    "patient_engagement",
    "clinical_relevance",
    "comprehensiveness",
)


@dataclass(frozen=True)
class CoverageEstimate:
    """p(e|a_t) for one uncovered entity with the signals it was mixed from."""
    entity_id: str
    p: float
    sem: float
    llm: float
    key: float


@dataclass(frozen=True)
class CoverageProbabilities:
    estimates: Dict[str, CoverageEstimate]
    weights: MixtureWeights = field(default_factory=MixtureWeights)

    def p(self, entity_id: str) -> float:
        return self.estimates[entity_id].p

    def as_mapping(self) -> Dict[str, float]:
        return {entity_id: est.p for entity_id, est in self.estimates.items()}


@dataclass(frozen=True)
class GainBreakdown:
    """Entropy accounting of one question against the uncovered set."""
    prior_entropy: float
    conditional_entropy: float
    per_category_ig: Dict[str, float]
    weighted_ig: float

    @property
    def ig(self) -> float:
        return self.prior_entropy - self.conditional_entropy


@dataclass(frozen=True)
class QualityScores:
    """Five quality dimensions in [0, 1]; aggregate is their mean."""
    information_gathering: float
    specificity: float
    patient_engagement: float
    clinical_relevance: float
    comprehensiveness: float
    provenance: str = "heuristic"

    def __post_init__(self):
        for name in QUALITY_DIMENSIONS:
            value = getattr(self, name)
            if not (0.0 <= value <= 1.0):
                raise ContractViolationError(f"quality {name} must lie in [0, 1], got {value}")

    @classmethod
    def from_mapping(cls, values: Mapping[str, float], provenance: str) -> "QualityScores":
        return cls(**{name: float(values[name]) for name in QUALITY_DIMENSIONS}, provenance=provenance)

    def as_dict(self) -> Dict[str, float]:
        return {name: getattr(self, name) for name in QUALITY_DIMENSIONS}

    @property
    def aggregate(self) -> float:
        return sum(self.as_dict().values()) / len(QUALITY_DIMENSIONS)


@dataclass(frozen=True)
class UncoveredDigest:
    """What an assessor sees of the coverage state.

    ``predicted`` optionally carries already-estimated p(e|a) per uncovered
    entity id so assessors need not recompute them.
    """
    uncovered: Tuple[ClinicalEntity, ...]
    all_entities: Tuple[ClinicalEntity, ...]
    predicted: Dict[str, float] = field(default_factory=dict)

    @property
    def key(self) -> str:
        return ",".join(sorted(entity.id for entity in self.uncovered))

    @property
    def uncovered_categories(self) -> Tuple[str, ...]:
        seen = []
        for entity in self.uncovered:
            if entity.category not in seen:
                seen.append(entity.category)
        return tuple(seen)


@dataclass(frozen=True)
class RewardBreakdown:
    """r_t = weighted IG + lambda * quality aggregate."""
    weighted_ig: float
    quality: QualityScores
    quality_lambda: float
    gain: Optional[GainBreakdown] = None
    probabilities: Optional[CoverageProbabilities] = None

    @property
    def quality_bonus(self) -> float:
        return self.quality_lambda * self.quality.aggregate

    @property
    def total(self) -> float:
        return self.weighted_ig + self.quality_bonus
