"""Entity coverage: detection results and the covered/uncovered partition."""
from dataclasses import dataclass, field
from enum import Enum
from typing import Dict, Tuple

from src.domain.entities.vignette import ClinicalEntity
from src.domain.exceptions import ContractViolationError


class DetectionMethod(Enum):
    """How an entity was found in a patient utterance, in precedence order."""
    EXACT = "exact"
    MULTIWORD = "multiword"
    SEMANTIC = "semantic"


@dataclass(frozen=True)
class MatchResult:
    """One entity revealed by an utterance."""
    entity_id: str
    method: DetectionMethod
    score: float

    def __post_init__(self):
        if not (0.0 <= self.score <= 1.0):
            raise ContractViolationError(f"match score must lie in [0, 1], got {self.score}")
        if self.method is DetectionMethod.EXACT and self.score != 1.0:
            raise ContractViolationError("exact matches carry score 1.0")


@dataclass(frozen=True)
class CoverageRecord:
    """Reveal provenance of a covered entity."""
    turn: int
    method: DetectionMethod


@dataclass(frozen=True)
class CoverageState:
    """Partition of E into covered C_t (with provenance) and uncovered U_t.

    ``uncovered`` is derived from ``covered`` so the partition holds by
    construction; it keeps the case order of ``all_entities``.
    """
    all_entities: Tuple[ClinicalEntity, ...]
    covered: Dict[str, CoverageRecord] = field(default_factory=dict)

    def __post_init__(self):
        known = {entity.id for entity in self.all_entities}
        unknown = set(self.covered) - known
        if unknown:
            raise ContractViolationError(f"covered ids not in E: {sorted(unknown)}")

    @classmethod
    def initial(cls, entities: Tuple[ClinicalEntity, ...]) -> "CoverageState":
        return cls(all_entities=tuple(entities), covered={})

    @property
    def uncovered(self) -> Tuple[ClinicalEntity, ...]:
        return tuple(e for e in self.all_entities if e.id not in self.covered)

    @property
    def uncovered_ids(self) -> Tuple[str, ...]:
        return tuple(e.id for e in self.uncovered)

    @property
    def covered_entities(self) -> Tuple[ClinicalEntity, ...]:
        """Covered entities ordered by reveal turn, then case order."""
        order = {e.id: i for i, e in enumerate(self.all_entities)}
        covered = [e for e in self.all_entities if e.id in self.covered]
        return tuple(sorted(covered, key=lambda e: (self.covered[e.id].turn, order[e.id])))

    @property
    def fraction_covered(self) -> float:
        return len(self.covered) / len(self.all_entities) if self.all_entities else 0.0

    @property
    def is_complete(self) -> bool:
        return len(self.covered) == len(self.all_entities)
