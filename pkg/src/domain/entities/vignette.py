"""Clinical case data model: entities, the category registry and vignettes."""
from dataclasses import dataclass, field
from enum import Enum
from typing import Dict, Iterator, Optional, Tuple

from src.domain.exceptions import CaseValidationError

DEFAULT_CATEGORIES: Tuple[Tuple[str, float], ...] = (
    ("symptom", 1.0),
    ("temporal_pattern", 0.9),
    ("severity", 0.8),
    ("location", 0.8),
    ("quality_character", 0.7),
    ("aggravating_factor", 0.7),
    ("alleviating_factor", 0.7),
    ("associated_symptom", 0.9),
    ("medical_history", 0.8),
    ("medication", 0.6),
)


class Sex(Enum):
    """Enumeration of recorded patient sex."""
    FEMALE = "female"
    MALE = "male"
    OTHER = "other"


@dataclass(frozen=True)
class CategoryRegistry:
    """Ordered category labels with their clinical importance weights w_c."""
    categories: Tuple[Tuple[str, float], ...] = DEFAULT_CATEGORIES

    def __post_init__(self):
        if len(self.categories) < 1:
            raise CaseValidationError("category registry needs at least one category")
        labels = [label for label, _ in self.categories]
        if len(set(labels)) != len(labels):
            raise CaseValidationError(f"category labels must be unique: {labels}")
        for label, weight in self.categories:
            if not label.strip():
                raise CaseValidationError("category labels must be non-empty")
            if not (0.0 < weight <= 2.0):
                raise CaseValidationError(
                    f"category {label!r} weight must lie in (0, 2], got {weight}"
                )

    @property
    def labels(self) -> Tuple[str, ...]:
        return tuple(label for label, _ in self.categories)

    def weight(self, label: str) -> float:
        for name, weight in self.categories:
            if name == label:
                return weight
        raise CaseValidationError(f"unknown category {label!r}")

    def index(self, label: str) -> int:
        try:
            return self.labels.index(label)
        except ValueError:
            raise CaseValidationError(f"unknown category {label!r}") from None

    def __contains__(self, label: object) -> bool:
        return label in self.labels

    def __len__(self) -> int:
        return len(self.categories)

    def __iter__(self) -> Iterator[str]:
        return iter(self.labels)


@dataclass(frozen=True)
class ClinicalEntity:
    """An atomic clinical fact pre-extracted from a ground-truth HPI."""
    id: str
    surface: str
    category: str
    importance_weight: float = 1.0
    aliases: Tuple[str, ...] = ()

    def __post_init__(self):
        if not self.id:
            raise CaseValidationError("entity id is required")
        if not self.surface.strip():
            raise CaseValidationError(f"entity {self.id}: surface must be non-empty")
        if self.importance_weight <= 0:
            raise CaseValidationError(f"entity {self.id}: importance_weight must be > 0")

    @property
    def phrases(self) -> Tuple[str, ...]:
        """Surface followed by its aliases."""
        return (self.surface,) + tuple(self.aliases)


@dataclass(frozen=True)
class VignetteCase:
    """A patient case: demographics, ground-truth HPI and its entity set E."""
    case_id: str
    age: int
    sex: Sex
    chief_complaint: str
    hpi_text: str
    entities: Tuple[ClinicalEntity, ...]
    ground_truth_statements: Optional[Tuple[str, ...]] = None
    _by_id: Dict[str, ClinicalEntity] = field(default_factory=dict, init=False, repr=False, compare=False)

    def __post_init__(self):
        if not self.case_id:
            raise CaseValidationError("case_id is required")
        if not self.entities:
            raise CaseValidationError(f"case {self.case_id}: entities must be non-empty")
        seen = {}
        for entity in self.entities:
            if entity.id in seen:
                raise CaseValidationError(
                    f"case {self.case_id}: duplicate entity id {entity.id!r}"
                )
            seen[entity.id] = entity
        object.__setattr__(self, "_by_id", seen)

    def entity(self, entity_id: str) -> ClinicalEntity:
        return self._by_id[entity_id]

    @property
    def entity_ids(self) -> Tuple[str, ...]:
        return tuple(entity.id for entity in self.entities)
