"""HPI evaluation data model."""
from dataclasses import dataclass
from enum import Enum
from typing import Tuple


class StatementSource(Enum):
    GENERATED = "generated"
    GROUND_TRUTH = "ground_truth"


@dataclass(frozen=True)
class AtomicStatement:
    """A single self-contained clinical fact."""
    text: str
    source: StatementSource

    def __post_init__(self):
        if not self.text.strip():
            raise ValueError("atomic statements must be non-empty")


@dataclass(frozen=True)
class EvalResult:
    """Precision/recall/F1 of one generated HPI against its ground truth."""
    precision: float
    recall: float
    f1: float
    matched_pairs: Tuple[Tuple[int, int], ...]
    unmatched_generated: Tuple[int, ...]
    unmatched_truth: Tuple[int, ...]
