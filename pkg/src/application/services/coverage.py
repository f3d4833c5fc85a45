"""
Entity coverage detection and tracking.

An uncovered entity counts as revealed by a patient utterance when, in
precedence order, (1) its surface or an alias occurs as a whole phrase,
(2) all important words of its surface or of an alias occur, or (3) the
utterance embedding is closer than ``threshold`` to the surface embedding.
"""
import re
from dataclasses import replace
from functools import lru_cache
from typing import Iterable, List, Optional, Pattern

import numpy as np

from src.application.services import IEmbeddingProvider
from src.domain.entities import (
    ClinicalEntity,
    CoverageRecord,
    CoverageState,
    DetectionMethod,
    MatchResult,
)
from src.domain.exceptions import ContractViolationError, DomainValueError
from src.shared.text import important_words

DEFAULT_SEMANTIC_THRESHOLD = 0.85


def cosine_similarity(a: np.ndarray, b: np.ndarray) -> float:
    """Cosine of two vectors; 0.0 when either is the zero (non-embeddable) vector."""
    norm_a = float(np.linalg.norm(a))
    norm_b = float(np.linalg.norm(b))
    if norm_a == 0.0 or norm_b == 0.0:
        return 0.0
    return float(np.dot(a, b) / (norm_a * norm_b))


@lru_cache(maxsize=16384)
def _phrase_pattern(phrase: str) -> Pattern[str]:
    return re.compile(r"(?<!\w)" + re.escape(phrase.strip()) + r"(?!\w)", re.IGNORECASE)


def exact_match(entity: ClinicalEntity, text: str) -> bool:
    return any(_phrase_pattern(phrase).search(text) for phrase in entity.phrases if phrase.strip())


def multiword_match(entity: ClinicalEntity, text: str) -> bool:
    words = important_words(text)
    for phrase in entity.phrases:
        wanted = important_words(phrase)
        if wanted and wanted <= words:
            return True
    return False


def best_keyword_overlap(entity: ClinicalEntity, text: str) -> float:
    """Largest fraction of a phrase's important words present in ``text``."""
    words = important_words(text)
    best = 0.0
    for phrase in entity.phrases:
        wanted = important_words(phrase)
        if wanted:
            best = max(best, len(wanted & words) / len(wanted))
    return best


def detect_revealed(
    response: str,
    uncovered: Iterable[ClinicalEntity],
    provider: IEmbeddingProvider,
    threshold: float = DEFAULT_SEMANTIC_THRESHOLD,
) -> List[MatchResult]:
    """Entities of ``uncovered`` that ``response`` reveals, first method per entity."""
    if not (0.0 < threshold <= 1.0):
        raise DomainValueError(f"semantic threshold must lie in (0, 1], got {threshold}")
    if not response.strip():
        return []

    response_vector: Optional[np.ndarray] = None
    matches: List[MatchResult] = []
    seen = set()
    for entity in uncovered:
        if entity.id in seen:
            continue
        seen.add(entity.id)
        if exact_match(entity, response):
            matches.append(MatchResult(entity.id, DetectionMethod.EXACT, 1.0))
            continue
        if multiword_match(entity, response):
            matches.append(MatchResult(entity.id, DetectionMethod.MULTIWORD, 1.0))
            continue
        if response_vector is None:
            response_vector = provider.embed(response)
        score = cosine_similarity(response_vector, provider.embed(entity.surface))
        if score > threshold:
            matches.append(
                MatchResult(entity.id, DetectionMethod.SEMANTIC, min(score, 1.0))
            )
    return matches


def update_coverage(state: CoverageState, matches: Iterable[MatchResult], turn: int) -> CoverageState:
    """Move matched entities from U_t to C_t, recording (turn, method)."""
    uncovered = set(state.uncovered_ids)
    covered = dict(state.covered)
    for match in matches:
        if match.entity_id not in uncovered:
            status = "already covered" if match.entity_id in covered else "unknown"
            raise ContractViolationError(
                f"match for {status} entity {match.entity_id!r} at turn {turn}"
            )
        covered[match.entity_id] = CoverageRecord(turn=turn, method=match.method)
        uncovered.discard(match.entity_id)
    if len(covered) == len(state.covered):
        return state
    return replace(state, covered=covered)
