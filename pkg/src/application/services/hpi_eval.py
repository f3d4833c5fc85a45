"""
HPI generation and atomic-statement evaluation.

A finished conversation is summarized into an HPI, both the HPI and the
ground truth are broken into atomic statements, and statements are paired
one-to-one by a greedy highest-similarity assignment.
"""
import re
from typing import List, Optional, Sequence, Tuple, Union

import numpy as np

from src.application.services import IEmbeddingProvider, IHpiWriter, IStatementExtractor
from src.application.services.coverage import DEFAULT_SEMANTIC_THRESHOLD, cosine_similarity
from src.application.services.vignette import chief_complaint_sentence, render_statement
from src.domain.entities import (
    AtomicStatement,
    EvalResult,
    StatementSource,
    Trajectory,
    VignetteCase,
)
from src.domain.exceptions import ContractViolationError, DomainValueError
from src.shared.text import normalize_statement, split_sentences, tokenize

CONJUNCTION_SPLIT = re.compile(r"\s*,?\s+(?:and|but|or|nor|yet)\s+", re.IGNORECASE)

Statements = Sequence[Union[AtomicStatement, str]]


class DeterministicHpiWriter(IHpiWriter):
    """One frame sentence per covered entity, in reveal order."""

    def write(self, trajectory: Trajectory) -> str:
        sentences = [chief_complaint_sentence(trajectory.chief_complaint)]
        sentences.extend(
            render_statement(entity) for entity in trajectory.final_coverage.covered_entities
        )
        return " ".join(sentences)


def generate_hpi(trajectory: Trajectory) -> str:
    return DeterministicHpiWriter().write(trajectory)


def _clause(text: str) -> str:
    return text.strip().strip(",;").strip()


def split_conjunctions(sentence: str) -> List[str]:
    """Split on coordinating conjunctions only when both sides carry words."""
    pieces = [_clause(piece) for piece in CONJUNCTION_SPLIT.split(sentence)]
    if len(pieces) > 1 and all(tokenize(piece) for piece in pieces):
        return pieces
    return [_clause(sentence)]


class DeterministicStatementExtractor(IStatementExtractor):
    """Sentence split followed by conjunction split."""

    def extract(self, text: str, source: StatementSource) -> List[AtomicStatement]:
        if not text.strip():
            raise ContractViolationError("cannot extract statements from empty text")
        statements: List[AtomicStatement] = []
        for sentence in split_sentences(text):
            for piece in split_conjunctions(sentence):
                if tokenize(piece):
                    statements.append(AtomicStatement(text=piece, source=source))
        return statements


def extract_statements(
    text: str, source: StatementSource = StatementSource.GENERATED
) -> List[AtomicStatement]:
    return DeterministicStatementExtractor().extract(text, source)


def _texts(statements: Statements) -> List[str]:
    return [s.text if isinstance(s, AtomicStatement) else s for s in statements]


def _ratio(numerator: int, denominator: int) -> float:
    return numerator / denominator if denominator else 0.0


def f1_score(precision: float, recall: float) -> float:
    if precision + recall == 0:
        return 0.0
    return 2 * precision * recall / (precision + recall)


def match_statements(
    generated: Statements,
    truth: Statements,
    provider: IEmbeddingProvider,
    threshold: float = DEFAULT_SEMANTIC_THRESHOLD,
) -> EvalResult:
    """Greedy one-to-one matching of truth statements (in order) to generated ones.

    An exact normalized-text match wins regardless of cosine; otherwise the
    unmatched generated statement with the highest cosine at or above
    ``threshold`` is taken, ties going to the lowest index.
    """
    if not (0.0 < threshold <= 1.0):
        raise DomainValueError(f"match threshold must lie in (0, 1], got {threshold}")
    generated_texts = _texts(generated)
    truth_texts = _texts(truth)
    generated_norm = [normalize_statement(t) for t in generated_texts]
    generated_vectors: Optional[List[np.ndarray]] = None

    available = set(range(len(generated_texts)))
    pairs: List[Tuple[int, int]] = []
    for j, truth_text in enumerate(truth_texts):
        if not available:
            break
        target = normalize_statement(truth_text)
        exact = [i for i in sorted(available) if generated_norm[i] == target]
        if exact:
            pairs.append((exact[0], j))
            available.discard(exact[0])
            continue
        if generated_vectors is None:
            generated_vectors = provider.embed_many(generated_texts)
        truth_vector = provider.embed(truth_text)
        best_index, best_score = -1, -1.0
        for i in sorted(available):
            score = cosine_similarity(generated_vectors[i], truth_vector)
            if score >= threshold and score > best_score:
                best_index, best_score = i, score
        if best_index >= 0:
            pairs.append((best_index, j))
            available.discard(best_index)

    matched_generated = {i for i, _ in pairs}
    matched_truth = {j for _, j in pairs}
    precision = _ratio(len(pairs), len(generated_texts))
    recall = _ratio(len(pairs), len(truth_texts))
    return EvalResult(
        precision=precision,
        recall=recall,
        f1=f1_score(precision, recall),
        matched_pairs=tuple(pairs),
        unmatched_generated=tuple(i for i in range(len(generated_texts)) if i not in matched_generated),
        unmatched_truth=tuple(j for j in range(len(truth_texts)) if j not in matched_truth),
    )


def truth_statements(
    case: VignetteCase, extractor: Optional[IStatementExtractor] = None
) -> List[AtomicStatement]:
    """Ground-truth statements of a case, extracted from its HPI when not listed."""
    if case.ground_truth_statements:
        return [
            AtomicStatement(text=text, source=StatementSource.GROUND_TRUTH)
            for text in case.ground_truth_statements
        ]
    extractor = extractor or DeterministicStatementExtractor()
    return extractor.extract(case.hpi_text, StatementSource.GROUND_TRUTH)


def evaluate_trajectory(
    trajectory: Trajectory,
    case: VignetteCase,
    provider: IEmbeddingProvider,
    writer: Optional[IHpiWriter] = None,
    extractor: Optional[IStatementExtractor] = None,
    threshold: float = DEFAULT_SEMANTIC_THRESHOLD,
) -> Tuple[str, EvalResult]:
    """Full pipeline: HPI, statements on both sides, matching."""
    writer = writer or DeterministicHpiWriter()
    extractor = extractor or DeterministicStatementExtractor()
    hpi = writer.write(trajectory)
    generated = extractor.extract(hpi, StatementSource.GENERATED)
    truth = truth_statements(case, extractor)
    return hpi, match_statements(generated, truth, provider, threshold)
