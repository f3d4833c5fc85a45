"""
Application services for the IGFT desk trainer.

This module contains the service interfaces; the implementations live in
the sibling modules (local, deterministic) and in the infrastructure
layer (remote endpoints).
"""
from typing import List, Protocol, Sequence, Tuple, runtime_checkable

import numpy as np

from src.domain.entities import (
    AtomicStatement,
    ClinicalEntity,
    CoverageState,
    DialogueContext,
    PatientReply,
    QualityScores,
    QuestionCandidate,
    StatementSource,
    Trajectory,
    UncoveredDigest,
)


@runtime_checkable
class IEmbeddingProvider(Protocol):
    """Protocol for sentence embedding backends."""

    dim: int

    def embed(self, text: str) -> np.ndarray:
        """Unit-norm vector for non-empty text, zero vector for empty text."""
        ...

    def embed_many(self, texts: Sequence[str]) -> List[np.ndarray]:
        """Embed several texts; order is preserved."""
        ...


@runtime_checkable
class IQualityAssessor(Protocol):
    """Protocol for question quality scoring."""

    def assess(self, question: str, conversation: str, digest: UncoveredDigest) -> QualityScores:
        """Score a question on the five quality dimensions."""
        ...

    def relevance(self, entity: ClinicalEntity, question: str) -> float:
        """Entity relevance of a question in [0, 1] (the llm coverage signal)."""
        ...

    def relevance_many(self, entities: Sequence[ClinicalEntity], question: str) -> List[float]:
        """Relevance of one question to several entities; order is preserved."""
        return [self.relevance(entity, question) for entity in entities]

    def assess_many(
        self, questions: Sequence[str], conversation: str, digests: Sequence[UncoveredDigest]
    ) -> List[QualityScores]:
        """Score several questions asked at the same point of a conversation."""
        return [self.assess(q, conversation, d) for q, d in zip(questions, digests)]


@runtime_checkable
class IPatient(Protocol):
    """Protocol for simulated patients."""

    def answer(
        self,
        question: str,
        coverage: CoverageState,
        history: Tuple[Tuple[str, str], ...] = (),
    ) -> PatientReply:
        """Answer a doctor question given the current coverage."""
        ...


@runtime_checkable
class IQuestionPolicy(Protocol):
    """Protocol for doctor policies."""

    def propose(self, context: DialogueContext, rng: np.random.Generator) -> List[QuestionCandidate]:
        """Candidates for the next question; the first one is asked."""
        ...


@runtime_checkable
class IHpiWriter(Protocol):
    """Protocol for HPI generation from a finished conversation."""

    def write(self, trajectory: Trajectory) -> str:
        ...


@runtime_checkable
class IStatementExtractor(Protocol):
    """Protocol for atomic statement extraction."""

    def extract(self, text: str, source: StatementSource) -> List[AtomicStatement]:
        ...
