"""
Remote quality assessor.

Asks a chat-completion endpoint for the five quality scores and for
entity relevance. Replies are memoized per (question, state digest) and
per (question, entity); batches go out concurrently through the client. They
fall back to the heuristic assessor when the endpoint cannot be used.
"""
import threading
from typing import Dict, List, Sequence, Tuple

from src.application.services import IQualityAssessor
from src.application.services.quality import category_phrase
from src.domain.entities import (
    QUALITY_DIMENSIONS,
    ClinicalEntity,
    QualityScores,
    UncoveredDigest,
)
from src.domain.exceptions import AssessorError, RemoteDependencyError
from src.infrastructure.external.chat_client import ChatCompletionClient, load_prompt, user_message
from src.shared.logging import get_logger

logger = get_logger(__name__)

QUALITY_PROMPT = "quality_assessment.v1"
RELEVANCE_PROMPT = "entity_relevance.v1"


def clamp_score(name: str, value: object) -> float:
    """Clamp a reported score into [0, 1], warning when it had to move."""
    try:
        number = float(value)  # type: ignore[arg-type]
    except (TypeError, ValueError):
        raise AssessorError(f"score {name!r} is not a number: {value!r}", raw_reply=str(value)) from None
    if number != number:
        raise AssessorError(f"score {name!r} is NaN", raw_reply=str(value))
    clamped = min(max(number, 0.0), 1.0)
    if clamped != number:
        logger.warning("Clamped remote score", dimension=name, raw=number, clamped=clamped)
    return clamped


class RemoteQualityAssessor(IQualityAssessor):
    """Quality judge behind a chat-completion endpoint.

    Batch calls send one request per missing memo entry, concurrently. When a
    batch fails, every entry in it falls back to the heuristic assessor.
    """

    def __init__(
        self,
        client: ChatCompletionClient,
        fallback: IQualityAssessor,
        use_fallback: bool = True,
    ):
        self.client = client
        self.fallback = fallback
        self.use_fallback = use_fallback
        self._quality_prompt = load_prompt(QUALITY_PROMPT)
        self._relevance_prompt = load_prompt(RELEVANCE_PROMPT)
        self._memo: Dict[Tuple[str, str], QualityScores] = {}
        self._relevance_memo: Dict[Tuple[str, str], float] = {}
        self._lock = threading.Lock()

    def _quality_message(self, question: str, conversation: str, digest: UncoveredDigest):
        prompt = self._quality_prompt.format(
            conversation=conversation or "(none)",
            categories=", ".join(category_phrase(c) for c in digest.uncovered_categories) or "(none)",
            question=question,
        )
        return user_message(prompt)

    @staticmethod
    def _scores(reply: Dict[str, object]) -> QualityScores:
        missing = [name for name in QUALITY_DIMENSIONS if name not in reply]
        if missing:
            raise AssessorError(f"reply lacks {', '.join(missing)}", raw_reply=str(reply))
        return QualityScores.from_mapping(
            {name: clamp_score(name, reply[name]) for name in QUALITY_DIMENSIONS},
            provenance="remote",
        )

    def assess_many(
        self, questions: Sequence[str], conversation: str, digests: Sequence[UncoveredDigest]
    ) -> List[QualityScores]:
        keys = [(question, digest.key) for question, digest in zip(questions, digests)]
        with self._lock:
            pending = {key: (q, d) for key, q, d in zip(keys, questions, digests) if key not in self._memo}
        if pending:
            items = list(pending.items())
            try:
                replies = self.client.complete_json_many(
                    [self._quality_message(q, conversation, d) for _, (q, d) in items]
                )
                fresh = {key: self._scores(reply) for (key, _), reply in zip(items, replies)}
            except RemoteDependencyError as exc:
                fresh = {key: self._fallback_scores(q, conversation, d, exc) for key, (q, d) in items}
            with self._lock:
                self._memo.update(fresh)
        with self._lock:
            return [self._memo[key] for key in keys]

    def assess(self, question: str, conversation: str, digest: UncoveredDigest) -> QualityScores:
        return self.assess_many([question], conversation, [digest])[0]

    def _fallback_scores(
        self,
        question: str,
        conversation: str,
        digest: UncoveredDigest,
        error: RemoteDependencyError,
    ) -> QualityScores:
        if not self.use_fallback:
            raise error
        logger.warning("Remote assessor unavailable, using heuristic", provenance="fallback", error=str(error))
        scores = self.fallback.assess(question, conversation, digest)
        return QualityScores.from_mapping(scores.as_dict(), provenance="fallback")

    def relevance_many(self, entities: Sequence[ClinicalEntity], question: str) -> List[float]:
        keys = [(question, f"{entity.id}:{entity.surface}") for entity in entities]
        with self._lock:
            pending = {key: entity for key, entity in zip(keys, entities) if key not in self._relevance_memo}
        if pending:
            items = list(pending.items())
            messages = [
                user_message(
                    self._relevance_prompt.format(
                        question=question, surface=entity.surface, category=category_phrase(entity.category)
                    )
                )
                for _, entity in items
            ]
            try:
                replies = self.client.complete_json_many(messages)
                fresh = {key: self._relevance_value(reply) for (key, _), reply in zip(items, replies)}
            except RemoteDependencyError as exc:
                if not self.use_fallback:
                    raise
                logger.warning(
                    "Remote relevance unavailable, using heuristic", provenance="fallback", error=str(exc)
                )
                fresh = {key: self.fallback.relevance(entity, question) for key, entity in items}
            with self._lock:
                self._relevance_memo.update(fresh)
        with self._lock:
            return [self._relevance_memo[key] for key in keys]

    @staticmethod
    def _relevance_value(reply: Dict[str, object]) -> float:
        if "relevance" not in reply:
            raise AssessorError("reply lacks relevance", raw_reply=str(reply))
        return clamp_score("relevance", reply["relevance"])

    def relevance(self, entity: ClinicalEntity, question: str) -> float:
        return self.relevance_many([entity], question)[0]
