"""
Self-play episodes between a question policy and a simulated patient.

One turn: the policy proposes K candidates, each is scored before the
answer is seen, the first one is asked, the patient answers, and coverage
is updated from what the answer actually reveals.
"""
import hashlib
from concurrent.futures import ThreadPoolExecutor
from typing import Callable, List, Sequence, Tuple, TypeVar

import numpy as np

from src.application.services import IEmbeddingProvider, IPatient, IQuestionPolicy
from src.application.services.coverage import (
    DEFAULT_SEMANTIC_THRESHOLD,
    best_keyword_overlap,
    cosine_similarity,
    detect_revealed,
    update_coverage,
)
from src.application.services.rewards import RewardScorer, realized_gain
from src.domain.entities import (
    CoverageState,
    DialogueContext,
    PatientReply,
    Trajectory,
    Turn,
    TurnSample,
    VignetteCase,
)
from src.domain.exceptions import (
    ContractViolationError,
    EpisodeAbortedError,
    RewardComputationError,
)
from src.domain.value_objects import SimulatorSettings
from src.shared.logging import get_logger

logger = get_logger(__name__)

FIRST_DISCLOSURES = ("Yes, {s}.", "Now that you mention it, {s}.", "I think so, {s}.")
FURTHER_DISCLOSURES = ("Also, {s}.", "There is also {s}.")
NON_INFORMATIVE_REPLIES = ("I'm not sure about that.", "Nothing else comes to mind.", "I don't think so.")

History = Tuple[Tuple[str, str], ...]
T = TypeVar("T")


def _input_seed(question: str, coverage: CoverageState) -> int:
    digest = hashlib.blake2b(digest_size=8)
    digest.update(question.encode("utf-8"))
    digest.update(b"\x1f")
    digest.update(",".join(coverage.uncovered_ids).encode("utf-8"))
    return int.from_bytes(digest.digest(), "big")


class RuleBasedPatient(IPatient):
    """Deterministic patient that discloses at most ``disclosure_cap`` entities per answer."""

    def __init__(
        self,
        provider: IEmbeddingProvider,
        settings: SimulatorSettings = SimulatorSettings(),
        seed: int = 0,
    ):
        self.provider = provider
        self.settings = settings
        self.seed = seed

    def relevance(self, question: str, coverage: CoverageState) -> List[Tuple[float, int, str, str]]:
        question_vector = self.provider.embed(question)
        ranked = []
        for order, entity in enumerate(coverage.uncovered):
            score = max(
                best_keyword_overlap(entity, question),
                cosine_similarity(question_vector, self.provider.embed(entity.surface)),
            )
            ranked.append((score, order, entity.id, entity.surface))
        ranked.sort(key=lambda item: (-item[0], item[1]))
        return ranked

    def answer(self, question: str, coverage: CoverageState, history: History = ()) -> PatientReply:
        if not question.strip():
            raise ContractViolationError("patient cannot answer an empty question")
        rng = np.random.default_rng([self.seed, _input_seed(question, coverage)])
        disclosed = [
            (entity_id, surface)
            for score, _, entity_id, surface in self.relevance(question, coverage)
            if score >= self.settings.reveal_threshold
        ][: self.settings.disclosure_cap]

        if not disclosed:
            reply = NON_INFORMATIVE_REPLIES[int(rng.integers(len(NON_INFORMATIVE_REPLIES)))]
            return PatientReply(answer=reply, revealed=())

        sentences = [FIRST_DISCLOSURES[int(rng.integers(len(FIRST_DISCLOSURES)))].format(s=disclosed[0][1])]
        for _, surface in disclosed[1:]:
            sentences.append(
                FURTHER_DISCLOSURES[int(rng.integers(len(FURTHER_DISCLOSURES)))].format(s=surface)
            )
        return PatientReply(answer=" ".join(sentences), revealed=tuple(i for i, _ in disclosed))


def patient_answer(
    sim: IPatient, question: str, state: CoverageState, history: History = ()
) -> Tuple[str, Tuple[str, ...]]:
    reply = sim.answer(question, state, history)
    return reply.answer, reply.revealed


def conversation_text(chief_complaint: str, history: Sequence[Tuple[str, str]]) -> str:
    lines = [f"Chief complaint: {chief_complaint}"]
    for question, answer in history:
        lines.append(f"Doctor: {question}")
        lines.append(f"Patient: {answer}")
    return "\n".join(lines)


def run_episode(
    policy: IQuestionPolicy,
    case: VignetteCase,
    patient: IPatient,
    scorer: RewardScorer,
    rng: np.random.Generator,
    max_turns: int = 8,
    discount: float = 1.0,
    semantic_threshold: float = DEFAULT_SEMANTIC_THRESHOLD,
) -> Trajectory:
    """Play one conversation until ``max_turns`` or until every entity is covered."""
    if max_turns < 1:
        raise ContractViolationError(f"max_turns must be >= 1, got {max_turns}")

    initial = CoverageState.initial(case.entities)
    coverage = initial
    history: List[Tuple[str, str]] = []
    turns: List[Turn] = []

    def partial() -> Trajectory:
        return Trajectory(
            case_id=case.case_id,
            chief_complaint=case.chief_complaint,
            initial_coverage=initial,
            turns=tuple(turns),
            discount=discount,
            aborted=True,
        )

    for index in range(max_turns):
        if coverage.is_complete:
            break
        context = DialogueContext(case, coverage, index, max_turns, tuple(history))
        candidates = policy.propose(context, rng)
        if not candidates:
            raise ContractViolationError("policy proposed no candidates")
        try:
            rewards = scorer.score_many(
                [candidate.text for candidate in candidates],
                coverage,
                conversation_text(case.chief_complaint, history),
            )
        except RewardComputationError as exc:
            logger.error(
                "Episode aborted",
                case_id=case.case_id,
                turn=index,
                entity_id=exc.entity_id,
                error=str(exc),
            )
            raise EpisodeAbortedError(
                f"reward computation failed in case {case.case_id} at turn {index}: {exc}",
                partial=partial(),
            ) from exc

        scored = tuple(c.with_reward(r) for c, r in zip(candidates, rewards))
        asked = scored[0]
        reply = patient.answer(asked.text, coverage, tuple(history))
        matches = detect_revealed(reply.answer, coverage.uncovered, scorer.provider, semantic_threshold)
        revealed = tuple(match.entity_id for match in matches)
        if set(revealed) != set(reply.revealed):
            logger.debug(
                "Detected coverage differs from patient disclosure",
                case_id=case.case_id,
                turn=index,
                disclosed=list(reply.revealed),
                detected=list(revealed),
            )
        gain = realized_gain(revealed, coverage)
        coverage = update_coverage(coverage, matches, index)
        turns.append(
            Turn(
                index=index,
                question=asked.text,
                answer=reply.answer,
                revealed=revealed,
                coverage=coverage,
                reward=asked.reward,
                candidates=scored,
                realized_gain=gain,
            )
        )
        history.append((asked.text, reply.answer))

    return Trajectory(
        case_id=case.case_id,
        chief_complaint=case.chief_complaint,
        initial_coverage=initial,
        turns=tuple(turns),
        discount=discount,
    )


def extract_turn_samples(trajectory: Trajectory) -> List[TurnSample]:
    """One sample per turn; sample t holds the history strictly before turn t's question."""
    if not trajectory.turns:
        raise ContractViolationError("cannot extract samples from an empty trajectory")
    samples: List[TurnSample] = []
    history: List[Tuple[str, str]] = []
    coverage = trajectory.initial_coverage
    for turn in trajectory.turns:
        samples.append(
            TurnSample(
                case_id=trajectory.case_id,
                turn_index=turn.index,
                state_text=conversation_text(trajectory.chief_complaint, history),
                uncovered_ids=coverage.uncovered_ids,
            )
        )
        history.append((turn.question, turn.answer))
        coverage = turn.coverage
    return samples


def run_parallel(jobs: Sequence[Callable[[], T]], workers: int = 1) -> List[T]:
    """Run independent episode jobs; results come back in job order."""
    if workers <= 1 or len(jobs) <= 1:
        return [job() for job in jobs]
    with ThreadPoolExecutor(max_workers=workers) as executor:
        return list(executor.map(lambda job: job(), jobs))
