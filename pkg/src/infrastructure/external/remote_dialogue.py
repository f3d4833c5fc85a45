"""
Remote conversation components: an LLM patient, an LLM HPI writer and an
LLM statement extractor. Each implements the same protocol as its local
counterpart.
"""
from typing import Dict, List, Sequence, Tuple

from src.application.services import IHpiWriter, IPatient, IStatementExtractor
from src.application.services.dialogue import conversation_text
from src.domain.entities import (
    AtomicStatement,
    CoverageState,
    PatientReply,
    StatementSource,
    Trajectory,
    VignetteCase,
)
from src.domain.exceptions import AssessorError
from src.infrastructure.external.chat_client import ChatCompletionClient, load_prompt, user_message

PATIENT_PROMPT = "patient.v1"
HPI_PROMPT = "hpi_writer.v1"
EXTRACTION_PROMPT = "statement_extraction.v1"


def _history_text(history: Sequence[Tuple[str, str]]) -> str:
    if not history:
        return "(none)"
    return "\n".join(f"Doctor: {q}\nPatient: {a}" for q, a in history)


class RemotePatient(IPatient):
    """Patient played by a chat model; coverage is still decided by detection."""

    def __init__(
        self,
        client: ChatCompletionClient,
        cases: Sequence[VignetteCase] = (),
        disclosure_cap: int = 2,
    ):
        self.client = client
        self.disclosure_cap = disclosure_cap
        self._prompt = load_prompt(PATIENT_PROMPT)
        self._chief_complaints: Dict[Tuple[str, ...], str] = {
            tuple(e.surface for e in case.entities): case.chief_complaint for case in cases
        }

    def chief_complaint_of(self, coverage: CoverageState) -> str:
        key = tuple(e.surface for e in coverage.all_entities)
        return self._chief_complaints.get(key, "not stated")

    def answer(
        self,
        question: str,
        coverage: CoverageState,
        history: Tuple[Tuple[str, str], ...] = (),
    ) -> PatientReply:
        facts = "\n".join(f"- {e.surface}" for e in coverage.uncovered) or "(none)"
        prompt = self._prompt.format(
            chief_complaint=self.chief_complaint_of(coverage),
            facts=facts,
            history=_history_text(history),
            question=question,
            cap=self.disclosure_cap,
        )
        reply = self.client.complete(user_message(prompt)).strip()
        if not reply:
            raise AssessorError("patient reply is empty", raw_reply=reply)
        return PatientReply(answer=reply, revealed=())


class RemoteHpiWriter(IHpiWriter):
    def __init__(self, client: ChatCompletionClient):
        self.client = client
        self._prompt = load_prompt(HPI_PROMPT)

    def write(self, trajectory: Trajectory) -> str:
        history = [(turn.question, turn.answer) for turn in trajectory.turns]
        prompt = self._prompt.format(
            chief_complaint=trajectory.chief_complaint,
            conversation=conversation_text(trajectory.chief_complaint, history),
        )
        text = self.client.complete(user_message(prompt)).strip()
        if not text:
            raise AssessorError("HPI reply is empty", raw_reply=text)
        return text


class RemoteStatementExtractor(IStatementExtractor):
    """Delegates atomic-statement extraction and validates the reply."""

    def __init__(self, client: ChatCompletionClient):
        self.client = client
        self._prompt = load_prompt(EXTRACTION_PROMPT)

    def extract(self, text: str, source: StatementSource) -> List[AtomicStatement]:
        reply = self.client.complete_json(user_message(self._prompt.format(text=text)))
        statements = reply.get("statements")
        if not isinstance(statements, list) or not all(isinstance(s, str) for s in statements):
            raise AssessorError("reply must hold a list of statement strings", raw_reply=str(reply))
        return [AtomicStatement(text=s.strip(), source=source) for s in statements if s.strip()]
