"""Single-episode replay for inspection."""
from typing import Optional

from src.application.dto import SimulationReport
from src.application.use_cases.common import build_policy, resolve_cases
from src.application.use_cases.evaluate_policy import play_case
from src.infrastructure.storage.case_repository import find_case
from src.shared.config import RunConfig
from src.shared.dependency_injection import DIContainer


class SimulateEpisodeUseCase:
    """Plays one case exactly as evaluation would for the same seed."""

    def __init__(self, container: DIContainer):
        self.container = container
        self.config: RunConfig = container.get("config")

    def execute(
        self,
        case_id: str,
        seed: int,
        checkpoint: Optional[str] = None,
        policy_name: Optional[str] = None,
    ) -> SimulationReport:
        cases = resolve_cases(self.config)
        case = find_case(cases, case_id)
        if policy_name is None:
            policy_name = "checkpoint" if (checkpoint or self.config.paths.checkpoint) else "uniform"
        policy = build_policy(self.container, policy_name, checkpoint, self.config.evaluation.candidates)
        patient = self.container.get("patient_factory")(cases, seed)
        return play_case(self.container, policy, policy_name, patient, case, cases.index(case), seed)
