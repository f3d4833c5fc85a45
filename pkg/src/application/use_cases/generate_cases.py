"""Synthetic case generation workflow."""
from pathlib import Path

from src.application.dto import GenerationResult
from src.application.services.vignette import generate_synthetic_cases
from src.infrastructure.storage.case_repository import save_cases
from src.shared.config import RunConfig


class GenerateCasesUseCase:
    def __init__(self, config: RunConfig):
        self.config = config

    def execute(self, n: int, seed: int, out: str) -> GenerationResult:
        registry = self.config.registry()
        cases = generate_synthetic_cases(
            n,
            seed,
            registry,
            (self.config.vignette.entity_min, self.config.vignette.entity_max),
        )
        written = save_cases(cases, out, registry)
        return GenerationResult(path=Path(out), n_cases=written, seed=seed)
