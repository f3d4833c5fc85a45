"""Helpers shared by the use cases: case resolution and policy construction."""
from pathlib import Path
from typing import List, Optional

from src.application.services import IQuestionPolicy
from src.application.services.policy import (
    OraclePolicy,
    SoftmaxQuestionPolicy,
    StateFeaturizer,
    TemplateBank,
    uniform_policy,
)
from src.application.services.vignette import generate_synthetic_cases
from src.domain.entities import VignetteCase
from src.domain.exceptions import ConfigError
from src.infrastructure.storage.case_repository import load_cases, save_cases
from src.infrastructure.storage.checkpoint_store import Checkpoint, load_checkpoint
from src.shared.config import POLICY_CHOICES, RunConfig
from src.shared.dependency_injection import DIContainer
from src.shared.logging import get_logger

logger = get_logger(__name__)

GENERATED_CASES = "cases.jsonl"


def resolve_cases(config: RunConfig, run_dir: Optional[Path] = None) -> List[VignetteCase]:
    """Cases from ``paths.cases``; when that file is absent they are generated from the seed."""
    registry = config.registry()
    if Path(config.paths.cases).exists():
        return load_cases(config.paths.cases, registry)
    logger.info(
        "Case file absent, generating synthetic cases",
        path=config.paths.cases,
        n_cases=config.vignette.n_cases,
        seed=config.seed,
    )
    cases = generate_synthetic_cases(
        config.vignette.n_cases,
        config.seed,
        registry,
        (config.vignette.entity_min, config.vignette.entity_max),
    )
    if run_dir is not None:
        save_cases(cases, str(Path(run_dir) / GENERATED_CASES), registry)
    return cases


def read_checkpoint(container: DIContainer, path: str) -> Checkpoint:
    bank: TemplateBank = container.get("bank")
    featurizer: StateFeaturizer = container.get("featurizer")
    return load_checkpoint(path, bank.schema_hash(), featurizer.schema_hash())


def build_policy(
    container: DIContainer,
    choice: str,
    checkpoint_path: Optional[str],
    candidates: int,
) -> IQuestionPolicy:
    config: RunConfig = container.get("config")
    if choice not in POLICY_CHOICES:
        raise ConfigError([f"policy: must be one of {list(POLICY_CHOICES)}, got {choice!r}"])
    bank: TemplateBank = container.get("bank")
    featurizer: StateFeaturizer = container.get("featurizer")
    if choice == "oracle":
        return OraclePolicy(cap=config.simulator.disclosure_cap)
    if choice == "uniform":
        return uniform_policy(bank, featurizer, candidates)
    path = checkpoint_path or config.paths.checkpoint
    if not path:
        raise ConfigError(["paths.checkpoint: the checkpoint policy needs a checkpoint file"])
    checkpoint = read_checkpoint(container, path)
    return SoftmaxQuestionPolicy(checkpoint.params, bank, featurizer, candidates)
