"""Shared fixtures: a small hand-built case, synthetic cases and local services."""
from pathlib import Path
from typing import Any, Dict

import pytest
import yaml

from src.application.services.quality import HeuristicQualityAssessor
from src.application.services.rewards import RewardScorer
from src.application.services.vignette import generate_synthetic_cases
from src.domain.entities import (
    CategoryRegistry,
    ClinicalEntity,
    PatientReply,
    QualityScores,
    RewardBreakdown,
    Sex,
    VignetteCase,
)
from src.infrastructure.embeddings.lexical_embedding import LexicalEmbeddingProvider

PROJECT_ROOT = Path(__file__).resolve().parents[2]
DESK_CONFIG = PROJECT_ROOT / "configs" / "desk.yaml"


def make_entity(entity_id: str, surface: str, category: str, weight: float = 1.0, aliases=()) -> ClinicalEntity:
    return ClinicalEntity(
        id=entity_id, surface=surface, category=category, importance_weight=weight, aliases=tuple(aliases)
    )


def zero_reward(quality_lambda: float = 0.5) -> RewardBreakdown:
    return RewardBreakdown(
        weighted_ig=0.0,
        quality=QualityScores(0.0, 0.0, 0.0, 0.0, 0.0),
        quality_lambda=quality_lambda,
    )


class SilentPatient:
    """Never discloses anything."""

    def answer(self, question, coverage, history=()):
        return PatientReply(answer="I'm not sure about that.", revealed=())


@pytest.fixture
def registry() -> CategoryRegistry:
    return CategoryRegistry()


@pytest.fixture(scope="session")
def provider() -> LexicalEmbeddingProvider:
    return LexicalEmbeddingProvider()


@pytest.fixture
def assessor(provider) -> HeuristicQualityAssessor:
    return HeuristicQualityAssessor(provider)


@pytest.fixture
def scorer(provider, assessor) -> RewardScorer:
    return RewardScorer(provider, assessor)


@pytest.fixture
def chest_case() -> VignetteCase:
    entities = (
        make_entity("cp", "chest pain", "symptom", 1.0, aliases=("chest discomfort",)),
        make_entity("dz", "dizziness", "associated_symptom", 0.9),
        make_entity("td", "two days", "temporal_pattern", 0.9),
    )
    return VignetteCase(
        case_id="chest-001",
        age=54,
        sex=Sex.MALE,
        chief_complaint="chest pain",
        hpi_text=(
            "A 54-year-old male presents with chest pain. The patient reports chest pain. "
            "Associated findings include dizziness. The timing is described as two days."
        ),
        entities=entities,
        ground_truth_statements=(
            "The patient reports chest pain.",
            "Associated findings include dizziness.",
            "The timing is described as two days.",
        ),
    )


@pytest.fixture(scope="session")
def synthetic_cases():
    return generate_synthetic_cases(5, seed=7)


def small_config(tmp_path: Path, **sections: Dict[str, Any]) -> Dict[str, Any]:
    """A raw config document for runs that finish in seconds."""
    raw: Dict[str, Any] = {
        "seed": 0,
        "paths": {"cases": str(tmp_path / "cases.jsonl"), "output_dir": str(tmp_path / "runs")},
        "vignette": {"n_cases": 3},
        "reward": {"alpha": 0.1, "beta": 0.8, "gamma": 0.1},
        "grpo": {
            "epochs": 2,
            "steps_per_epoch": 2,
            "batch_size": 4,
            "checkpoint_every": 1,
            "learning_rate": 0.05,
            "tau": 0.1,
        },
        "evaluation": {"seeds": [0, 1]},
        "runtime": {"log_level": "WARNING"},
    }
    for name, values in sections.items():
        raw.setdefault(name, {}).update(values)
    return raw


def write_config(path: Path, raw: Dict[str, Any]) -> Path:
    path.write_text(yaml.safe_dump(raw, sort_keys=False), encoding="utf-8")
    return path
