"""
Domain entities for the IGFT desk trainer.

This module re-exports the core data model: clinical cases and their
entities, coverage tracking, rewards, dialogue trajectories, policy
parameters and evaluation results.
"""
from src.domain.entities.coverage import (
    CoverageRecord,
    CoverageState,
    DetectionMethod,
    MatchResult,
)
from src.domain.entities.dialogue import (
    DialogueContext,
    PatientReply,
    QuestionCandidate,
    Trajectory,
    Turn,
    TurnSample,
)
from src.domain.entities.evaluation import AtomicStatement, EvalResult, StatementSource
from src.domain.entities.policy import (
    AdamState,
    GroupSample,
    PolicyGradient,
    PolicyParameters,
)
from src.domain.entities.rewards import (
    QUALITY_DIMENSIONS,
    CoverageEstimate,
    CoverageProbabilities,
    GainBreakdown,
    QualityScores,
    RewardBreakdown,
    UncoveredDigest,
)
from src.domain.entities.training import StepMetrics, TrainingResult
from src.domain.entities.vignette import (
    DEFAULT_CATEGORIES,
    CategoryRegistry,
    ClinicalEntity,
    Sex,
    VignetteCase,
)

__all__ = [
    "AdamState",
    "AtomicStatement",
    "CategoryRegistry",
    "ClinicalEntity",
    "CoverageEstimate",
    "CoverageProbabilities",
    "CoverageRecord",
    "CoverageState",
    "DEFAULT_CATEGORIES",
    "DetectionMethod",
    "DialogueContext",
    "EvalResult",
    "GainBreakdown",
    "GroupSample",
    "MatchResult",
    "PatientReply",
    "PolicyGradient",
    "PolicyParameters",
    "QUALITY_DIMENSIONS",
    "QualityScores",
    "QuestionCandidate",
    "RewardBreakdown",
    "Sex",
    "StatementSource",
    "StepMetrics",
    "Trajectory",
    "TrainingResult",
    "Turn",
    "TurnSample",
    "UncoveredDigest",
    "VignetteCase",
]
