"""
Data transfer objects handed from the use cases to the CLI.
"""
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, List, Optional, Tuple

from src.domain.entities import EvalResult, StepMetrics, Trajectory


@dataclass(frozen=True)
class GenerationResult:
    path: Path
    n_cases: int
    seed: int


@dataclass(frozen=True)
class TrainingReport:
    """Artifacts of a finished training run."""
    run_dir: Path
    metrics_path: Path
    checkpoint_path: Path
    start_epoch: int
    next_epoch: int
    history: List[StepMetrics] = field(default_factory=list)

    @property
    def steps(self) -> int:
        return len(self.history)


@dataclass(frozen=True)
class EvaluationReport:
    run_dir: Path
    policy: str
    seeds: Tuple[int, ...]
    records: List[Dict[str, Any]]
    aggregate: Dict[str, Tuple[float, float]]
    summary_text: str


@dataclass(frozen=True, eq=False)
class SimulationReport:
    """One replayable episode with its HPI and score."""
    case_id: str
    seed: int
    policy: str
    trajectory: Trajectory
    hpi: str
    evaluation: EvalResult


@dataclass(frozen=True)
class MetricsReport:
    out_dir: Path
    plots: Tuple[Path, ...]
    summary_path: Path
    summary_text: str
    first_ig: float
    last_ig: float
    relative_change: float
    window: int
    epochs: int
    source: Optional[Path] = None
