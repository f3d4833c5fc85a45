"""
Summary statistics and rich tables for training and evaluation runs.
"""
import io
from dataclasses import dataclass
from typing import Any, Dict, List, Mapping, Sequence, Tuple

import numpy as np
from rich.console import Console
from rich.table import Table

from src.domain.entities import StepMetrics
from src.domain.exceptions import NoDataError

EVAL_METRICS = ("precision", "recall", "f1", "episode_ig")
COMPARISON_WINDOW = 5


@dataclass(frozen=True)
class EpochSummary:
    epoch: int
    mean_reward: float
    loss: float
    mean_episode_ig: float
    skipped_steps: int


@dataclass(frozen=True)
class IgComparison:
    """Mean episode IG of the first and last epochs of a run."""
    window: int
    first: float
    last: float

    @property
    def relative_change(self) -> float:
        if self.first == 0:
            return float("inf") if self.last > 0 else 0.0
        return (self.last - self.first) / abs(self.first)


def epoch_summaries(metrics: Sequence[StepMetrics]) -> List[EpochSummary]:
    if not metrics:
        raise NoDataError("no metrics records to summarize")
    by_epoch: Dict[int, List[StepMetrics]] = {}
    for record in metrics:
        by_epoch.setdefault(record.epoch, []).append(record)
    return [
        EpochSummary(
            epoch=epoch,
            mean_reward=float(np.mean([r.mean_reward for r in records])),
            loss=float(np.mean([r.loss for r in records])),
            mean_episode_ig=float(np.mean([r.mean_episode_ig for r in records])),
            skipped_steps=sum(1 for r in records if r.skipped),
        )
        for epoch, records in sorted(by_epoch.items())
    ]


def compare_first_last(epochs: Sequence[EpochSummary], window: int = COMPARISON_WINDOW) -> IgComparison:
    if not epochs:
        raise NoDataError("no epochs to compare")
    window = min(window, len(epochs))
    return IgComparison(
        window=window,
        first=float(np.mean([e.mean_episode_ig for e in epochs[:window]])),
        last=float(np.mean([e.mean_episode_ig for e in epochs[-window:]])),
    )


def mean_std(values: Sequence[float]) -> Tuple[float, float]:
    """Mean and sample standard deviation (0 for a single value)."""
    array = np.asarray(values, dtype=np.float64)
    if array.size == 0:
        raise NoDataError("cannot aggregate an empty sample")
    std = float(np.std(array, ddof=1)) if array.size > 1 else 0.0
    return float(np.mean(array)), std


def aggregate_eval(records: Sequence[Mapping[str, Any]]) -> Dict[str, Tuple[float, float]]:
    """Per-seed means of every metric, then mean and std across seeds."""
    if not records:
        raise NoDataError("no evaluation records to aggregate")
    per_seed: Dict[int, List[Mapping[str, Any]]] = {}
    for record in records:
        per_seed.setdefault(int(record["seed"]), []).append(record)
    result: Dict[str, Tuple[float, float]] = {}
    for metric in EVAL_METRICS:
        seed_means = [float(np.mean([r[metric] for r in rows])) for _, rows in sorted(per_seed.items())]
        result[metric] = mean_std(seed_means)
    return result


def training_table(epochs: Sequence[EpochSummary], comparison: IgComparison) -> Table:
    table = Table(title="Training summary")
    table.add_column("epoch", justify="right")
    table.add_column("mean reward", justify="right")
    table.add_column("loss", justify="right")
    table.add_column("episode IG", justify="right")
    table.add_column("skipped", justify="right")
    for e in epochs:
        table.add_row(
            str(e.epoch), f"{e.mean_reward:.4f}", f"{e.loss:.4f}", f"{e.mean_episode_ig:.4f}", str(e.skipped_steps)
        )
    table.caption = (
        f"episode IG first {comparison.window} epochs {comparison.first:.4f} | "
        f"last {comparison.window} epochs {comparison.last:.4f} | "
        f"relative change {comparison.relative_change:+.2%}"
    )
    return table


def eval_table(aggregate: Mapping[str, Tuple[float, float]], policy: str, seeds: Sequence[int]) -> Table:
    table = Table(title=f"Evaluation ({policy} policy, {len(seeds)} seeds)")
    table.add_column("metric")
    table.add_column("mean", justify="right")
    table.add_column("std", justify="right")
    table.add_column("mean ± std", justify="right")
    for metric in EVAL_METRICS:
        mean, std = aggregate[metric]
        table.add_row(metric, f"{mean:.4f}", f"{std:.4f}", f"{mean:.4f} ± {std:.4f}")
    return table


def render_text(table: Table, width: int = 100) -> str:
    """Plain-text rendering of a rich table, for summary files."""
    console = Console(record=True, width=width, file=io.StringIO(), color_system=None)
    console.print(table)
    return console.export_text()
