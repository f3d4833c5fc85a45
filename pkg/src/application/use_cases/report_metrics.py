"""Plots and a summary table from a training metrics file."""
from pathlib import Path
from typing import Optional

from src.application.dto import MetricsReport
from src.domain.entities import StepMetrics
from src.domain.exceptions import StorageError
from src.infrastructure.reporting import (
    IG_PLOT,
    REWARD_PLOT,
    compare_first_last,
    epoch_summaries,
    plot_training_curves,
    render_text,
    training_table,
)
from src.infrastructure.storage.run_store import SUMMARY_FILE, RunStore, read_jsonl
from src.shared.logging import get_logger

logger = get_logger(__name__)

REPORT_FILES = (REWARD_PLOT, IG_PLOT, SUMMARY_FILE)


class ReportMetricsUseCase:
    """Reports never replace existing files.

    Without ``out_dir`` they go to a fresh ``report-{timestamp}`` directory next
    to the metrics file; an explicit ``out_dir`` must not hold a previous report.
    """

    def execute(self, metrics_path: str, out_dir: Optional[str] = None) -> MetricsReport:
        records = read_jsonl(metrics_path)
        try:
            metrics = [StepMetrics.from_record(record) for record in records]
        except (KeyError, TypeError, ValueError) as exc:
            raise StorageError(f"{metrics_path}: malformed metrics record ({exc})") from exc

        epochs = epoch_summaries(metrics)
        comparison = compare_first_last(epochs)
        target = self._target(metrics_path, out_dir)
        plots = plot_training_curves(epochs, target)
        summary = render_text(training_table(epochs, comparison))
        summary_path = target / SUMMARY_FILE
        try:
            with summary_path.open("x", encoding="utf-8") as handle:
                handle.write(summary)
        except OSError as exc:
            raise StorageError(f"cannot write {summary_path}: {exc}") from exc
        logger.info("Report written", out_dir=str(target), epochs=len(epochs))
        return MetricsReport(
            out_dir=target,
            plots=tuple(plots),
            summary_path=summary_path,
            summary_text=summary,
            first_ig=comparison.first,
            last_ig=comparison.last,
            relative_change=comparison.relative_change,
            window=comparison.window,
            epochs=len(epochs),
            source=Path(metrics_path),
        )

    @staticmethod
    def _target(metrics_path: str, out_dir: Optional[str]) -> Path:
        if out_dir is None:
            return RunStore(str(Path(metrics_path).parent)).create_run("report")
        target = Path(out_dir)
        existing = [name for name in REPORT_FILES if (target / name).exists()]
        if existing:
            raise StorageError(f"{target} already holds a report ({', '.join(existing)}); choose another --out-dir")
        return target
