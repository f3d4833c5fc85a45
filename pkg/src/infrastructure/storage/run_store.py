"""
Run directories and line-delimited record files.

Every run gets its own timestamped directory holding the resolved config
snapshot next to its artifacts. Record files are append-only.
"""
import json
import threading
from datetime import datetime, timezone
from pathlib import Path
from typing import Any, Dict, Iterable, List, Optional

from src.domain.entities import Trajectory
from src.domain.exceptions import NoDataError, StorageError
from src.shared.logging import get_logger

logger = get_logger(__name__)

CONFIG_SNAPSHOT = "config.yaml"
METRICS_FILE = "metrics.jsonl"
TRAJECTORIES_FILE = "trajectories.jsonl"
CHECKPOINT_DIR = "checkpoints"
FINAL_CHECKPOINT = "final.json"
EVAL_RECORDS_FILE = "eval.jsonl"
SUMMARY_FILE = "summary.txt"


def _timestamp() -> str:
    return datetime.now(timezone.utc).strftime("%Y%m%dT%H%M%SZ")


class RunStore:
    """Creates run directories under ``output_dir``."""

    def __init__(self, output_dir: str):
        self.root = Path(output_dir)

    def create_run(self, kind: str, config_yaml: Optional[str] = None) -> Path:
        stem = f"{kind}-{_timestamp()}"
        try:
            self.root.mkdir(parents=True, exist_ok=True)
            suffix = 0
            while True:
                run_dir = self.root / (stem if suffix == 0 else f"{stem}-{suffix}")
                try:
                    run_dir.mkdir(exist_ok=False)
                    break
                except FileExistsError:
                    suffix += 1
            if config_yaml is not None:
                (run_dir / CONFIG_SNAPSHOT).write_text(config_yaml, encoding="utf-8")
        except OSError as exc:
            raise StorageError(f"cannot create run directory under {self.root}: {exc}") from exc
        logger.info("Run directory created", path=str(run_dir))
        return run_dir


class JsonlWriter:
    """Serialized appender of JSON records."""

    def __init__(self, path: Path):
        self.path = Path(path)
        self._lock = threading.Lock()
        try:
            self.path.parent.mkdir(parents=True, exist_ok=True)
            self._handle = self.path.open("a", encoding="utf-8")
        except OSError as exc:
            raise StorageError(f"cannot open {self.path} for writing: {exc}") from exc

    def write(self, record: Dict[str, Any]) -> None:
        with self._lock:
            self._handle.write(json.dumps(record, ensure_ascii=False) + "\n")
            self._handle.flush()

    def write_many(self, records: Iterable[Dict[str, Any]]) -> None:
        for record in records:
            self.write(record)

    def close(self) -> None:
        with self._lock:
            if not self._handle.closed:
                self._handle.close()

    def __enter__(self) -> "JsonlWriter":
        return self

    def __exit__(self, *exc_info) -> None:
        self.close()


def read_jsonl(path: str) -> List[Dict[str, Any]]:
    file_path = Path(path)
    try:
        lines = file_path.read_text(encoding="utf-8").splitlines()
    except FileNotFoundError:
        raise StorageError(f"file not found: {path}") from None
    except OSError as exc:
        raise StorageError(f"cannot read {path}: {exc}") from exc
    records = []
    for number, line in enumerate(lines, start=1):
        if not line.strip():
            continue
        try:
            records.append(json.loads(line))
        except json.JSONDecodeError as exc:
            raise StorageError(f"{path}:{number}: {exc.msg}") from exc
    if not records:
        raise NoDataError(f"no data in {path}")
    return records


def turn_records(trajectory: Trajectory, episode: int, **extra: Any) -> List[Dict[str, Any]]:
    """One record per turn of ``trajectory``."""
    records = []
    for turn in trajectory.turns:
        reward = turn.reward
        record: Dict[str, Any] = dict(extra)
        record.update(
            {
                "case_id": trajectory.case_id,
                "episode": episode,
                "turn": turn.index,
                "question": turn.question,
                "answer": turn.answer,
                "revealed": list(turn.revealed),
                "weighted_ig": reward.weighted_ig,
                "quality": reward.quality.as_dict(),
                "quality_provenance": reward.quality.provenance,
                "quality_lambda": reward.quality_lambda,
                "reward": reward.total,
                "realized_gain": turn.realized_gain,
                "candidates": [
                    {"text": c.text, "template_index": c.template_index, "reward": c.reward.total if c.reward else None}
                    for c in turn.candidates
                ],
            }
        )
        records.append(record)
    return records
