"""
Checkpoint persistence.

A checkpoint is a JSON document holding the policy parameters, the
optimizer moments, the next epoch to run and the hashes of the template
bank and feature schema it was trained against.
"""
import json
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Dict

from src.domain.entities import AdamState, PolicyParameters
from src.domain.exceptions import CheckpointError, ContractViolationError, StorageError
from src.shared.logging import get_logger

logger = get_logger(__name__)

FORMAT_VERSION = 1


@dataclass(frozen=True, eq=False)
class Checkpoint:
    params: PolicyParameters
    adam_state: AdamState
    next_epoch: int
    bank_hash: str
    feature_hash: str
    seed: int = 0

    def to_dict(self) -> Dict[str, Any]:
        return {
            "format_version": FORMAT_VERSION,
            "next_epoch": self.next_epoch,
            "seed": self.seed,
            "bank_hash": self.bank_hash,
            "feature_hash": self.feature_hash,
            "params": self.params.to_dict(),
            "adam": self.adam_state.to_dict(),
        }


def save_checkpoint(checkpoint: Checkpoint, path: str) -> None:
    file_path = Path(path)
    try:
        file_path.parent.mkdir(parents=True, exist_ok=True)
        file_path.write_text(json.dumps(checkpoint.to_dict()), encoding="utf-8")
    except OSError as exc:
        raise StorageError(f"cannot write checkpoint {path}: {exc}") from exc
    logger.info("Checkpoint written", path=str(path), next_epoch=checkpoint.next_epoch)


def load_checkpoint(path: str, bank_hash: str, feature_hash: str) -> Checkpoint:
    """Read a checkpoint, refusing one built for another bank or feature schema."""
    try:
        payload = json.loads(Path(path).read_text(encoding="utf-8"))
    except FileNotFoundError:
        raise StorageError(f"checkpoint not found: {path}") from None
    except (OSError, json.JSONDecodeError) as exc:
        raise CheckpointError(f"cannot read checkpoint {path}: {exc}") from exc

    if not isinstance(payload, dict):
        raise CheckpointError(f"{path}: checkpoint must be a JSON object")
    version = payload.get("format_version")
    if version != FORMAT_VERSION:
        raise CheckpointError(f"{path}: unsupported checkpoint format {version!r}")
    if payload.get("bank_hash") != bank_hash:
        raise CheckpointError(f"{path}: template bank hash does not match the running bank")
    if payload.get("feature_hash") != feature_hash:
        raise CheckpointError(f"{path}: feature schema hash does not match the running featurizer")
    try:
        params = PolicyParameters.from_dict(payload["params"])
        adam_state = AdamState.from_dict(payload["adam"])
        return Checkpoint(
            params=params,
            adam_state=adam_state,
            next_epoch=int(payload["next_epoch"]),
            bank_hash=bank_hash,
            feature_hash=feature_hash,
            seed=int(payload.get("seed", 0)),
        )
    except (KeyError, TypeError, ValueError, ContractViolationError) as exc:
        raise CheckpointError(f"{path}: malformed checkpoint ({exc})") from exc
