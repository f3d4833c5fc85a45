"""
Domain exceptions for the IGFT desk trainer.

Every exception carries the process exit code the CLI uses when it
escapes a command.
"""
from typing import Any, List, Optional, Sequence

EXIT_FAILURE = 1
EXIT_CONFIG = 3
EXIT_IO = 4
EXIT_REMOTE = 5


class IgftError(Exception):
    """Base class for all expected failures."""

    exit_code = EXIT_FAILURE


class DomainValueError(IgftError, ValueError):
    """A value lies outside the domain an operation accepts."""


class ContractViolationError(IgftError):
    """A caller broke an operation's pre-condition."""


class ConfigError(IgftError):
    """Configuration failed validation; lists every offending key."""

    exit_code = EXIT_CONFIG

    def __init__(self, errors: Sequence[str]):
        self.errors: List[str] = list(errors)
        super().__init__("invalid configuration:\n  " + "\n  ".join(self.errors))


class StorageError(IgftError):
    """A file could not be read or written."""

    exit_code = EXIT_IO


class NoDataError(StorageError):
    """An input file exists but holds no usable records."""


class CaseFileParseError(StorageError):
    """A case file record is not a well-formed object."""

    def __init__(self, path: str, line: int, reason: str):
        self.path = path
        self.line = line
        super().__init__(f"{path}:{line}: {reason}")


class CaseValidationError(StorageError):
    """A case violates the data-model invariants."""


class UnknownCaseError(StorageError):
    def __init__(self, case_id: str, available: Sequence[str]):
        self.case_id = case_id
        self.available = list(available)
        super().__init__(
            f"unknown case_id {case_id!r}; available: {', '.join(self.available)}"
        )


class CheckpointError(StorageError):
    """A checkpoint does not match the running bank or feature schema."""


class RewardComputationError(IgftError):
    """A coverage signal or quality score could not be computed."""

    def __init__(self, message: str, entity_id: Optional[str] = None):
        self.entity_id = entity_id
        suffix = f" (entity {entity_id})" if entity_id else ""
        super().__init__(f"{message}{suffix}")


class EpisodeAbortedError(IgftError):
    """An episode stopped early; the partial trajectory is kept for diagnostics."""

    def __init__(self, message: str, partial: Any):
        self.partial = partial
        super().__init__(message)


class NonFiniteGradientError(IgftError):
    """The optimizer refused a gradient containing NaN or inf."""


class RemoteDependencyError(IgftError):
    exit_code = EXIT_REMOTE


class TransportError(RemoteDependencyError):
    def __init__(self, message: str, status: Optional[int] = None):
        self.status = status
        super().__init__(f"{message} (status={status})" if status else message)


class AssessorError(RemoteDependencyError):
    """A remote reply could not be parsed after all retries."""

    def __init__(self, message: str, raw_reply: str = ""):
        self.raw_reply = raw_reply
        super().__init__(message)
