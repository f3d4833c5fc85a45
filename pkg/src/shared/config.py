"""
Configuration service for the IGFT desk trainer.

This module provides the run configuration (a YAML document with one
section per concern) and the environment-backed ConfigService that
supplies endpoint and auth settings.
"""
import os
from dataclasses import asdict, dataclass, field, fields, replace
from pathlib import Path
from typing import Any, Dict, List, Optional, Tuple

import yaml
from dotenv import load_dotenv

from src.domain.entities import DEFAULT_CATEGORIES, CategoryRegistry
from src.domain.exceptions import CaseValidationError, ConfigError, IgftError
from src.domain.value_objects import (
    ClipBounds,
    GrpoConfig,
    MixtureWeights,
    RewardSettings,
    SimulatorSettings,
)

REMOTE_COMPONENTS = ("assessor", "provider", "patient", "judge")
POLICY_CHOICES = ("checkpoint", "uniform", "oracle")
REDACTED = "***"

ENV_OVERRIDES = {
    "chat_endpoint": "IGFT_CHAT_ENDPOINT",
    "chat_model": "IGFT_CHAT_MODEL",
    "api_token": "IGFT_API_TOKEN",
    "embedding_endpoint": "IGFT_EMBEDDING_ENDPOINT",
    "embedding_token": "IGFT_EMBEDDING_TOKEN",
}


@dataclass
class PathsConfig:
    """File locations."""
    cases: str = "data/cases.jsonl"
    output_dir: str = "runs"
    checkpoint: Optional[str] = None


@dataclass
class VignetteConfig:
    """Synthetic case generation."""
    n_cases: int = 20
    entity_min: int = 10
    entity_max: int = 15


@dataclass
class CoverageConfig:
    semantic_threshold: float = 0.85
    embedding_dim: int = 256


@dataclass
class RewardConfig:
    """Coverage-signal mixture, clipping and quality weight."""
    alpha: float = 1.0 / 3.0
    beta: float = 1.0 / 3.0
    gamma: float = 1.0 / 3.0
    p_min: float = 0.05
    p_max: float = 0.95
    quality_lambda: float = 0.5


@dataclass
class SimulatorConfig:
    disclosure_cap: int = 2
    reveal_threshold: float = 0.4
    max_turns: int = 8


@dataclass
class GrpoSection:
    group_size: int = 2
    tau: float = 1.0
    learning_rate: float = 1e-4
    weight_decay: float = 0.01
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8
    batch_size: int = 8
    epochs: int = 150
    steps_per_epoch: int = 10
    discount: float = 1.0
    checkpoint_every: int = 10


@dataclass
class EvaluationConfig:
    seeds: List[int] = field(default_factory=lambda: [0, 1, 2])
    threshold: float = 0.85
    policy: str = "checkpoint"
    candidates: int = 1


@dataclass
class RemoteConfig:
    """Remote endpoints; every component stays local unless listed in ``components``."""
    components: List[str] = field(default_factory=list)
    chat_endpoint: Optional[str] = None
    chat_model: str = "gpt-4o-mini"
    api_token: Optional[str] = None
    embedding_endpoint: Optional[str] = None
    embedding_token: Optional[str] = None
    timeout_s: float = 30.0
    max_retries: int = 3
    max_in_flight: int = 4
    requests_per_second: int = 20
    fallback: bool = True


@dataclass
class RuntimeConfig:
    log_level: str = "INFO"
    parallel_episodes: int = 1
    record_wall_time: bool = False


SECTIONS = {
    "paths": PathsConfig,
    "vignette": VignetteConfig,
    "coverage": CoverageConfig,
    "reward": RewardConfig,
    "simulator": SimulatorConfig,
    "grpo": GrpoSection,
    "evaluation": EvaluationConfig,
    "remote": RemoteConfig,
    "runtime": RuntimeConfig,
}
TOP_LEVEL_KEYS = set(SECTIONS) | {"seed", "categories"}


def _type_ok(value: Any, default: Any, name: str, cls: type) -> bool:
    kind = {f.name: f.type for f in fields(cls)}[name]
    hint = kind.__name__ if isinstance(kind, type) else str(kind)
    if value is None:
        return "Optional" in str(hint)
    if isinstance(default, bool) or hint == "bool":
        return isinstance(value, bool)
    if isinstance(default, int) and not isinstance(default, bool):
        return isinstance(value, int) and not isinstance(value, bool)
    if isinstance(default, float):
        return isinstance(value, (int, float)) and not isinstance(value, bool)
    if isinstance(default, list) or "List" in str(hint):
        return isinstance(value, list)
    return isinstance(value, str)


def _parse_section(name: str, cls: type, raw: Any, errors: List[str]):
    if raw is None:
        return cls()
    if not isinstance(raw, dict):
        errors.append(f"{name}: must be a mapping")
        return cls()
    defaults = cls()
    known = {f.name for f in fields(cls)}
    values: Dict[str, Any] = {}
    for key, value in raw.items():
        if key not in known:
            errors.append(f"{name}.{key}: unknown key")
            continue
        if not _type_ok(value, getattr(defaults, key), key, cls):
            errors.append(f"{name}.{key}: invalid value {value!r}")
            continue
        if isinstance(getattr(defaults, key), float) and isinstance(value, int):
            value = float(value)
        values[key] = value
    return replace(defaults, **values)


def _parse_categories(raw: Any, errors: List[str]) -> Tuple[Tuple[str, float], ...]:
    if raw is None:
        return DEFAULT_CATEGORIES
    if not isinstance(raw, list) or not raw:
        errors.append("categories: must be a non-empty list of {label, weight}")
        return DEFAULT_CATEGORIES
    parsed = []
    for index, item in enumerate(raw):
        if not isinstance(item, dict) or set(item) != {"label", "weight"}:
            errors.append(f"categories[{index}]: expected exactly the keys label and weight")
            continue
        if not isinstance(item["label"], str) or not isinstance(item["weight"], (int, float)):
            errors.append(f"categories[{index}]: label must be text and weight a number")
            continue
        parsed.append((item["label"], float(item["weight"])))
    return tuple(parsed) or DEFAULT_CATEGORIES


@dataclass
class RunConfig:
    """Resolved configuration of one run."""
    seed: int = 0
    categories: Tuple[Tuple[str, float], ...] = DEFAULT_CATEGORIES
    paths: PathsConfig = field(default_factory=PathsConfig)
    vignette: VignetteConfig = field(default_factory=VignetteConfig)
    coverage: CoverageConfig = field(default_factory=CoverageConfig)
    reward: RewardConfig = field(default_factory=RewardConfig)
    simulator: SimulatorConfig = field(default_factory=SimulatorConfig)
    grpo: GrpoSection = field(default_factory=GrpoSection)
    evaluation: EvaluationConfig = field(default_factory=EvaluationConfig)
    remote: RemoteConfig = field(default_factory=RemoteConfig)
    runtime: RuntimeConfig = field(default_factory=RuntimeConfig)

    @classmethod
    def from_mapping(cls, raw: Optional[Dict[str, Any]]) -> "RunConfig":
        """Validate a raw document; every problem is reported in one ConfigError."""
        raw = raw or {}
        errors: List[str] = []
        if not isinstance(raw, dict):
            raise ConfigError(["config: top level must be a mapping"])
        for key in raw:
            if key not in TOP_LEVEL_KEYS:
                errors.append(f"{key}: unknown key")

        seed = raw.get("seed", 0)
        if not isinstance(seed, int) or isinstance(seed, bool):
            errors.append(f"seed: invalid value {seed!r}")
            seed = 0
        sections = {name: _parse_section(name, kind, raw.get(name), errors) for name, kind in SECTIONS.items()}
        config = cls(seed=seed, categories=_parse_categories(raw.get("categories"), errors), **sections)
        errors.extend(config.semantic_errors())
        if errors:
            raise ConfigError(errors)
        return config

    def semantic_errors(self) -> List[str]:
        errors: List[str] = []
        builders = (
            ("categories", self.registry),
            ("reward", self.reward_settings),
            ("simulator", self.simulator_settings),
            ("grpo", self.grpo_config),
        )
        for name, build in builders:
            try:
                build()
            except ConfigError as exc:
                errors.extend(exc.errors)
            except (IgftError, ValueError) as exc:
                errors.append(f"{name}: {exc}")
        unknown = [c for c in self.remote.components if c not in REMOTE_COMPONENTS]
        if unknown:
            errors.append(f"remote.components: unknown entries {unknown}")
        if self.evaluation.policy not in POLICY_CHOICES:
            errors.append(f"evaluation.policy: must be one of {list(POLICY_CHOICES)}")
        if not self.evaluation.seeds:
            errors.append("evaluation.seeds: needs at least one seed")
        if self.evaluation.candidates < 1:
            errors.append("evaluation.candidates: must be >= 1")
        if self.vignette.entity_min < 1 or self.vignette.entity_max < self.vignette.entity_min:
            errors.append("vignette: entity_min must be >= 1 and <= entity_max")
        if self.vignette.n_cases < 0:
            errors.append("vignette.n_cases: must be >= 0")
        if self.runtime.parallel_episodes < 1:
            errors.append("runtime.parallel_episodes: must be >= 1")
        if not (0.0 < self.coverage.semantic_threshold <= 1.0):
            errors.append("coverage.semantic_threshold: must lie in (0, 1]")
        if self.coverage.embedding_dim < 64:
            errors.append("coverage.embedding_dim: must be >= 64")
        if min(self.remote.max_retries, self.remote.max_in_flight, self.remote.requests_per_second) < 1:
            errors.append("remote: max_retries, max_in_flight and requests_per_second must be >= 1")
        return errors

    def registry(self) -> CategoryRegistry:
        try:
            return CategoryRegistry(tuple(self.categories))
        except CaseValidationError as exc:
            raise ConfigError([f"categories: {exc}"]) from exc

    def reward_settings(self) -> RewardSettings:
        return RewardSettings(
            weights=MixtureWeights(self.reward.alpha, self.reward.beta, self.reward.gamma),
            clip=ClipBounds(self.reward.p_min, self.reward.p_max),
            quality_lambda=self.reward.quality_lambda,
            semantic_threshold=self.coverage.semantic_threshold,
        )

    def simulator_settings(self) -> SimulatorSettings:
        return SimulatorSettings(
            disclosure_cap=self.simulator.disclosure_cap,
            reveal_threshold=self.simulator.reveal_threshold,
            max_turns=self.simulator.max_turns,
        )

    def grpo_config(self) -> GrpoConfig:
        return GrpoConfig(seed=self.seed, **asdict(self.grpo))

    def remote_enabled(self, component: str) -> bool:
        return component in self.remote.components

    def with_env(self, config_service: "ConfigService") -> "RunConfig":
        """Environment variables override endpoint and auth settings, plus LOG_LEVEL for verbosity."""
        overrides = {
            name: config_service.get(env)
            for name, env in ENV_OVERRIDES.items()
            if config_service.get(env)
        }
        runtime = self.runtime
        level = config_service.get("LOG_LEVEL")
        if level:
            runtime = replace(runtime, log_level=level)
        return replace(self, remote=replace(self.remote, **overrides), runtime=runtime)

    def to_dict(self, redact: bool = True) -> Dict[str, Any]:
        data = asdict(self)
        data["categories"] = [{"label": label, "weight": weight} for label, weight in self.categories]
        if redact:
            for key in ("api_token", "embedding_token"):
                if data["remote"][key]:
                    data["remote"][key] = REDACTED
        ordered: Dict[str, Any] = {"seed": data.pop("seed"), "categories": data.pop("categories")}
        ordered.update(data)
        return ordered

    def to_yaml(self, redact: bool = True) -> str:
        return yaml.safe_dump(self.to_dict(redact), sort_keys=False)


def load_run_config(path: Optional[str], config_service: Optional["ConfigService"] = None) -> RunConfig:
    """Read, validate and env-resolve a YAML run configuration (defaults when ``path`` is None)."""
    raw: Any = {}
    if path is not None:
        try:
            text = Path(path).read_text(encoding="utf-8")
        except OSError as exc:
            raise ConfigError([f"{path}: cannot read config ({exc.strerror or exc})"]) from exc
        try:
            raw = yaml.safe_load(text) or {}
        except yaml.YAMLError as exc:
            raise ConfigError([f"{path}: invalid YAML ({exc})"]) from exc
    config = RunConfig.from_mapping(raw)
    return config.with_env(config_service or ConfigService())


class ConfigService:
    """Configuration service with environment variable support."""

    def __init__(self, env_file: Optional[str] = None):
        load_dotenv(env_file)
        self._config_cache: Dict[str, Any] = {}

    def get(self, key: str, default: Any = None) -> Any:
        """Get configuration value."""
        if key in self._config_cache:
            return self._config_cache[key]

        env_value = os.getenv(key.upper())
        if env_value is not None:
            self._config_cache[key] = env_value
            return env_value

        return default

    def set(self, key: str, value: Any) -> None:
        """Set configuration value."""
        self._config_cache[key] = value

    def get_log_level(self) -> str:
        """Get log level."""
        return str(self.get("LOG_LEVEL", "INFO")).upper()
