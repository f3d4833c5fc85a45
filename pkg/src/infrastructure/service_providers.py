"""
Service wiring for the IGFT desk trainer.

LocalServiceProvider registers the deterministic components; the remote
provider then replaces the ones listed in ``remote.components``.
"""
from typing import Callable, Optional, Sequence

from src.application.services import IPatient
from src.application.services.dialogue import RuleBasedPatient
from src.application.services.hpi_eval import (
    DeterministicHpiWriter,
    DeterministicStatementExtractor,
)
from src.application.services.policy import StateFeaturizer, TemplateBank
from src.application.services.quality import HeuristicQualityAssessor
from src.application.services.rewards import RewardScorer
from src.domain.entities import VignetteCase
from src.domain.exceptions import ConfigError
from src.infrastructure.embeddings.lexical_embedding import LexicalEmbeddingProvider
from src.infrastructure.external.chat_client import ChatCompletionClient, JsonHttpClient
from src.infrastructure.external.remote_dialogue import (
    RemoteHpiWriter,
    RemotePatient,
    RemoteStatementExtractor,
)
from src.infrastructure.external.remote_embedding import RemoteEmbeddingProvider
from src.infrastructure.external.remote_quality import RemoteQualityAssessor
from src.shared.config import RunConfig
from src.shared.dependency_injection import DIContainer, ServiceProvider
from src.shared.logging import get_logger

logger = get_logger(__name__)

PatientFactory = Callable[[Sequence[VignetteCase], int], IPatient]


def _scorer(container: DIContainer) -> RewardScorer:
    config: RunConfig = container.get("config")
    return RewardScorer(container.get("provider"), container.get("assessor"), config.reward_settings())


class LocalServiceProvider(ServiceProvider):
    """Deterministic, offline implementations of every service."""

    def __init__(self, config: RunConfig):
        self.config = config

    def register(self, container: DIContainer) -> None:
        config = self.config
        registry = config.registry()
        container.register("config", config)
        container.register("registry", registry)
        container.register_factory("bank", lambda: TemplateBank.default(registry))
        container.register_factory("featurizer", lambda: StateFeaturizer(registry))
        container.register_factory("provider", lambda: LexicalEmbeddingProvider(config.coverage.embedding_dim))
        settings = config.reward_settings()
        container.register_factory(
            "heuristic_assessor",
            lambda: HeuristicQualityAssessor(container.get("provider"), settings.weights, settings.clip),
        )
        container.register_factory("assessor", lambda: container.get("heuristic_assessor"))
        container.register_factory("scorer", lambda: _scorer(container))
        simulator = config.simulator_settings()

        def patient_factory(cases: Sequence[VignetteCase], seed: int) -> IPatient:
            return RuleBasedPatient(container.get("provider"), simulator, seed)

        container.register("patient_factory", patient_factory)
        container.register_factory("hpi_writer", DeterministicHpiWriter)
        container.register_factory("extractor", DeterministicStatementExtractor)


class RemoteServiceProvider(ServiceProvider):
    """Swaps in endpoint-backed implementations for the configured components.

    Remote chat components share one client and so one in-flight bound.
    """

    def __init__(self, config: RunConfig):
        self.config = config
        self._chat: Optional[ChatCompletionClient] = None

    def _chat_client(self) -> ChatCompletionClient:
        remote = self.config.remote
        if not remote.chat_endpoint:
            raise ConfigError(["remote.chat_endpoint: required by the remote assessor, patient and judge"])
        if self._chat is None:
            self._chat = ChatCompletionClient(
                remote.chat_endpoint,
                model=remote.chat_model,
                token=remote.api_token,
                timeout_s=remote.timeout_s,
                max_retries=remote.max_retries,
                max_in_flight=remote.max_in_flight,
                requests_per_second=remote.requests_per_second,
            )
        return self._chat

    def _embedding_client(self) -> JsonHttpClient:
        remote = self.config.remote
        if not remote.embedding_endpoint:
            raise ConfigError(["remote.embedding_endpoint: required by the remote embedding provider"])
        return JsonHttpClient(
            remote.embedding_endpoint,
            token=remote.embedding_token,
            timeout_s=remote.timeout_s,
            max_retries=remote.max_retries,
            max_in_flight=remote.max_in_flight,
            requests_per_second=remote.requests_per_second,
        )

    def register(self, container: DIContainer) -> None:
        config = self.config
        components = list(config.remote.components)
        if not components:
            return
        logger.info("Using remote components", components=",".join(components))

        if config.remote_enabled("provider"):
            client = self._embedding_client()
            container.register(
                "provider", RemoteEmbeddingProvider(client, config.coverage.embedding_dim)
            )
        if config.remote_enabled("assessor"):
            assessor = RemoteQualityAssessor(
                self._chat_client(),
                fallback=container.get("heuristic_assessor"),
                use_fallback=config.remote.fallback,
            )
            container.register("assessor", assessor)
        if config.remote_enabled("patient"):
            chat = self._chat_client()
            cap = config.simulator.disclosure_cap

            def patient_factory(cases: Sequence[VignetteCase], seed: int) -> IPatient:
                return RemotePatient(chat, cases, cap)

            container.register("patient_factory", patient_factory)
        if config.remote_enabled("judge"):
            chat = self._chat_client()
            container.register("hpi_writer", RemoteHpiWriter(chat))
            container.register("extractor", RemoteStatementExtractor(chat))


def build_container(config: RunConfig) -> DIContainer:
    container = DIContainer()
    for provider in (LocalServiceProvider(config), RemoteServiceProvider(config)):
        provider.register(container)
    return container
