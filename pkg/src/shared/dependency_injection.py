"""
Dependency injection for the IGFT desk trainer.

Services are registered by name, either as ready instances or as factories
that run on first lookup. Registering a name again replaces the earlier
entry, which is how the remote provider swaps out local components.
"""
from abc import ABC, abstractmethod
from dataclasses import dataclass
from typing import Any, Callable, Dict, Optional, Set

from src.domain.exceptions import ContractViolationError


@dataclass
class _Registration:
    factory: Optional[Callable[[], Any]]
    singleton: bool
    instance: Any = None
    resolved: bool = False


class DIContainer:
    """Name-keyed service registry with lazy singletons."""

    def __init__(self):
        self._registrations: Dict[str, _Registration] = {}
        self._resolving: Set[str] = set()

    def register(self, name: str, service: Any) -> None:
        self._registrations[name] = _Registration(factory=None, singleton=True, instance=service, resolved=True)

    def register_factory(self, name: str, factory: Callable[[], Any], singleton: bool = True) -> None:
        self._registrations[name] = _Registration(factory=factory, singleton=singleton)

    def get(self, name: str) -> Any:
        registration = self._registrations.get(name)
        if registration is None:
            raise ContractViolationError(f"Service '{name}' not registered")
        if registration.resolved:
            return registration.instance
        if name in self._resolving:
            raise ContractViolationError(f"Service '{name}' depends on itself")

        self._resolving.add(name)
        try:
            instance = registration.factory()
        finally:
            self._resolving.discard(name)
        if registration.singleton:
            registration.instance = instance
            registration.resolved = True
        return instance

    def has(self, name: str) -> bool:
        return name in self._registrations

    def clear(self) -> None:
        self._registrations.clear()


class ServiceProvider(ABC):
    """Registers one family of services in a container."""

    @abstractmethod
    def register(self, container: DIContainer) -> None:
        ...
