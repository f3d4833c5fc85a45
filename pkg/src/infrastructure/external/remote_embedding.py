"""Embedding provider backed by an HTTP endpoint (``{"texts"} -> {"vectors"}``)."""
import threading
from collections import OrderedDict
from typing import List, Sequence

import numpy as np

from src.application.services import IEmbeddingProvider
from src.domain.exceptions import AssessorError, DomainValueError
from src.infrastructure.external.chat_client import JsonHttpClient
from src.shared.logging import get_logger

logger = get_logger(__name__)

DEFAULT_CACHE_SIZE = 16384


class RemoteEmbeddingProvider(IEmbeddingProvider):
    """Unit-normalized remote embeddings with a bounded LRU cache.

    ``embed_many`` sends every uncached text of a call in one request.
    """

    def __init__(self, client: JsonHttpClient, dim: int, cache_size: int = DEFAULT_CACHE_SIZE):
        if cache_size < 1:
            raise DomainValueError(f"embedding cache size must be >= 1, got {cache_size}")
        self.client = client
        self.dim = dim
        self.cache_size = cache_size
        self._cache: "OrderedDict[str, np.ndarray]" = OrderedDict()
        self._lock = threading.Lock()

    def _to_vector(self, raw: object) -> np.ndarray:
        try:
            vector = np.asarray(raw, dtype=np.float64)
        except (TypeError, ValueError):
            raise AssessorError("embedding is not numeric", raw_reply=str(raw)[:200]) from None
        if vector.shape != (self.dim,) or not np.all(np.isfinite(vector)):
            raise AssessorError(
                f"embedding has shape {vector.shape}, expected ({self.dim},)", raw_reply=str(raw)[:200]
            )
        norm = np.linalg.norm(vector)
        if norm > 0:
            vector = vector / norm
        vector.setflags(write=False)
        return vector

    def _remember(self, text: str, vector: np.ndarray) -> None:
        self._cache[text] = vector
        self._cache.move_to_end(text)
        while len(self._cache) > self.cache_size:
            self._cache.popitem(last=False)

    def embed_many(self, texts: Sequence[str]) -> List[np.ndarray]:
        zero = np.zeros(self.dim)
        found = {}
        with self._lock:
            for text in dict.fromkeys(texts):
                if text.strip() and text in self._cache:
                    self._cache.move_to_end(text)
                    found[text] = self._cache[text]
        missing = [t for t in dict.fromkeys(texts) if t.strip() and t not in found]
        if missing:
            body = self.client.post({"texts": missing})
            vectors = body.get("vectors")
            if not isinstance(vectors, list) or len(vectors) != len(missing):
                raise AssessorError("embedding reply must carry one vector per text", raw_reply=str(body)[:200])
            fresh = {text: self._to_vector(raw) for text, raw in zip(missing, vectors)}
            found.update(fresh)
            with self._lock:
                for text, vector in fresh.items():
                    self._remember(text, vector)
            logger.debug("Fetched remote embeddings", count=len(missing))
        return [found[t] if t.strip() else zero for t in texts]

    def embed(self, text: str) -> np.ndarray:
        return self.embed_many([text])[0]
