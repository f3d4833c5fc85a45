"""
Lexical embedding service for the IGFT desk trainer.

Hashed word-unigram and character-trigram term frequencies, L2-normalized.
Deterministic across processes (blake2b, not the salted builtin hash).
"""
import hashlib
from functools import lru_cache
from typing import List, Sequence

import numpy as np

from src.application.services import IEmbeddingProvider
from src.domain.exceptions import DomainValueError
from src.shared.text import tokenize

MIN_DIM = 64
DEFAULT_DIM = 256
DEFAULT_CACHE_SIZE = 16384


def _bucket(feature: str, dim: int) -> int:
    digest = hashlib.blake2b(feature.encode("utf-8"), digest_size=8).digest()
    return int.from_bytes(digest, "little") % dim


def _features(text: str) -> List[str]:
    features = []
    for token in tokenize(text):
        features.append(f"w:{token}")
        padded = f"<{token}>"
        features.extend(f"c:{padded[i:i + 3]}" for i in range(len(padded) - 2))
    return features


def lexical_embed(text: str, dim: int = DEFAULT_DIM) -> np.ndarray:
    """Embed ``text``; texts without word tokens map to the zero vector."""
    if dim < MIN_DIM:
        raise DomainValueError(f"embedding dimension must be >= {MIN_DIM}, got {dim}")
    vector = np.zeros(dim, dtype=np.float64)
    for feature in _features(text):
        vector[_bucket(feature, dim)] += 1.0
    norm = np.linalg.norm(vector)
    if norm > 0:
        vector /= norm
    return vector


class LexicalEmbeddingProvider(IEmbeddingProvider):
    """Default embedding provider with a bounded in-process LRU cache."""

    def __init__(self, dim: int = DEFAULT_DIM, cache_size: int = DEFAULT_CACHE_SIZE):
        if dim < MIN_DIM:
            raise DomainValueError(f"embedding dimension must be >= {MIN_DIM}, got {dim}")
        if cache_size < 1:
            raise DomainValueError(f"embedding cache size must be >= 1, got {cache_size}")
        self.dim = dim
        self._cached = lru_cache(maxsize=cache_size)(self._compute)

    def _compute(self, text: str) -> np.ndarray:
        vector = lexical_embed(text, self.dim)
        vector.setflags(write=False)
        return vector

    def embed(self, text: str) -> np.ndarray:
        return self._cached(text)

    def embed_many(self, texts: Sequence[str]) -> List[np.ndarray]:
        return [self.embed(text) for text in texts]

    def cache_info(self):
        return self._cached.cache_info()
