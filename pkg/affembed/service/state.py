"""
Shared state: the loaded embeddings and lexicon, plus runtime stats.
"""

import asyncio
import time

from fastapi import HTTPException

from affembed.embedding_io import EmbeddingSet
from affembed.lexicon import AffectLexicon

# Set once by create_app(); read-only afterwards, so routes share them without locking
_embeddings: EmbeddingSet | None = None
_lexicon: AffectLexicon | None = None


def get_embeddings() -> EmbeddingSet:
    if _embeddings is None:
        raise HTTPException(status_code=503, detail="No embeddings loaded.")
    return _embeddings


def get_lexicon() -> AffectLexicon:
    if _lexicon is None:
        raise HTTPException(status_code=404, detail="No affect lexicon loaded.")
    return _lexicon


def has_lexicon() -> bool:
    return _lexicon is not None


class Stats:
    """Runtime counters. All mutations go through async methods that hold the lock."""

    def __init__(self) -> None:
        self._lock = asyncio.Lock()
        self.started_at = time.time()
        self.neighbor_queries = 0
        self.similarity_queries = 0
        self.affect_queries = 0
        self.unknown_words = 0
        self._misses: list[dict] = []

    async def record_query(self, kind: str) -> None:
        async with self._lock:
            if kind == "neighbors":
                self.neighbor_queries += 1
            elif kind == "similarity":
                self.similarity_queries += 1
            elif kind == "affect":
                self.affect_queries += 1

    async def record_unknown(self, *, word: str, kind: str) -> None:
        async with self._lock:
            self.unknown_words += 1
            self._misses.append({"time": time.time(), "word": word, "endpoint": kind})
            self._misses = self._misses[-20:]

    def snapshot(self, *, include_misses: bool = False) -> dict:
        """Current counters as a plain dict for API responses."""
        result = {
            "uptime_seconds": round(time.time() - self.started_at),
            "neighbor_queries": self.neighbor_queries,
            "similarity_queries": self.similarity_queries,
            "affect_queries": self.affect_queries,
            "unknown_words": self.unknown_words,
        }
        if include_misses:
            result["recent_unknown"] = self._misses[-5:]
        return result


stats = Stats()
