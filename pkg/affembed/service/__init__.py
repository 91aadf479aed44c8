"""
Read-only HTTP query service over one embedding set (and optionally its lexicon).

Endpoints:
    GET /neighbors/{word}?k=   - top-k cosine neighbors
    GET /similarity            - cosine of word1 and word2
    GET /affect/{word}         - affect vector (neutral for unrated words)
    GET /health                - health check
    GET /api/stats             - query counters
"""

import logging
import os
from collections.abc import AsyncGenerator
from contextlib import asynccontextmanager

from fastapi import FastAPI, Request
from fastapi.middleware.cors import CORSMiddleware
from starlette.middleware.base import BaseHTTPMiddleware

from affembed import __version__
from affembed.config import init_sentry
from affembed.embedding_io import EmbeddingSet
from affembed.lexicon import AffectLexicon
from affembed.service import state

logger = logging.getLogger(__name__)


class _SecurityHeadersMiddleware(BaseHTTPMiddleware):
    async def dispatch(self, request: Request, call_next):
        response = await call_next(request)
        response.headers["X-Content-Type-Options"] = "nosniff"
        response.headers["X-Frame-Options"] = "DENY"
        response.headers["Referrer-Policy"] = "strict-origin-when-cross-origin"
        return response


def _allowed_origins() -> list[str]:
    # Override via ALLOWED_ORIGINS (comma-separated).
    configured = os.getenv("ALLOWED_ORIGINS", "")
    if configured:
        return [o.strip() for o in configured.split(",") if o.strip()]
    return ["http://localhost:8000", "http://127.0.0.1:8000"]


@asynccontextmanager
async def _lifespan(app: FastAPI) -> AsyncGenerator[None]:
    embeddings = state.get_embeddings()
    logger.info(
        "Serving %d words of dimension %d (lexicon %s)",
        len(embeddings), embeddings.dim, "loaded" if state.has_lexicon() else "not loaded",
    )
    yield


def create_app(embeddings: EmbeddingSet, lexicon: AffectLexicon | None = None) -> FastAPI:
    from affembed.service.routes import monitoring, neighbors

    state._embeddings = embeddings
    state._lexicon = lexicon
    state.stats = state.Stats()
    init_sentry()

    app = FastAPI(
        title="affembed query service",
        description="Nearest neighbors, similarities and affect values for one embedding set.",
        version=__version__,
        lifespan=_lifespan,
    )
    app.add_middleware(
        CORSMiddleware,
        allow_origins=_allowed_origins(),
        allow_methods=["GET", "HEAD", "OPTIONS"],
        allow_headers=["Content-Type"],
    )
    app.add_middleware(_SecurityHeadersMiddleware)

    app.include_router(neighbors.router)
    app.include_router(monitoring.router)
    return app
