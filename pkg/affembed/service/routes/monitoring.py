"""
Health check and runtime stats.

GET /health
GET /api/stats
"""

import logging

from fastapi import APIRouter

from affembed import __version__
from affembed.config import MAX_SERVICE_K
from affembed.service import state

logger = logging.getLogger(__name__)

router = APIRouter()


@router.api_route("/health", methods=["GET", "HEAD"])
async def health_check():
    """Health check; also reports what is loaded."""
    embeddings = state.get_embeddings()
    return {
        "status": "ok",
        "version": __version__,
        "vocabulary": len(embeddings),
        "dim": embeddings.dim,
        "lexicon_loaded": state.has_lexicon(),
    }


@router.get("/api/stats", include_in_schema=False)
async def runtime_stats(verbose: bool = False):
    """Query counters; `verbose=true` adds the most recent unknown words."""
    result = state.stats.snapshot(include_misses=verbose)
    result["limits"] = {"max_k": MAX_SERVICE_K}
    return result
