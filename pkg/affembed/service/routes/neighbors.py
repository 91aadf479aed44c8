"""
Read-only queries against the loaded embeddings and lexicon.

GET /neighbors/{word}?k=5
GET /similarity?word1=good&word2=bad
GET /affect/{word}
"""

import logging

from fastapi import APIRouter, HTTPException, Query
from starlette.concurrency import run_in_threadpool

from affembed.config import DEFAULT_NEIGHBORS, MAX_SERVICE_K
from affembed.errors import DataError, UnknownWord
from affembed.evaluation import cosine, knn
from affembed.service import state

logger = logging.getLogger(__name__)

router = APIRouter()


async def _unknown(word: str, kind: str) -> HTTPException:
    await state.stats.record_unknown(word=word, kind=kind)
    return HTTPException(status_code=404, detail=f"'{word}' is not in the vocabulary.")


@router.get("/neighbors/{word}")
async def nearest_neighbors(word: str, k: int = Query(DEFAULT_NEIGHBORS, ge=1, le=MAX_SERVICE_K)):
    embeddings = state.get_embeddings()
    try:
        # full-vocabulary scan; keep it off the event loop
        found = await run_in_threadpool(knn, embeddings, word, k)
    except UnknownWord:
        raise await _unknown(word, "neighbors")
    except DataError as exc:
        raise HTTPException(status_code=422, detail=exc.detail)

    await state.stats.record_query("neighbors")
    return {
        "word": word,
        "k": k,
        "neighbors": [{"word": neighbor, "cosine": score} for neighbor, score in found],
    }


@router.get("/similarity")
async def similarity(word1: str, word2: str):
    embeddings = state.get_embeddings()
    for word in (word1, word2):
        if word not in embeddings:
            raise await _unknown(word, "similarity")
    try:
        score = cosine(embeddings.lookup(word1), embeddings.lookup(word2))
    except DataError as exc:
        raise HTTPException(status_code=422, detail=exc.detail)

    await state.stats.record_query("similarity")
    return {"word1": word1, "word2": word2, "cosine": score}


@router.get("/affect/{word}")
async def affect(word: str):
    """Lexicon entry, or the neutral vector for words the lexicon does not rate."""
    lexicon = state.get_lexicon()
    values = lexicon.affect_vector(word)
    await state.stats.record_query("affect")
    return {
        "word": word,
        "in_lexicon": word in lexicon,
        "affect": {dim: float(v) for dim, v in zip(lexicon.dimensions, values)},
    }
