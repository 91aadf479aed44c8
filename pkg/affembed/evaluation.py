"""
Intrinsic and qualitative evaluation of embedding sets.

- word similarity: Spearman correlation between model cosines and human scores
- Polarity-Noise@k: share of a lexicon word's k nearest neighbors whose affect
  polarity (sign relative to the scale's neutral value) is opposite
- Granular-Noise@k: mean absolute affect difference to the k nearest neighbors

Nearest neighbors are ranked by cosine, ties broken by ascending vocabulary index.
"""

import enum
import logging
import math
from collections.abc import Collection, Sequence
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from scipy import stats

from affembed.config import KNN_CHUNK_ROWS, BenchmarkFormat
from affembed.embedding_io import EmbeddingSet
from affembed.errors import (
    DataError,
    DatasetEmptyAfterFiltering,
    EmbeddingIOError,
    InvalidConfig,
    LengthMismatch,
    ParseError,
    TooFewRows,
    UnknownWord,
    ZeroVariance,
    ZeroVector,
)
from affembed.fileio import decoded_lines
from affembed.lexicon import AffectLexicon
from affembed.parallel import map_chunks

logger = logging.getLogger(__name__)


# ── Similarity primitives ─────────────────────────────────────────────────


def cosine(u: np.ndarray, v: np.ndarray) -> float:
    u, v = np.asarray(u, dtype=np.float64), np.asarray(v, dtype=np.float64)
    nu, nv = np.linalg.norm(u), np.linalg.norm(v)
    if nu == 0.0:
        raise ZeroVector(0)
    if nv == 0.0:
        raise ZeroVector(1)
    return float(np.clip(np.dot(u, v) / (nu * nv), -1.0, 1.0))


def _top_k(scores: np.ndarray, k: int) -> np.ndarray:
    """Indices of the k largest finite scores, ties by ascending index."""
    n_valid = int(np.isfinite(scores).sum())
    k = min(k, n_valid)
    if k == 0:
        return np.empty(0, dtype=np.intp)
    kth = np.partition(scores, -k)[-k]
    candidates = np.flatnonzero(scores >= kth)
    order = np.lexsort((candidates, -scores[candidates]))
    return candidates[order][:k]


def knn(
    embeddings: EmbeddingSet,
    word: str,
    k: int,
    candidate_filter: Collection[str] | None = None,
) -> list[tuple[str, float]]:
    """
    Top-k neighbors of `word` by cosine, never including `word` itself. With a
    filter, only those words are candidates. Fewer than k come back when
    candidates run out.
    """
    if k < 1:
        raise InvalidConfig(f"k must be >= 1, got {k}")
    i = embeddings.index.get(word)
    if i is None:
        raise UnknownWord(word)

    matrix = embeddings.matrix
    norms = np.linalg.norm(matrix, axis=1)
    if norms[i] == 0.0:
        raise ZeroVector(i)

    with np.errstate(divide="ignore", invalid="ignore"):
        scores = (matrix @ matrix[i]) / (norms * norms[i])
    scores[norms == 0.0] = -np.inf
    scores[i] = -np.inf
    if candidate_filter is not None:
        allowed = np.zeros(len(embeddings), dtype=bool)
        allowed[[embeddings.index[w] for w in candidate_filter if w in embeddings.index]] = True
        scores[~allowed] = -np.inf

    return [(embeddings.vocab[j], float(scores[j])) for j in _top_k(scores, k)]


def spearman(xs: Sequence[float], ys: Sequence[float]) -> float:
    """Pearson correlation of average ranks (ties share their mean rank)."""
    x, y = np.asarray(xs, dtype=np.float64), np.asarray(ys, dtype=np.float64)
    if x.shape != y.shape:
        raise LengthMismatch(len(x), len(y))
    if len(x) < 2:
        raise TooFewRows(len(x), 2)
    if (x == x[0]).all() or (y == y[0]).all():
        raise ZeroVariance("Spearman correlation is undefined when one side is constant")
    rho, _ = stats.spearmanr(x, y)
    return float(np.clip(rho, -1.0, 1.0))


# ── Word-similarity benchmarks ────────────────────────────────────────────


@dataclass(frozen=True)
class SimilarityDataset:
    name: str
    pairs: tuple[tuple[str, str, float], ...]

    def __post_init__(self) -> None:
        if not self.pairs:
            raise DataError(f"dataset '{self.name}' has no pairs")
        if any(math.isnan(score) for _, _, score in self.pairs):
            raise DataError(f"dataset '{self.name}' has NaN scores")


@dataclass(frozen=True)
class DatasetScore:
    name: str
    rho: float
    used: int
    skipped: int

    @property
    def total(self) -> int:
        return self.used + self.skipped


@dataclass(frozen=True)
class EvalReport:
    scores: tuple[DatasetScore, ...]

    def __getitem__(self, name: str) -> DatasetScore:
        for score in self.scores:
            if score.name == name:
                return score
        raise KeyError(name)


def load_similarity_dataset(
    path: str | Path,
    fmt: BenchmarkFormat = BenchmarkFormat(),
    name: str | None = None,
    lowercase: bool = False,
) -> SimilarityDataset:
    """Read `word1 word2 score` lines (columns and delimiter per `fmt`)."""
    path = Path(path)
    needed = max(*fmt.word_columns, fmt.score_column) + 1
    pairs: list[tuple[str, str, float]] = []
    line_no = 0
    try:
        with open(path, "rb") as handle:
            for line_no, line in enumerate(decoded_lines(handle, path, strip_bom=True), start=1):
                if fmt.has_header and line_no == 1:
                    continue
                fields = line.rstrip("\r\n").split(fmt.delimiter)
                if not any(f.strip() for f in fields):
                    continue
                if len(fields) < needed:
                    raise ParseError(path, line_no, f"expected at least {needed} columns, found {len(fields)}")
                w1, w2 = (fields[c].strip() for c in fmt.word_columns)
                if lowercase:
                    w1, w2 = w1.lower(), w2.lower()
                try:
                    score = float(fields[fmt.score_column])
                except ValueError:
                    raise ParseError(path, line_no, f"'{fields[fmt.score_column]}' is not a score")
                if not math.isfinite(score):
                    raise ParseError(path, line_no, "score is NaN or infinite")
                pairs.append((w1, w2, score))
    except OSError as exc:
        raise EmbeddingIOError(path, exc.strerror or str(exc))

    if not pairs:
        raise ParseError(path, line_no or 1, "no word pairs found")
    return SimilarityDataset(name or path.stem, tuple(pairs))


def evaluate_similarity(
    embeddings: EmbeddingSet, datasets: Sequence[SimilarityDataset]
) -> EvalReport:
    """Spearman rho per dataset; pairs with an out-of-vocabulary word are skipped and counted."""
    scores = []
    for dataset in datasets:
        model, human = [], []
        for w1, w2, score in dataset.pairs:
            u, v = embeddings.lookup(w1), embeddings.lookup(w2)
            if u is None or v is None:
                continue
            model.append(cosine(u, v))
            human.append(score)
        skipped = len(dataset.pairs) - len(model)
        if not model:
            raise DatasetEmptyAfterFiltering(dataset.name, len(dataset.pairs))
        rho = spearman(model, human)
        logger.info(
            "%s: rho=%.4f over %d pairs (%d skipped as out of vocabulary)",
            dataset.name, rho, len(model), skipped,
        )
        scores.append(DatasetScore(dataset.name, rho, len(model), skipped))
    return EvalReport(tuple(scores))


# ── Affect noise ──────────────────────────────────────────────────────────


class Polarity(enum.Enum):
    POSITIVE = "positive"
    NEGATIVE = "negative"
    NEUTRAL = "neutral"


def polarity(value: float, neutral: float) -> Polarity:
    if value > neutral:
        return Polarity.POSITIVE
    if value < neutral:
        return Polarity.NEGATIVE
    return Polarity.NEUTRAL


@dataclass(frozen=True)
class NoiseReport:
    k: int
    dimensions: tuple[str, ...]
    pn: tuple[float, ...]  # mean fraction of opposite-polarity neighbors, per dimension
    gn: tuple[float, ...]  # mean absolute affect difference, per dimension
    evaluated: int
    skipped: int

    def rows(self) -> list[tuple[str, int, float, float, int, int]]:
        return [
            (dim, self.k, pn, gn, self.evaluated, self.skipped)
            for dim, pn, gn in zip(self.dimensions, self.pn, self.gn)
        ]


@dataclass(frozen=True)
class _LexiconNeighborhoods:
    affect: np.ndarray           # pool rows' affect vectors
    neighbors: list[np.ndarray]  # per pool word, neighbor positions in the pool (best first)
    skipped: int


def _lexicon_neighborhoods(
    embeddings: EmbeddingSet, lexicon: AffectLexicon, k: int, threads: int
) -> _LexiconNeighborhoods:
    """kNN of every lexicon word in the vocabulary, restricted to lexicon words."""
    pool = [i for i, word in enumerate(embeddings.vocab) if word in lexicon.index]
    missing = len(lexicon) - len(pool)
    if missing:
        logger.info("%d of %d lexicon words are not in the vocabulary", missing, len(lexicon))

    matrix = embeddings.matrix[pool]
    norms = np.linalg.norm(matrix, axis=1)
    zero = norms == 0.0
    if zero.any():
        logger.warning("%d lexicon word(s) have zero vectors and are skipped", int(zero.sum()))

    def chunk(start: int, stop: int) -> list[np.ndarray]:
        with np.errstate(divide="ignore", invalid="ignore"):
            scores = (matrix[start:stop] @ matrix.T) / np.outer(norms[start:stop], norms)
        scores[:, zero] = -np.inf
        out = []
        for r in range(stop - start):
            if zero[start + r]:
                out.append(np.empty(0, dtype=np.intp))
                continue
            scores[r, start + r] = -np.inf
            out.append(_top_k(scores[r], k))
        return out

    neighbors = [nbrs for part in map_chunks(chunk, len(pool), KNN_CHUNK_ROWS, threads) for nbrs in part]
    skipped = sum(1 for nbrs in neighbors if not len(nbrs))
    affect = lexicon.affect_matrix(embeddings.vocab[i] for i in pool)
    return _LexiconNeighborhoods(affect=affect, neighbors=neighbors, skipped=skipped)


def _summarize(
    hoods: _LexiconNeighborhoods, lexicon: AffectLexicon, k: int, dims: Sequence[int]
) -> NoiseReport:
    neutral = lexicon.neutral
    sign = np.sign(hoods.affect - neutral)  # +1 positive, -1 negative, 0 neutral
    pn_sum = np.zeros(len(dims))
    gn_sum = np.zeros(len(dims))
    evaluated = 0
    for i, nbrs in enumerate(hoods.neighbors):
        nbrs = nbrs[:k]
        if not len(nbrs):
            continue
        evaluated += 1
        for d, f in enumerate(dims):
            opposite = sign[i, f] * sign[nbrs, f] < 0
            pn_sum[d] += opposite.mean()
            gn_sum[d] += np.abs(hoods.affect[i, f] - hoods.affect[nbrs, f]).mean()

    if evaluated:
        pn, gn = pn_sum / evaluated, gn_sum / evaluated
    else:
        logger.warning("No lexicon word has a neighbor; noise is undefined at k=%d", k)
        pn = gn = np.full(len(dims), np.nan)
    return NoiseReport(
        k=k,
        dimensions=tuple(lexicon.dimensions[f] for f in dims),
        pn=tuple(float(v) for v in pn),
        gn=tuple(float(v) for v in gn),
        evaluated=evaluated,
        skipped=hoods.skipped,
    )


def _dimension_indices(lexicon: AffectLexicon, dims: Sequence[str | int] | None) -> list[int]:
    if dims is None:
        return list(range(lexicon.n_dims))
    return [lexicon.dimension_index(d) for d in dims]


def noise_curve(
    embeddings: EmbeddingSet,
    lexicon: AffectLexicon,
    ks: Sequence[int],
    dims: Sequence[str | int] | None = None,
    threads: int = 1,
) -> list[NoiseReport]:
    """PN@k and GN@k for every k in `ks` (ascending), from one neighbor search at max(ks)."""
    if not ks:
        raise InvalidConfig("need at least one k")
    if any(k < 1 for k in ks) or list(ks) != sorted(set(ks)):
        raise InvalidConfig(f"k values must be positive and strictly ascending, got {list(ks)}")
    dim_idx = _dimension_indices(lexicon, dims)
    hoods = _lexicon_neighborhoods(embeddings, lexicon, max(ks), threads)
    reports = [_summarize(hoods, lexicon, k, dim_idx) for k in ks]
    for report in reports:
        logger.info(
            "k=%d over %d words (%d skipped): PN %s | GN %s",
            report.k, report.evaluated, report.skipped,
            ", ".join(f"{d}={v:.4f}" for d, v in zip(report.dimensions, report.pn)),
            ", ".join(f"{d}={v:.4f}" for d, v in zip(report.dimensions, report.gn)),
        )
    return reports


def noise_report(
    embeddings: EmbeddingSet,
    lexicon: AffectLexicon,
    k: int,
    dims: Sequence[str | int] | None = None,
    threads: int = 1,
) -> NoiseReport:
    return noise_curve(embeddings, lexicon, [k], dims, threads)[0]


def polarity_noise_at_k(
    embeddings: EmbeddingSet, lexicon: AffectLexicon, k: int, dim: str | int
) -> float:
    return noise_report(embeddings, lexicon, k, [dim]).pn[0]


def granular_noise_at_k(
    embeddings: EmbeddingSet, lexicon: AffectLexicon, k: int, dim: str | int
) -> float:
    return noise_report(embeddings, lexicon, k, [dim]).gn[0]
