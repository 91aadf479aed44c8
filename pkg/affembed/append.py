"""
Affect-APPEND enrichment.

    1. unit-normalize every word vector and every affect vector
    2. concatenate them (D + F columns)
    3. standardize each column to zero mean, unit population variance
    4. PCA back down to D columns

PCA axes come from an eigen-decomposition of the (D+F) x (D+F) scatter matrix,
accumulated in fixed-size row chunks, so memory does not grow with the vocabulary.
"""

import enum
import logging
from dataclasses import dataclass

import numpy as np

from affembed.config import SCATTER_CHUNK_ROWS
from affembed.embedding_io import EmbeddingSet
from affembed.errors import InvalidTargetDim, TooFewRows, ZeroVector
from affembed.lexicon import AffectLexicon
from affembed.parallel import map_chunks

logger = logging.getLogger(__name__)

# Eigenvalues of the scatter matrix below this fraction of the largest count as zero.
RANK_RTOL = 1e-10


class Stage(enum.Enum):
    CONCATENATED = "concatenated"
    STANDARDIZED = "standardized"
    REDUCED = "reduced"


@dataclass(frozen=True)
class EnrichedMatrix:
    stage: Stage
    vocab: tuple[str, ...]
    matrix: np.ndarray

    @property
    def width(self) -> int:
        return self.matrix.shape[1]


@dataclass(frozen=True)
class PcaModel:
    """Column means, orthonormal axes (one per column) and descending singular values."""

    mean: np.ndarray
    axes: np.ndarray
    singular_values: np.ndarray
    n_samples: int

    @property
    def explained_variance(self) -> np.ndarray:
        return self.singular_values**2 / max(self.n_samples - 1, 1)

    def project(self, matrix: np.ndarray) -> np.ndarray:
        return (matrix - self.mean) @ self.axes


def l2_normalize_rows(matrix: np.ndarray, what: str = "vector") -> np.ndarray:
    """Scale every row to unit Euclidean norm. Raises ZeroVector naming the first zero row."""
    matrix = np.asarray(matrix, dtype=np.float64)
    norms = np.linalg.norm(matrix, axis=1)
    zero = np.flatnonzero(norms == 0.0)
    if zero.size:
        raise ZeroVector(int(zero[0]), what)
    return matrix / norms[:, None]


def concat_affect(embeddings: EmbeddingSet, lexicon: AffectLexicon) -> EnrichedMatrix:
    """Unit word vector ⊕ unit affect vector per vocabulary word (neutral affect for misses)."""
    words = l2_normalize_rows(embeddings.matrix, "word vector")
    affect = l2_normalize_rows(lexicon.affect_matrix(embeddings.vocab), "affect vector")

    coverage = lexicon.coverage(embeddings)
    if coverage == 0.0:
        logger.warning("No vocabulary word is in the affect lexicon; every row gets the neutral vector")
    else:
        logger.info("Affect lexicon covers %.2f%% of %d words", 100 * coverage, len(embeddings))

    return EnrichedMatrix(Stage.CONCATENATED, embeddings.vocab, np.hstack([words, affect]))


def standardize_columns(enriched: EnrichedMatrix) -> EnrichedMatrix:
    """
    Zero-mean, unit population-variance columns. Constant columns come out as all
    zeros instead of being divided by zero.
    """
    matrix = enriched.matrix
    n_rows = matrix.shape[0]
    if n_rows < 2:
        raise TooFewRows(n_rows, 2)

    centered = matrix - matrix.mean(axis=0)
    constant = (matrix == matrix[0]).all(axis=0)
    std = np.sqrt((centered**2).mean(axis=0))
    std[constant] = 1.0
    standardized = centered / std
    standardized[:, constant] = 0.0

    if constant.any():
        logger.info("%d constant column(s) left at zero after centering", int(constant.sum()))
    return EnrichedMatrix(Stage.STANDARDIZED, enriched.vocab, standardized)


def _scatter_matrix(centered_rows, n_rows: int, width: int, threads: int) -> np.ndarray:
    def partial(start: int, stop: int) -> np.ndarray:
        block = centered_rows(start, stop)
        return block.T @ block

    scatter = np.zeros((width, width))
    for block in map_chunks(partial, n_rows, SCATTER_CHUNK_ROWS, threads):
        scatter += block
    return scatter


def fit_pca(enriched: EnrichedMatrix, target_dim: int, threads: int = 1) -> PcaModel:
    """
    Top `target_dim` principal axes of the (re-centered) matrix.

    Each axis is flipped so its largest-magnitude coordinate is positive. Fewer than
    `target_dim` non-zero singular values is tolerated with a warning: the eigenbasis
    already completes the axes orthonormally.
    """
    matrix = enriched.matrix
    n_rows, width = matrix.shape
    if not 1 <= target_dim <= width:
        raise InvalidTargetDim(f"target dimension {target_dim} must be between 1 and {width}")
    if n_rows < target_dim:
        raise TooFewRows(n_rows, target_dim)

    mean = matrix.mean(axis=0)
    scatter = _scatter_matrix(lambda a, b: matrix[a:b] - mean, n_rows, width, threads)

    eigenvalues, eigenvectors = np.linalg.eigh(scatter)
    order = np.argsort(eigenvalues)[::-1][:target_dim]
    axes = eigenvectors[:, order]
    singular = np.sqrt(np.clip(eigenvalues[order], 0.0, None))

    pivots = np.argmax(np.abs(axes), axis=0)
    signs = np.sign(axes[pivots, np.arange(target_dim)])
    axes = axes * np.where(signs == 0, 1.0, signs)

    rank = int((eigenvalues > RANK_RTOL * eigenvalues.max(initial=0.0)).sum())
    if rank < target_dim:
        logger.warning(
            "Matrix has numerical rank %d < target dimension %d; "
            "padding with arbitrary orthonormal axes",
            rank, target_dim,
        )

    return PcaModel(mean=mean, axes=axes, singular_values=singular, n_samples=n_rows)


def affect_append(
    embeddings: EmbeddingSet,
    lexicon: AffectLexicon,
    target_dim: int | None = None,
    reduce: bool = True,
    threads: int = 1,
) -> EmbeddingSet:
    """
    Full APPEND pipeline. The result keeps the vocabulary and order; its width is
    `target_dim` (default: the input width). `reduce=False` returns the standardized
    D+F matrix instead, for inspection.
    """
    target_dim = embeddings.dim if target_dim is None else target_dim

    logger.info(
        "Appending %d affect dimension(s) to %d x %d embeddings",
        lexicon.n_dims, len(embeddings), embeddings.dim,
    )
    concatenated = concat_affect(embeddings, lexicon)
    standardized = standardize_columns(concatenated)
    if not reduce:
        return embeddings.with_matrix(standardized.matrix)

    model = fit_pca(standardized, target_dim, threads=threads)
    reduced = EnrichedMatrix(Stage.REDUCED, standardized.vocab, model.project(standardized.matrix))
    total = model.explained_variance.sum()
    logger.info(
        "PCA %d -> %d dims; leading component explains %.4g of %.4g retained variance",
        standardized.width, target_dim, model.explained_variance[0], total,
    )
    return embeddings.with_matrix(reduced.matrix)
