"""
Dense word-embedding sets: the in-memory model plus plain-text load/save.

Supported files:
    plain  - one line per word: `word v1 v2 ... vD`, space-separated
    w2v    - word2vec text format: a `count dim` header line, then plain rows
"""

import logging
from collections.abc import Iterable, Sequence
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from affembed._compat import StrEnum
from affembed.config import FULL_PRECISION_DIGITS
from affembed.errors import (
    DataError,
    DuplicateWord,
    EmbeddingIOError,
    InconsistentDimension,
    ParseError,
)
from affembed.fileio import atomic_write, decoded_lines

logger = logging.getLogger(__name__)


class VectorFileFormat(StrEnum):
    PLAIN = "plain"
    WORD2VEC = "w2v"

    @classmethod
    def detect(cls, path: str | Path) -> "VectorFileFormat":
        """A first line of exactly two non-negative integers is read as a word2vec header."""
        try:
            with open(path, "rb") as handle:
                for line in decoded_lines(handle, path):
                    fields = line.split()
                    if fields:
                        return cls.WORD2VEC if len(fields) == 2 and all(f.isdigit() for f in fields) else cls.PLAIN
        except OSError as exc:
            raise EmbeddingIOError(path, exc.strerror or str(exc))
        return cls.PLAIN


@dataclass(frozen=True, eq=False)
class EmbeddingSet:
    """
    Ordered vocabulary with one float64 row per word.

    Immutable after construction: the matrix is marked read-only, so instances
    can be shared between threads.
    """

    vocab: tuple[str, ...]
    matrix: np.ndarray
    index: dict[str, int] = field(repr=False)

    def __init__(self, vocab: Sequence[str], matrix: np.ndarray) -> None:
        words = tuple(vocab)
        values = np.array(matrix, dtype=np.float64, copy=True)
        if not words:
            raise DataError("an embedding set needs at least one word")
        if values.ndim != 2 or values.shape[0] != len(words):
            raise DataError(
                f"matrix shape {values.shape} does not match a vocabulary of {len(words)} words"
            )
        if values.shape[1] < 1:
            raise DataError("embedding dimension must be at least 1")
        if not np.isfinite(values).all():
            row = int(np.flatnonzero(~np.isfinite(values).all(axis=1))[0])
            raise DataError(f"row {row} ('{words[row]}') has non-finite values")

        index: dict[str, int] = {}
        for i, word in enumerate(words):
            if word in index:
                raise DuplicateWord(word, i + 1)
            index[word] = i

        values.setflags(write=False)
        object.__setattr__(self, "vocab", words)
        object.__setattr__(self, "matrix", values)
        object.__setattr__(self, "index", index)

    @property
    def dim(self) -> int:
        return self.matrix.shape[1]

    def __len__(self) -> int:
        return len(self.vocab)

    def __contains__(self, word: object) -> bool:
        return word in self.index

    def lookup(self, word: str) -> np.ndarray | None:
        """Row for `word`, or None when it is not in the vocabulary."""
        i = self.index.get(word)
        return None if i is None else self.matrix[i]

    def rows(self, words: Iterable[str]) -> np.ndarray:
        return self.matrix[[self.index[w] for w in words]]

    def with_matrix(self, matrix: np.ndarray) -> "EmbeddingSet":
        """Same vocabulary, new values (any width)."""
        return EmbeddingSet(self.vocab, matrix)


# ── Loading ───────────────────────────────────────────────────────────────


def _fields(line: str) -> list[str]:
    return [f for f in line.rstrip("\r\n").split(" ") if f]


def _parse_header(path: Path, fields: list[str], line_no: int) -> tuple[int, int]:
    if len(fields) != 2 or not all(f.isdigit() for f in fields):
        raise ParseError(path, line_no, "expected a word2vec header 'count dim'")
    count, dim = int(fields[0]), int(fields[1])
    if count < 1 or dim < 1:
        raise ParseError(path, line_no, f"header declares {count} words of dimension {dim}")
    return count, dim


def load_embeddings(
    path: str | Path,
    fmt: VectorFileFormat | str = VectorFileFormat.PLAIN,
) -> EmbeddingSet:
    """
    Read an embedding file. Rows keep file order; nothing is returned unless
    every line parses.

    Raises EmbeddingIOError, ParseError, InconsistentDimension, DuplicateWord.
    """
    path = Path(path)
    fmt = VectorFileFormat(fmt)
    vocab: list[str] = []
    index: dict[str, int] = {}
    rows: list[np.ndarray] = []
    dim: int | None = None
    declared_count: int | None = None
    header_line = 0
    line_no = 0

    try:
        with open(path, "rb") as handle:
            for line_no, line in enumerate(decoded_lines(handle, path), start=1):
                fields = _fields(line)
                if not fields:
                    continue

                if fmt is VectorFileFormat.WORD2VEC and declared_count is None:
                    declared_count, dim = _parse_header(path, fields, line_no)
                    header_line = line_no
                    continue

                word, values = fields[0], fields[1:]
                if not values:
                    raise ParseError(path, line_no, f"'{word}' has no vector values")
                if dim is None:
                    dim = len(values)
                elif len(values) != dim:
                    raise InconsistentDimension(dim, len(values), line_no, path)
                if word in index:
                    raise DuplicateWord(word, line_no, path)

                try:
                    row = np.array(values, dtype=np.float64)
                except ValueError:
                    bad = next(v for v in values if not _is_float(v))
                    raise ParseError(path, line_no, f"'{bad}' is not a number")
                if not np.isfinite(row).all():
                    raise ParseError(path, line_no, "NaN or infinite value")

                index[word] = len(vocab)
                vocab.append(word)
                rows.append(row)
    except OSError as exc:
        raise EmbeddingIOError(path, exc.strerror or str(exc))

    if not vocab:
        raise ParseError(path, header_line or 1, "no vectors found")
    if declared_count is not None and declared_count != len(vocab):
        raise ParseError(
            path, header_line, f"header declares {declared_count} words, file has {len(vocab)}"
        )

    embeddings = EmbeddingSet(vocab, np.vstack(rows))
    logger.info("Loaded %d vectors of dimension %d from %s", len(embeddings), embeddings.dim, path)
    return embeddings


def _is_float(text: str) -> bool:
    try:
        float(text)
    except ValueError:
        return False
    return True


# ── Saving ────────────────────────────────────────────────────────────────


def _formatter(precision: int | None):
    if precision is None or precision >= FULL_PRECISION_DIGITS:
        return repr
    if precision < 0:
        raise DataError(f"precision must be >= 0, got {precision}")
    spec = f".{precision}f"
    return lambda value: format(value, spec)


def save_embeddings(
    embeddings: EmbeddingSet,
    path: str | Path,
    fmt: VectorFileFormat | str = VectorFileFormat.PLAIN,
    precision: int | None = None,
) -> None:
    """
    Write `embeddings` atomically. `precision` None (or >= 17) writes the shortest
    representation that reloads bit-identically; otherwise fixed notation with
    `precision` decimals.
    """
    fmt = VectorFileFormat(fmt)
    render = _formatter(precision)
    with atomic_write(path) as handle:
        if fmt is VectorFileFormat.WORD2VEC:
            handle.write(f"{len(embeddings)} {embeddings.dim}\n")
        for word, row in zip(embeddings.vocab, embeddings.matrix):
            handle.write(word)
            handle.write(" ")
            handle.write(" ".join(render(float(v)) for v in row))
            handle.write("\n")
    logger.info("Saved %d vectors of dimension %d to %s", len(embeddings), embeddings.dim, path)

