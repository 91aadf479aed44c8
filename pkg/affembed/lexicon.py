"""
Affect lexica: word -> F-dimensional affect vector on a bounded scale.

Words missing from the lexicon (stop words, proper nouns, ...) get the neutral
vector, the scale midpoint by default ([5, 5, 5] for VAD on 1-9).
"""

import csv
import itertools
import logging
import math
from collections.abc import Iterable, Mapping, Sequence
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from affembed.config import (
    DEFAULT_SCALE_MAX,
    DEFAULT_SCALE_MIN,
    VAD_DIMENSIONS,
    WARRINER_VALUE_COLUMNS,
    WARRINER_WORD_COLUMN,
)
from affembed.embedding_io import EmbeddingSet
from affembed.errors import (
    DataError,
    DuplicateWord,
    EmbeddingIOError,
    InvalidConfig,
    OutOfScale,
    ParseError,
)
from affembed.fileio import decoded_lines

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class AffectScale:
    minimum: float = DEFAULT_SCALE_MIN
    maximum: float = DEFAULT_SCALE_MAX

    def __post_init__(self) -> None:
        if not (math.isfinite(self.minimum) and math.isfinite(self.maximum)):
            raise InvalidConfig("affect scale bounds must be finite")
        if self.maximum <= self.minimum:
            raise InvalidConfig(
                f"affect scale maximum ({self.maximum}) must exceed minimum ({self.minimum})"
            )

    @property
    def midpoint(self) -> float:
        return (self.minimum + self.maximum) / 2.0

    @property
    def max_dist(self) -> float:
        """Largest possible distance between two values in one dimension."""
        return self.maximum - self.minimum

    def contains(self, value: float) -> bool:
        return self.minimum <= value <= self.maximum


@dataclass(frozen=True)
class LexiconColumns:
    """Which columns hold the word and its affect values (header names or 0-based indices)."""

    word: str | int = WARRINER_WORD_COLUMN
    values: tuple[str | int, ...] = WARRINER_VALUE_COLUMNS
    has_header: bool = True

    @classmethod
    def parse(cls, spec: str, has_header: bool = True) -> "LexiconColumns":
        """`Word,V.Mean.Sum,A.Mean.Sum,D.Mean.Sum` or `0,1,2,3`: word column first."""
        parts = [p.strip() for p in spec.split(",") if p.strip()]
        if len(parts) < 2:
            raise InvalidConfig(f"column spec '{spec}' needs a word column and at least one value column")
        if all(p.isdigit() for p in parts):
            cols: list[str | int] = [int(p) for p in parts]
        elif any(p.isdigit() for p in parts):
            raise InvalidConfig(f"column spec '{spec}' mixes names and indices")
        else:
            if not has_header:
                raise InvalidConfig("column names need a header row; use indices instead")
            cols = parts
        return cls(word=cols[0], values=tuple(cols[1:]), has_header=has_header)


class AffectLexicon:
    """Immutable word -> affect vector map with scale metadata."""

    def __init__(
        self,
        words: Sequence[str],
        values: np.ndarray,
        scale: AffectScale = AffectScale(),
        neutral: Sequence[float] | None = None,
        dimensions: Sequence[str] | None = None,
    ) -> None:
        matrix = np.array(values, dtype=np.float64, copy=True)
        if matrix.ndim != 2 or matrix.shape[0] != len(words) or matrix.shape[1] < 1:
            raise DataError(f"affect values of shape {matrix.shape} do not match {len(words)} words")
        n_dims = matrix.shape[1]

        index: dict[str, int] = {}
        for i, word in enumerate(words):
            if word in index:
                raise DuplicateWord(word, i + 1)
            index[word] = i

        dims = tuple(dimensions) if dimensions else _default_dimensions(n_dims)
        if len(dims) != n_dims:
            raise InvalidConfig(f"{len(dims)} dimension names for {n_dims} affect dimensions")

        outside = (matrix < scale.minimum) | (matrix > scale.maximum)
        if outside.any():
            i, f = (int(x) for x in np.argwhere(outside)[0])
            raise OutOfScale(words[i], dims[f], float(matrix[i, f]), scale.minimum, scale.maximum)

        neutral_vec = (
            np.full(n_dims, scale.midpoint) if neutral is None else np.array(neutral, dtype=np.float64)
        )
        if neutral_vec.shape != (n_dims,):
            raise InvalidConfig(f"neutral vector must have {n_dims} values")
        if not all(scale.contains(v) for v in neutral_vec):
            raise InvalidConfig(f"neutral vector {neutral_vec.tolist()} lies outside the scale")

        matrix.setflags(write=False)
        neutral_vec.setflags(write=False)
        self.words = tuple(words)
        self.values = matrix
        self.index = index
        self.scale = scale
        self.neutral = neutral_vec
        self.dimensions = dims

    @classmethod
    def from_entries(cls, entries: Mapping[str, Sequence[float]], **kwargs) -> "AffectLexicon":
        words = list(entries)
        return cls(words, np.array([entries[w] for w in words], dtype=np.float64), **kwargs)

    @property
    def n_dims(self) -> int:
        return self.values.shape[1]

    @property
    def max_dist(self) -> np.ndarray:
        return np.full(self.n_dims, self.scale.max_dist)

    def __len__(self) -> int:
        return len(self.words)

    def __contains__(self, word: object) -> bool:
        return word in self.index

    def dimension_index(self, name: str | int) -> int:
        if isinstance(name, int):
            if not 0 <= name < self.n_dims:
                raise InvalidConfig(f"affect dimension {name} out of range 0..{self.n_dims - 1}")
            return name
        try:
            return self.dimensions.index(name)
        except ValueError:
            raise InvalidConfig(f"unknown affect dimension '{name}'; have {', '.join(self.dimensions)}")

    def affect_vector(self, word: str) -> np.ndarray:
        """Stored vector, or the neutral vector for words outside the lexicon. Never fails."""
        i = self.index.get(word)
        return self.neutral if i is None else self.values[i]

    def affect_matrix(self, words: Iterable[str]) -> np.ndarray:
        """Row per word, neutral for misses."""
        words = list(words)
        out = np.tile(self.neutral, (len(words), 1))
        for row, word in enumerate(words):
            i = self.index.get(word)
            if i is not None:
                out[row] = self.values[i]
        return out

    def coverage(self, embeddings: EmbeddingSet) -> float:
        """Fraction of the embedding vocabulary found in the lexicon."""
        hits = sum(1 for word in embeddings.vocab if word in self.index)
        return hits / len(embeddings)

    def as_embeddings(self) -> EmbeddingSet:
        """The lexicon itself as a vector space, for neighbor queries in affect space."""
        return EmbeddingSet(self.words, self.values)


def _default_dimensions(n_dims: int) -> tuple[str, ...]:
    if n_dims == len(VAD_DIMENSIONS):
        return VAD_DIMENSIONS
    return tuple(f"dim{i}" for i in range(n_dims))


def _dimension_names(
    columns: LexiconColumns, n_dims: int, given: Sequence[str] | None
) -> tuple[str, ...]:
    if given:
        return tuple(given)
    if n_dims != len(VAD_DIMENSIONS) and all(isinstance(c, str) for c in columns.values):
        return tuple(str(c) for c in columns.values)
    return _default_dimensions(n_dims)


def _sniff_delimiter(first_line: str) -> str:
    return "\t" if "\t" in first_line else ","


def _resolve_columns(path: Path, columns: LexiconColumns, header: list[str] | None) -> list[int]:
    wanted = [columns.word, *columns.values]
    if all(isinstance(c, int) for c in wanted):
        return [int(c) for c in wanted]
    if header is None:
        raise InvalidConfig("column names need a header row; use indices instead")
    stripped = [h.strip() for h in header]
    resolved = []
    for name in wanted:
        if name not in stripped:
            raise ParseError(path, 1, f"header has no column '{name}'")
        resolved.append(stripped.index(name))
    return resolved


def load_lexicon(
    path: str | Path,
    columns: LexiconColumns = LexiconColumns(),
    scale: AffectScale = AffectScale(),
    delimiter: str | None = None,
    lowercase: bool = False,
    neutral: Sequence[float] | None = None,
    dimensions: Sequence[str] | None = None,
) -> AffectLexicon:
    """
    Read a comma- or tab-delimited lexicon. The delimiter is sniffed from the first
    line unless given.

    Raises EmbeddingIOError, ParseError, OutOfScale, DuplicateWord.
    """
    path = Path(path)
    words: list[str] = []
    rows: list[list[float]] = []
    seen: dict[str, int] = {}
    line_no = 0

    try:
        with open(path, "rb") as handle:
            lines = decoded_lines(handle, path, strip_bom=True)
            first = next(lines, "")
            reader = csv.reader(itertools.chain([first], lines), delimiter=delimiter or _sniff_delimiter(first))
            header = next(reader, None) if columns.has_header else None
            col_idx = _resolve_columns(path, columns, header)
            word_col, value_cols = col_idx[0], col_idx[1:]
            dim_names = _dimension_names(columns, len(value_cols), dimensions)

            for record in reader:
                line_no = reader.line_num
                if not record or all(not cell.strip() for cell in record):
                    continue
                if len(record) <= max(col_idx):
                    raise ParseError(path, line_no, f"expected at least {max(col_idx) + 1} columns, found {len(record)}")
                word = record[word_col].strip()
                if lowercase:
                    word = word.lower()
                if not word:
                    raise ParseError(path, line_no, "empty word")
                try:
                    vector = [float(record[c]) for c in value_cols]
                except ValueError:
                    raise ParseError(path, line_no, f"non-numeric affect value for '{word}'")
                if not all(math.isfinite(v) for v in vector):
                    raise ParseError(path, line_no, f"NaN or infinite affect value for '{word}'")
                for f, value in enumerate(vector):
                    if not scale.contains(value):
                        raise OutOfScale(word, dim_names[f], value, scale.minimum, scale.maximum)
                if word in seen:
                    raise DuplicateWord(word, line_no, path)
                seen[word] = line_no
                words.append(word)
                rows.append(vector)
    except OSError as exc:
        raise EmbeddingIOError(path, exc.strerror or str(exc))
    except csv.Error as exc:
        raise ParseError(path, line_no + 1, str(exc))

    if not words:
        raise ParseError(path, 1, "lexicon has no entries")

    lexicon = AffectLexicon(
        words,
        np.array(rows, dtype=np.float64),
        scale=scale,
        neutral=neutral,
        dimensions=dim_names,
    )
    logger.info(
        "Loaded affect lexicon %s: %d words, %d dimensions (%s), scale [%g, %g]",
        path, len(lexicon), lexicon.n_dims, ", ".join(lexicon.dimensions),
        scale.minimum, scale.maximum,
    )
    return lexicon
