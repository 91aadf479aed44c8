"""
Exception hierarchy. Every error carries the process exit code the CLI returns for it.
"""

from pathlib import Path

EXIT_OK = 0
EXIT_USAGE_ERROR = 1
EXIT_DATA_ERROR = 2
EXIT_IO_ERROR = 3


class AffembedError(Exception):
    """Base class; `detail` is the human-readable message shown on stderr."""

    exit_code: int = EXIT_DATA_ERROR

    def __init__(self, detail: str) -> None:
        super().__init__(detail)
        self.detail = detail


class UsageError(AffembedError):
    exit_code = EXIT_USAGE_ERROR


class EmbeddingIOError(AffembedError):
    """File could not be read or written."""

    exit_code = EXIT_IO_ERROR

    def __init__(self, path: str | Path, reason: str) -> None:
        super().__init__(f"{path}: {reason}")
        self.path = str(path)
        self.reason = reason


class DataError(AffembedError):
    exit_code = EXIT_DATA_ERROR


# ── Input files ───────────────────────────────────────────────────────────


class ParseError(DataError):
    def __init__(self, path: str | Path, line: int, reason: str) -> None:
        super().__init__(f"{path}:{line}: {reason}")
        self.path = str(path)
        self.line = line
        self.reason = reason


class InconsistentDimension(DataError):
    def __init__(self, expected: int, found: int, line: int, path: str | Path = "<memory>") -> None:
        super().__init__(
            f"{path}:{line}: expected {expected} vector values, found {found}"
        )
        self.expected = expected
        self.found = found
        self.line = line


class DuplicateWord(DataError):
    def __init__(self, word: str, line: int, path: str | Path = "<memory>") -> None:
        super().__init__(f"{path}:{line}: duplicate word '{word}'")
        self.word = word
        self.line = line


class OutOfScale(DataError):
    def __init__(self, word: str, dim: str, value: float, low: float, high: float) -> None:
        super().__init__(
            f"'{word}' has {dim}={value} outside the lexicon scale [{low}, {high}]"
        )
        self.word = word
        self.dim = dim
        self.value = value


# ── Numerical preconditions ───────────────────────────────────────────────


class ZeroVector(DataError):
    def __init__(self, row: int, what: str = "vector") -> None:
        super().__init__(f"row {row}: zero {what} cannot be unit-normalized")
        self.row = row


class TooFewRows(DataError):
    def __init__(self, rows: int, required: int) -> None:
        super().__init__(f"need at least {required} rows, got {rows}")
        self.rows = rows
        self.required = required


class InvalidTargetDim(DataError):
    pass


class InvalidConfig(DataError):
    pass


class MissingLexicon(DataError):
    def __init__(self) -> None:
        super().__init__("affect strength weighting requires an affect lexicon")


class ShapeMismatch(DataError):
    pass


class UnknownWord(DataError):
    def __init__(self, word: str) -> None:
        super().__init__(f"'{word}' is not in the embedding vocabulary")
        self.word = word


class LengthMismatch(DataError):
    def __init__(self, left: int, right: int) -> None:
        super().__init__(f"sequences differ in length: {left} vs {right}")


class ZeroVariance(DataError):
    pass


class DatasetEmptyAfterFiltering(DataError):
    def __init__(self, name: str, total: int) -> None:
        super().__init__(f"dataset '{name}': all {total} pairs are out of vocabulary")
        self.name = name
