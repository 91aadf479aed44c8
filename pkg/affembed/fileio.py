"""
File helpers: all-or-nothing writes and content checksums.
"""

import hashlib
import logging
import os
import tempfile
from collections.abc import Iterator
from contextlib import contextmanager
from pathlib import Path
from typing import BinaryIO, TextIO

from affembed.errors import EmbeddingIOError, ParseError

logger = logging.getLogger(__name__)


@contextmanager
def atomic_write(path: str | Path, encoding: str = "utf-8") -> Iterator[TextIO]:
    """
    Open a temporary file next to `path` for writing and rename it over `path`
    when the block exits cleanly. On any exception the temporary file is removed
    and `path` is left untouched.
    """
    target = Path(path)
    try:
        fd, tmp_name = tempfile.mkstemp(prefix=f".{target.name}.", suffix=".tmp", dir=target.parent)
    except OSError as exc:
        raise EmbeddingIOError(target, f"cannot create output: {exc.strerror or exc}")

    try:
        with os.fdopen(fd, "w", encoding=encoding, newline="\n") as handle:
            yield handle
        os.chmod(tmp_name, 0o644)  # mkstemp creates 0600
        os.replace(tmp_name, target)
    except BaseException:
        try:
            os.unlink(tmp_name)
        except FileNotFoundError:
            pass
        raise
    logger.debug("Wrote %s", target)


def sha256_file(path: str | Path, chunk_size: int = 1 << 20) -> str:
    digest = hashlib.sha256()
    try:
        with open(path, "rb") as handle:
            while chunk := handle.read(chunk_size):
                digest.update(chunk)
    except OSError as exc:
        raise EmbeddingIOError(path, exc.strerror or str(exc))
    return digest.hexdigest()


def decoded_lines(handle: BinaryIO, path: str | Path, strip_bom: bool = False) -> Iterator[str]:
    """
    Decode a binary file one line at a time, so invalid UTF-8 is reported on the
    line that holds it. `strip_bom` drops a leading byte-order mark from line 1.
    """
    for line_no, raw in enumerate(handle, start=1):
        try:
            yield raw.decode("utf-8-sig" if strip_bom and line_no == 1 else "utf-8")
        except UnicodeDecodeError as exc:
            raise ParseError(path, line_no, f"not valid UTF-8 ({exc.reason})")
