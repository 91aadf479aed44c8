"""
Constants and configuration shared across the toolkit.

Precedence for run options: command-line flag > --config file > environment > default.
"""

import hashlib
import json
import logging
import os
from collections.abc import Mapping
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

import sentry_sdk
from dotenv import dotenv_values, load_dotenv

from affembed import __version__
from affembed.errors import InvalidConfig

logger = logging.getLogger(__name__)

# ── Affect lexicon ────────────────────────────────────────────────────────
DEFAULT_SCALE_MIN = 1.0
DEFAULT_SCALE_MAX = 9.0

# Warriner et al. norms as published: `Word`, then mean ratings per dimension.
WARRINER_WORD_COLUMN = "Word"
WARRINER_VALUE_COLUMNS = ("V.Mean.Sum", "A.Mean.Sum", "D.Mean.Sum")
VAD_DIMENSIONS = ("valence", "arousal", "dominance")

# ── Embedding files ───────────────────────────────────────────────────────
FULL_PRECISION_DIGITS = 17  # at or above this, floats are written in shortest round-trip form

# ── Retrofitting ──────────────────────────────────────────────────────────
DEFAULT_ALPHA = 1.0
DEFAULT_ITERATIONS = 10

# ── Evaluation ────────────────────────────────────────────────────────────
DEFAULT_K = 10
DEFAULT_NEIGHBORS = 5
MAX_SERVICE_K = 100

SIMILARITY_REPORT_COLUMNS = ("dataset", "rho", "used", "skipped")
NOISE_REPORT_COLUMNS = ("dim", "k", "pn", "gn", "evaluated", "skipped")

# ── Parallelism ───────────────────────────────────────────────────────────
# Fixed chunk sizes keep reductions in the same order regardless of --threads.
SCATTER_CHUNK_ROWS = 4096
KNN_CHUNK_ROWS = 512

THREADS_ENV = "AFFEMBED_THREADS"
LOG_LEVEL_ENV = "AFFEMBED_LOG_LEVEL"


@dataclass(frozen=True)
class BenchmarkFormat:
    """Column layout of a word-similarity benchmark file."""

    word_columns: tuple[int, int] = (0, 1)
    score_column: int = 2
    has_header: bool = False
    delimiter: str | None = None  # None = any whitespace


# Layouts of the published benchmark files, selected with PRESET:PATH.
BENCHMARK_PRESETS: dict[str, BenchmarkFormat] = {
    "simlex999": BenchmarkFormat(score_column=3, has_header=True, delimiter="\t"),
    "simverb3500": BenchmarkFormat(score_column=3, delimiter="\t"),
    "ws353": BenchmarkFormat(has_header=True, delimiter="\t"),
    "rg65": BenchmarkFormat(delimiter="\t"),
    "mc30": BenchmarkFormat(delimiter="\t"),
    "men": BenchmarkFormat(),
    "rw": BenchmarkFormat(delimiter="\t"),
    "scws": BenchmarkFormat(word_columns=(1, 3), score_column=7, delimiter="\t"),
}


def load_environment(dotenv_path: str | Path | None = None) -> None:
    """Load a .env file (working directory by default) without overriding real env vars."""
    load_dotenv(dotenv_path or Path.cwd() / ".env", override=False)


def resolve_threads(flag: int | None) -> int:
    """Thread count from the flag, then AFFEMBED_THREADS, then available parallelism."""
    if flag is not None:
        value = flag
    elif os.getenv(THREADS_ENV):
        try:
            value = int(os.environ[THREADS_ENV])
        except ValueError:
            raise InvalidConfig(
                f"{THREADS_ENV} must be an integer, got '{os.environ[THREADS_ENV]}'"
            )
    else:
        value = len(os.sched_getaffinity(0)) if hasattr(os, "sched_getaffinity") else (os.cpu_count() or 1)
    if value < 1:
        raise InvalidConfig(f"thread count must be >= 1, got {value}")
    return value


def resolve_log_level(flag: str | None) -> str:
    return (flag or os.getenv(LOG_LEVEL_ENV) or "INFO").upper()


def read_config_file(path: str | Path) -> dict[str, str]:
    """Parse a key=value run file. Keys use option names with '-' replaced by '_'."""
    if not Path(path).is_file():
        raise InvalidConfig(f"config file not found: {path}")
    values = dotenv_values(path)
    parsed: dict[str, str] = {}
    for key, value in values.items():
        if value is None:
            raise InvalidConfig(f"{path}: key '{key}' has no value")
        parsed[key.strip().replace("-", "_").lower()] = value.strip()
    return parsed


# Options that do not change computed results and stay out of the config hash.
_VOLATILE_OPTIONS = frozenset({"config", "threads", "log_level", "func"})


@dataclass(frozen=True)
class RunConfig:
    """Resolved options of one CLI invocation."""

    command: str
    options: Mapping[str, Any] = field(default_factory=dict)
    seed: int | None = None
    threads: int = 1
    log_level: str = "INFO"

    @classmethod
    def from_options(cls, command: str, options: Mapping[str, Any]) -> "RunConfig":
        kept = {k: v for k, v in options.items() if k not in _VOLATILE_OPTIONS and k != "command"}
        return cls(
            command=command,
            options=kept,
            seed=options.get("seed"),
            threads=options.get("threads") or 1,
            log_level=options.get("log_level") or "INFO",
        )

    def config_hash(self) -> str:
        """sha256 over the canonical JSON of command + result-affecting options."""
        payload = json.dumps(
            {"command": self.command, "options": dict(self.options)},
            sort_keys=True,
            default=str,
        )
        return hashlib.sha256(payload.encode("utf-8")).hexdigest()


def init_sentry() -> bool:
    """Error tracking, only active when SENTRY_DSN is configured. Safe to call more than once."""
    dsn = os.getenv("SENTRY_DSN")
    if not dsn:
        return False
    if sentry_sdk.get_client().is_active():
        return True
    sentry_sdk.init(
        dsn=dsn,
        traces_sample_rate=0.2,
        environment=os.getenv("SENTRY_ENV", "production"),
        release=f"affembed@{__version__}",
    )
    logger.info("Sentry error tracking enabled")
    return True
