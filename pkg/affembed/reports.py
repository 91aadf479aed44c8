"""
CSV reports with fixed columns:

    similarity: dataset,rho,used,skipped
    noise:      dim,k,pn,gn,evaluated,skipped

A provenance block of `#` comment lines precedes the header row.
"""

import csv
import logging
import sys
from collections.abc import Iterable, Sequence
from pathlib import Path
from typing import TextIO

from affembed.config import NOISE_REPORT_COLUMNS, SIMILARITY_REPORT_COLUMNS
from affembed.evaluation import EvalReport, NoiseReport
from affembed.fileio import atomic_write

logger = logging.getLogger(__name__)


def _write_rows(handle: TextIO, provenance: str, columns: Sequence[str], rows: Iterable[Sequence]) -> None:
    handle.write(provenance)
    writer = csv.writer(handle, lineterminator="\n")
    writer.writerow(columns)
    writer.writerows(rows)


def _emit(path: str | Path | None, provenance: str, columns: Sequence[str], rows: list[Sequence]) -> None:
    """Atomic write to `path`; standard output when path is None or '-'."""
    if path is None or str(path) == "-":
        _write_rows(sys.stdout, provenance, columns, rows)
        sys.stdout.flush()
        return
    with atomic_write(path) as handle:
        _write_rows(handle, provenance, columns, rows)
    logger.info("Wrote report %s (%d rows)", path, len(rows))


def _fmt(value: float) -> str:
    return repr(float(value))


def write_similarity_report(report: EvalReport, path: str | Path | None, provenance: str) -> None:
    rows = [(s.name, _fmt(s.rho), s.used, s.skipped) for s in report.scores]
    _emit(path, provenance, SIMILARITY_REPORT_COLUMNS, rows)


def write_noise_report(reports: Sequence[NoiseReport], path: str | Path | None, provenance: str) -> None:
    rows = [
        (dim, k, _fmt(pn), _fmt(gn), evaluated, skipped)
        for report in reports
        for dim, k, pn, gn, evaluated, skipped in report.rows()
    ]
    _emit(path, provenance, NOISE_REPORT_COLUMNS, rows)
