"""
Provenance headers for reports: tool version, config hash and input checksums.

Every line is a `#` comment so the CSV body below it stays plot-ready.
"""

from collections.abc import Iterable
from pathlib import Path

from affembed import __version__
from affembed.config import RunConfig
from affembed.fileio import sha256_file


def version_and_provenance(run_config: RunConfig, inputs: Iterable[str | Path] = ()) -> str:
    lines = [
        f"# affembed {__version__}",
        f"# command={run_config.command}",
        f"# config_sha256={run_config.config_hash()}",
    ]
    if run_config.seed is not None:
        lines.append(f"# seed={run_config.seed}")
    for path in inputs:
        lines.append(f"# input {path} sha256={sha256_file(path)}")
    return "\n".join(lines) + "\n"
