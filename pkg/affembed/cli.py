"""
Command-line entry point: `affembed <command> [options]`.

Exit codes: 0 ok, 1 usage error, 2 data/validation error, 3 I/O error.
Diagnostics go to standard error; data goes to files or standard output.
"""

import argparse
import logging
import os
import sys
from collections.abc import Sequence
from pathlib import Path

from affembed import __version__
from affembed.append import affect_append
from affembed.config import (
    BENCHMARK_PRESETS,
    DEFAULT_ALPHA,
    DEFAULT_ITERATIONS,
    DEFAULT_K,
    DEFAULT_NEIGHBORS,
    DEFAULT_SCALE_MAX,
    DEFAULT_SCALE_MIN,
    BenchmarkFormat,
    RunConfig,
    init_sentry,
    load_environment,
    read_config_file,
    resolve_log_level,
    resolve_threads,
)
from affembed.embedding_io import EmbeddingSet, VectorFileFormat, load_embeddings, save_embeddings
from affembed.errors import (
    EXIT_IO_ERROR,
    EXIT_OK,
    AffembedError,
    EmbeddingIOError,
    InvalidConfig,
    UsageError,
)
from affembed.evaluation import (
    SimilarityDataset,
    evaluate_similarity,
    knn,
    load_similarity_dataset,
    noise_curve,
)
from affembed.lexicon import AffectLexicon, AffectScale, LexiconColumns, load_lexicon
from affembed.provenance import version_and_provenance
from affembed.reports import write_noise_report, write_similarity_report
from affembed.retrofit import RetrofitConfig, Strength, load_ontology, retrofit

logger = logging.getLogger(__name__)

LOG_FORMAT = "%(asctime)s %(levelname)s %(name)s: %(message)s"
_TRUE = {"1", "true", "yes", "on"}
_FALSE = {"0", "false", "no", "off"}


class _ArgumentParser(argparse.ArgumentParser):
    """Routes argparse failures through UsageError instead of sys.exit(2)."""

    def error(self, message: str):
        raise UsageError(f"{self.prog}: {message}")


# ── Argument types ────────────────────────────────────────────────────────


def _positive_int(text: str) -> int:
    try:
        value = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"'{text}' is not an integer")
    if value < 1:
        raise argparse.ArgumentTypeError(f"must be >= 1, got {value}")
    return value


def _int_list(text: str) -> list[int]:
    return [_positive_int(part.strip()) for part in text.split(",") if part.strip()]


def _name_list(text: str) -> list[str]:
    return [part.strip() for part in text.split(",") if part.strip()]


def _dimension_list(text: str) -> list[str | int]:
    """Affect dimensions by name or 0-based index."""
    return [int(part) if part.isdigit() else part for part in _name_list(text)]


def _float_list(text: str) -> list[float]:
    try:
        return [float(part) for part in text.split(",") if part.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"'{text}' is not a comma-separated list of numbers")


def _beta(text: str) -> tuple:
    try:
        return RetrofitConfig.parse_beta(text)
    except InvalidConfig as exc:
        raise argparse.ArgumentTypeError(exc.detail)


# ── Parser ────────────────────────────────────────────────────────────────


def _common_options() -> argparse.ArgumentParser:
    common = _ArgumentParser(add_help=False)
    common.add_argument("--config", help="key=value run file; flags override its values")
    common.add_argument("--threads", type=_positive_int, help="worker threads (default: $AFFEMBED_THREADS or all cores)")
    common.add_argument(
        "--log-level", type=str.upper, choices=["DEBUG", "INFO", "WARNING", "ERROR"],
        help="default: $AFFEMBED_LOG_LEVEL or INFO",
    )
    common.add_argument("--seed", type=int, help="recorded in provenance; the pipeline is deterministic")
    return common


def _add_embedding_input(p: argparse.ArgumentParser) -> None:
    p.add_argument("--embeddings", required=True, help="embedding file")
    p.add_argument(
        "--input-format", choices=["auto", *VectorFileFormat], default="auto",
        help="auto detects a word2vec 'count dim' header",
    )


def _add_embedding_output(p: argparse.ArgumentParser) -> None:
    p.add_argument("--out", required=True, help="output embedding file (written atomically)")
    p.add_argument("--format", type=VectorFileFormat, choices=list(VectorFileFormat), default=VectorFileFormat.PLAIN)
    p.add_argument("--precision", type=int, help="decimals to write (default: exact round trip)")


def _add_lexicon_options(p: argparse.ArgumentParser, required: bool) -> None:
    group = p.add_argument_group("affect lexicon")
    group.add_argument("--lexicon", required=required, help="affect lexicon (CSV or TSV)")
    group.add_argument(
        "--lexicon-columns",
        help="word column then value columns, as header names or 0-based indices "
             "(default: Word,V.Mean.Sum,A.Mean.Sum,D.Mean.Sum)",
    )
    group.add_argument("--no-lexicon-header", action="store_true", help="lexicon has no header row")
    group.add_argument("--lexicon-delimiter", help="default: tab if the first line has one, else comma")
    group.add_argument("--scale-min", type=float, default=DEFAULT_SCALE_MIN)
    group.add_argument("--scale-max", type=float, default=DEFAULT_SCALE_MAX)
    group.add_argument("--neutral", type=_float_list, help="neutral affect vector (default: scale midpoint)")
    group.add_argument("--dimension-names", type=_name_list, help="e.g. valence,arousal,dominance")
    group.add_argument("--lowercase-lexicon", action="store_true")


def build_parser() -> _ArgumentParser:
    parser = _ArgumentParser(prog="affembed", description="Affect-enriched word embeddings.")
    sub = parser.add_subparsers(dest="command", required=True, metavar="COMMAND")
    common = _common_options()

    p = sub.add_parser("enrich", parents=[common], help="append affect, standardize, PCA back to D dims")
    _add_embedding_input(p)
    _add_lexicon_options(p, required=True)
    _add_embedding_output(p)
    p.add_argument("--target-dim", type=_positive_int, help="output width (default: input width)")
    p.add_argument("--no-reduce", action="store_true", help="write the standardized D+F matrix without PCA")

    p = sub.add_parser("retrofit", parents=[common], help="retrofit to an ontology, optionally affect-weighted")
    _add_embedding_input(p)
    p.add_argument("--ontology", required=True, help="one line per word: head neighbor1 neighbor2 ...")
    p.add_argument("--lowercase-ontology", action="store_true")
    _add_lexicon_options(p, required=False)
    p.add_argument("--strength", type=Strength, choices=list(Strength), default=Strength.NONE)
    p.add_argument("--alpha", type=float, default=DEFAULT_ALPHA)
    p.add_argument("--beta", type=_beta, default=RetrofitConfig.parse_beta("inverse-degree"),
                   help="inverse-degree | const:<value>")
    p.add_argument("--iters", type=_positive_int, default=DEFAULT_ITERATIONS)
    p.add_argument("--tol", type=float, help="stop early once no vector moves more than this")
    p.add_argument("--jacobi", action="store_true", help="update all words from the previous sweep at once")
    _add_embedding_output(p)

    p = sub.add_parser("eval-sim", parents=[common], help="Spearman rho on word-similarity benchmarks")
    _add_embedding_input(p)
    p.add_argument(
        "--datasets", nargs="+", required=True,
        help=f"PATH or PRESET:PATH; presets: {', '.join(BENCHMARK_PRESETS)}",
    )
    p.add_argument("--header", action="store_true", help="plain datasets start with a header row")
    p.add_argument("--score-column", type=int, default=2, help="0-based score column of plain datasets")
    p.add_argument("--lowercase-datasets", action="store_true")
    p.add_argument("--report", default="-", help="CSV report path (default: standard output)")

    p = sub.add_parser("noise", parents=[common], help="Polarity-Noise@k and Granular-Noise@k")
    _add_embedding_input(p)
    _add_lexicon_options(p, required=True)
    p.add_argument("--k", type=_positive_int, default=DEFAULT_K)
    p.add_argument("--ks", type=_int_list, help="comma-separated k values; overrides --k")
    p.add_argument("--dims", type=_dimension_list, help="affect dimensions to report, names or indices (default: all)")
    p.add_argument("--report", default="-", help="CSV report path (default: standard output)")

    p = sub.add_parser("neighbors", parents=[common], help="top-k cosine neighbors, side by side")
    p.add_argument("--embeddings", nargs="+", default=[], help="PATH or LABEL=PATH, one or more")
    p.add_argument(
        "--input-format", choices=["auto", *VectorFileFormat], default="auto",
    )
    p.add_argument("--word", nargs="+", required=True)
    p.add_argument("--k", type=_positive_int, default=DEFAULT_NEIGHBORS)
    p.add_argument("--lexicon-space", action="store_true", help="also query the lexicon's own affect space")
    _add_lexicon_options(p, required=False)

    p = sub.add_parser("serve", parents=[common], help="read-only HTTP query service")
    _add_embedding_input(p)
    _add_lexicon_options(p, required=False)
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=int(os.getenv("PORT", "8000")))

    sub.add_parser("version", parents=[common], help="print the version")
    return parser


# ── --config file ─────────────────────────────────────────────────────────


def _config_value(action: argparse.Action, raw: str):
    if action.nargs == 0:
        lowered = raw.lower()
        if lowered in _TRUE:
            return True
        if lowered in _FALSE:
            return False
        raise UsageError(f"config key '{action.dest}' expects true/false, got '{raw}'")
    convert = action.type if callable(action.type) else str
    try:
        if action.nargs in ("+", "*"):
            value = [convert(part.strip()) for part in raw.split(",") if part.strip()]
        else:
            value = convert(raw)
    except (ValueError, argparse.ArgumentTypeError) as exc:
        raise UsageError(f"config key '{action.dest}': {exc}")
    if action.choices is not None and action.nargs not in ("+", "*") and value not in action.choices:
        raise UsageError(f"config key '{action.dest}': '{raw}' is not one of {list(action.choices)}")
    return value


def _apply_config_file(parser: argparse.ArgumentParser, argv: Sequence[str]) -> None:
    """Install --config values as defaults of the chosen subcommand (flags still win)."""
    pre = _ArgumentParser(add_help=False)
    pre.add_argument("--config")
    known, _ = pre.parse_known_args(argv)
    if not known.config:
        return

    subparsers = next(a for a in parser._actions if isinstance(a, argparse._SubParsersAction))
    command = next((a for a in argv if a in subparsers.choices), None)
    if command is None:
        return
    _require_file(known.config)
    values = read_config_file(known.config)

    sub = subparsers.choices[command]
    actions = {a.dest: a for a in sub._actions if a.dest not in ("help", "config")}
    defaults = {}
    for key, raw in values.items():
        action = actions.get(key)
        if action is None:
            logger.warning("Ignoring unknown key '%s' in %s", key, known.config)
            continue
        defaults[key] = _config_value(action, raw)
        action.required = False
    sub.set_defaults(**defaults)


# ── Helpers ───────────────────────────────────────────────────────────────


def _require_file(path: str | Path) -> None:
    if not Path(path).is_file():
        raise EmbeddingIOError(path, "no such file")


def _require_output_dir(path: str | Path) -> None:
    if str(path) == "-":
        return
    parent = Path(path).parent
    if not parent.is_dir():
        raise EmbeddingIOError(path, f"output directory {parent} does not exist")


def _load_embeddings(path: str | Path, input_format: str) -> EmbeddingSet:
    fmt = VectorFileFormat.detect(path) if input_format == "auto" else VectorFileFormat(input_format)
    return load_embeddings(path, fmt)


def _load_lexicon(args: argparse.Namespace) -> AffectLexicon:
    has_header = not args.no_lexicon_header
    if args.lexicon_columns:
        columns = LexiconColumns.parse(args.lexicon_columns, has_header=has_header)
    elif has_header:
        columns = LexiconColumns()
    else:
        columns = LexiconColumns(word=0, values=(1, 2, 3), has_header=False)
    return load_lexicon(
        args.lexicon,
        columns=columns,
        scale=AffectScale(args.scale_min, args.scale_max),
        delimiter=args.lexicon_delimiter,
        lowercase=args.lowercase_lexicon,
        neutral=args.neutral,
        dimensions=args.dimension_names,
    )


def _dataset_spec(text: str) -> tuple[str, Path, BenchmarkFormat | None]:
    """`PRESET:PATH` selects a known layout; anything else is a plain path."""
    preset, sep, rest = text.partition(":")
    if sep and preset.lower() in BENCHMARK_PRESETS:
        return preset.lower(), Path(rest), BENCHMARK_PRESETS[preset.lower()]
    path = Path(text)
    return path.stem, path, None


def _labelled_path(text: str) -> tuple[str, Path]:
    label, sep, rest = text.partition("=")
    if sep and label and rest:
        return label, Path(rest)
    path = Path(text)
    return path.stem, path


# ── Commands ──────────────────────────────────────────────────────────────


def _inputs(args: argparse.Namespace) -> list[Path]:
    paths: list[Path] = []
    if args.command in ("enrich", "retrofit", "eval-sim", "noise", "serve"):
        paths.append(Path(args.embeddings))
    if args.command == "neighbors":
        paths.extend(path for _, path in map(_labelled_path, args.embeddings))
    if args.command == "retrofit":
        paths.append(Path(args.ontology))
    if args.command == "eval-sim":
        paths.extend(path for _, path, _ in map(_dataset_spec, args.datasets))
    if getattr(args, "lexicon", None):
        paths.append(Path(args.lexicon))
    return paths


def _validate(args: argparse.Namespace) -> None:
    """Reject conflicting flags and missing files before any computation."""
    if args.command == "retrofit" and args.strength is not Strength.NONE and not args.lexicon:
        raise UsageError(f"--strength {args.strength} requires --lexicon")
    if args.command == "neighbors":
        if args.lexicon_space and not args.lexicon:
            raise UsageError("--lexicon-space requires --lexicon")
        if not args.embeddings and not args.lexicon_space:
            raise UsageError("give --embeddings, --lexicon-space, or both")
    if args.command == "noise" and args.ks is not None and not args.ks:
        raise UsageError("--ks needs at least one value")

    for path in _inputs(args):
        _require_file(path)
    for dest in ("out", "report"):
        if getattr(args, dest, None):
            _require_output_dir(getattr(args, dest))


def _cmd_enrich(args: argparse.Namespace, run_config: RunConfig) -> None:
    embeddings = _load_embeddings(args.embeddings, args.input_format)
    lexicon = _load_lexicon(args)
    enriched = affect_append(
        embeddings, lexicon, target_dim=args.target_dim, reduce=not args.no_reduce, threads=run_config.threads
    )
    save_embeddings(enriched, args.out, args.format, args.precision)


def _cmd_retrofit(args: argparse.Namespace, run_config: RunConfig) -> None:
    embeddings = _load_embeddings(args.embeddings, args.input_format)
    ontology = load_ontology(args.ontology, lowercase=args.lowercase_ontology)
    lexicon = _load_lexicon(args) if args.lexicon else None
    if lexicon is not None and args.strength is Strength.NONE:
        logger.warning("--lexicon has no effect without --strength c|i")
    beta_rule, beta_constant = args.beta
    config = RetrofitConfig(
        alpha=args.alpha,
        beta_rule=beta_rule,
        beta_constant=beta_constant,
        strength=args.strength,
        iterations=args.iters,
        convergence_tol=args.tol,
        jacobi=args.jacobi,
    )
    result = retrofit(embeddings, ontology, config, lexicon=lexicon)
    save_embeddings(result, args.out, args.format, args.precision)


def _cmd_eval_sim(args: argparse.Namespace, run_config: RunConfig) -> None:
    embeddings = _load_embeddings(args.embeddings, args.input_format)
    datasets: list[SimilarityDataset] = []
    for name, path, preset in map(_dataset_spec, args.datasets):
        fmt = preset or BenchmarkFormat(score_column=args.score_column, has_header=args.header)
        datasets.append(load_similarity_dataset(path, fmt, name=name, lowercase=args.lowercase_datasets))
    report = evaluate_similarity(embeddings, datasets)
    write_similarity_report(report, args.report, version_and_provenance(run_config, _inputs(args)))


def _cmd_noise(args: argparse.Namespace, run_config: RunConfig) -> None:
    embeddings = _load_embeddings(args.embeddings, args.input_format)
    lexicon = _load_lexicon(args)
    ks = sorted(set(args.ks)) if args.ks else [args.k]
    reports = noise_curve(embeddings, lexicon, ks, dims=args.dims, threads=run_config.threads)
    write_noise_report(reports, args.report, version_and_provenance(run_config, _inputs(args)))


def _cmd_neighbors(args: argparse.Namespace, run_config: RunConfig) -> None:
    variants: list[tuple[str, EmbeddingSet]] = [
        (label, _load_embeddings(path, args.input_format)) for label, path in map(_labelled_path, args.embeddings)
    ]
    if args.lexicon_space:
        variants.append(("lexicon", _load_lexicon(args).as_embeddings()))
    for label, embeddings in variants:
        for word in args.word:
            found = knn(embeddings, word, args.k)
            cells = " ".join(f"{neighbor}:{score:.4f}" for neighbor, score in found)
            sys.stdout.write(f"{label}\t{word}\t{cells}\n")
    sys.stdout.flush()


def _cmd_serve(args: argparse.Namespace, run_config: RunConfig) -> None:
    import uvicorn

    from affembed.service import create_app

    embeddings = _load_embeddings(args.embeddings, args.input_format)
    lexicon = _load_lexicon(args) if args.lexicon else None
    app = create_app(embeddings, lexicon)
    uvicorn.run(app, host=args.host, port=args.port, log_level=run_config.log_level.lower())


def _cmd_version(args: argparse.Namespace, run_config: RunConfig) -> None:
    sys.stdout.write(f"affembed {__version__}\n")


_COMMANDS = {
    "enrich": _cmd_enrich,
    "retrofit": _cmd_retrofit,
    "eval-sim": _cmd_eval_sim,
    "noise": _cmd_noise,
    "neighbors": _cmd_neighbors,
    "serve": _cmd_serve,
    "version": _cmd_version,
}


# ── Entry points ──────────────────────────────────────────────────────────


def _configure(args: argparse.Namespace) -> RunConfig:
    log_level = resolve_log_level(args.log_level)
    logging.basicConfig(level=log_level, format=LOG_FORMAT, stream=sys.stderr, force=True)
    try:
        threads = resolve_threads(args.threads)
    except InvalidConfig as exc:
        raise UsageError(exc.detail)
    options = dict(vars(args), threads=threads, log_level=log_level)
    return RunConfig.from_options(args.command, options)


def run(argv: Sequence[str] | None = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    try:
        load_environment()
        parser = build_parser()
        _apply_config_file(parser, argv)
        args = parser.parse_args(argv)
        run_config = _configure(args)
        init_sentry()
        _validate(args)
        logger.debug("Running %s with config %s", args.command, run_config.config_hash())
        _COMMANDS[args.command](args, run_config)
    except SystemExit as exc:  # --help
        return exc.code if isinstance(exc.code, int) else EXIT_OK
    except AffembedError as exc:
        sys.stderr.write(f"affembed: error: {exc.detail}\n")
        return exc.exit_code
    except OSError as exc:
        sys.stderr.write(f"affembed: error: {exc}\n")
        return EXIT_IO_ERROR
    return EXIT_OK


def main() -> None:
    sys.exit(run())
