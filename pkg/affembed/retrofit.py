"""
Retrofitting over a semantic ontology, with optional Affect-STRENGTH edge weights.

Each sweep visits the vocabulary in order and moves every word that has
in-vocabulary neighbors to

    q_i = (sum_j beta'_ij q_j + alpha q_hat_i) / (sum_j beta'_ij + alpha)

using neighbors already updated in the same sweep (Gauss-Seidel). With affect
strength enabled, beta'_ij = beta_ij * S(a_i, a_j).
"""

import logging
import re
from collections.abc import Callable, Iterable
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from scipy import sparse

from affembed._compat import StrEnum
from affembed.config import DEFAULT_ALPHA, DEFAULT_ITERATIONS
from affembed.embedding_io import EmbeddingSet
from affembed.errors import EmbeddingIOError, InvalidConfig, MissingLexicon, ShapeMismatch
from affembed.fileio import decoded_lines
from affembed.lexicon import AffectLexicon, AffectScale

logger = logging.getLogger(__name__)


# ── Ontology ──────────────────────────────────────────────────────────────


class Ontology:
    """Undirected word graph without self-loops or duplicate edges."""

    def __init__(self) -> None:
        self._adjacency: dict[str, dict[str, None]] = {}

    @classmethod
    def from_edges(cls, edges: Iterable[tuple[str, str]]) -> "Ontology":
        graph = cls()
        for a, b in edges:
            graph.add_edge(a, b)
        return graph

    def add_edge(self, a: str, b: str) -> bool:
        """Add a–b; returns False for self-loops, which are never stored."""
        if a == b:
            return False
        self._adjacency.setdefault(a, {})[b] = None
        self._adjacency.setdefault(b, {})[a] = None
        return True

    def neighbors(self, word: str) -> tuple[str, ...]:
        return tuple(self._adjacency.get(word, ()))

    def __contains__(self, word: object) -> bool:
        return word in self._adjacency

    def __len__(self) -> int:
        return len(self._adjacency)

    @property
    def edge_count(self) -> int:
        return sum(len(nbrs) for nbrs in self._adjacency.values()) // 2


def load_ontology(path: str | Path, lowercase: bool = False) -> Ontology:
    """
    One line per head word: `head neighbor1 neighbor2 ...`, whitespace-separated.
    Blank lines are skipped; repeated pairs collapse; self-loops are dropped.
    """
    path = Path(path)
    graph = Ontology()
    dropped = 0
    try:
        with open(path, "rb") as handle:
            for line_no, line in enumerate(decoded_lines(handle, path), start=1):
                words = line.split()
                if lowercase:
                    words = [w.lower() for w in words]
                if not words:
                    continue
                head, *rest = words
                for neighbor in rest:
                    if not graph.add_edge(head, neighbor):
                        dropped += 1
                        logger.warning("%s:%d: dropped self-loop on '%s'", path, line_no, head)
    except OSError as exc:
        raise EmbeddingIOError(path, exc.strerror or str(exc))

    logger.info(
        "Loaded ontology %s: %d words, %d edges (%d self-loops dropped)",
        path, len(graph), graph.edge_count, dropped,
    )
    return graph


# ── Affect strength ───────────────────────────────────────────────────────


def cstrength(a_i: np.ndarray, a_j: np.ndarray, scale: AffectScale) -> np.ndarray | float:
    """
    1 - ||a_i - a_j|| / sqrt(sum_f max_dist_f^2), in [0, 1]. Broadcasts over leading axes.
    """
    a_i, a_j = np.asarray(a_i, dtype=np.float64), np.asarray(a_j, dtype=np.float64)
    n_dims = np.broadcast_shapes(a_i.shape, a_j.shape)[-1]
    diff = a_i - a_j
    distance = np.sqrt(np.sum(diff * diff, axis=-1))
    limit = np.sqrt(np.sum(np.full(n_dims, scale.max_dist) ** 2))
    result = np.clip(1.0 - distance / limit, 0.0, 1.0)
    return float(result) if result.ndim == 0 else result


def istrength(a_i: np.ndarray, a_j: np.ndarray, scale: AffectScale) -> np.ndarray | float:
    """Sum over dimensions of 1 - |a_if - a_jf| / max_dist_f, in [0, F]."""
    a_i, a_j = np.asarray(a_i, dtype=np.float64), np.asarray(a_j, dtype=np.float64)
    n_dims = np.broadcast_shapes(a_i.shape, a_j.shape)[-1]
    per_dim = 1.0 - np.abs(a_i - a_j) / scale.max_dist
    result = np.clip(np.sum(per_dim, axis=-1), 0.0, float(n_dims))
    return float(result) if result.ndim == 0 else result


class Strength(StrEnum):
    NONE = "none"
    CSTRENGTH = "c"
    ISTRENGTH = "i"

    def bound(self, n_dims: int) -> float:
        return float(n_dims) if self is Strength.ISTRENGTH else 1.0

    def __call__(self, a_i: np.ndarray, a_j: np.ndarray, scale: AffectScale) -> np.ndarray | float:
        if self is Strength.CSTRENGTH:
            return cstrength(a_i, a_j, scale)
        if self is Strength.ISTRENGTH:
            return istrength(a_i, a_j, scale)
        shape = np.broadcast_shapes(np.shape(a_i), np.shape(a_j))[:-1]
        return 1.0 if not shape else np.ones(shape)


# ── Configuration ─────────────────────────────────────────────────────────


class BetaRule(StrEnum):
    INVERSE_DEGREE = "inverse-degree"
    CONSTANT = "const"


_CONST_BETA_RE = re.compile(r"^const:(?P<value>.+)$")


@dataclass(frozen=True)
class RetrofitConfig:
    alpha: float = DEFAULT_ALPHA
    beta_rule: BetaRule = BetaRule.INVERSE_DEGREE
    beta_constant: float = 1.0
    strength: Strength = Strength.NONE
    iterations: int = DEFAULT_ITERATIONS
    convergence_tol: float | None = None
    jacobi: bool = False

    def __post_init__(self) -> None:
        if not self.alpha > 0:
            raise InvalidConfig(f"alpha must be > 0, got {self.alpha}")
        if self.beta_rule is BetaRule.CONSTANT and not self.beta_constant > 0:
            raise InvalidConfig(f"constant beta must be > 0, got {self.beta_constant}")
        if self.iterations < 1:
            raise InvalidConfig(f"iterations must be >= 1, got {self.iterations}")
        if self.convergence_tol is not None and not self.convergence_tol > 0:
            raise InvalidConfig(f"convergence tolerance must be > 0, got {self.convergence_tol}")

    @staticmethod
    def parse_beta(text: str) -> tuple[BetaRule, float]:
        """`inverse-degree` or `const:<value>`."""
        if text == BetaRule.INVERSE_DEGREE:
            return BetaRule.INVERSE_DEGREE, 1.0
        match = _CONST_BETA_RE.match(text)
        if match:
            try:
                return BetaRule.CONSTANT, float(match["value"])
            except ValueError:
                pass
        raise InvalidConfig(f"beta must be 'inverse-degree' or 'const:<number>', got '{text}'")


# ── Edge weights ──────────────────────────────────────────────────────────


@dataclass(frozen=True)
class _Graph:
    """In-vocabulary adjacency of every word that gets updated, in vocabulary order."""

    targets: np.ndarray          # row indices of words with >= 1 in-vocabulary neighbor
    neighbors: list[np.ndarray]  # neighbor rows per target
    base: np.ndarray             # beta rule weight b_i per target
    strength: list[np.ndarray]   # s_ij per target (ones without strength)

    def weights(self, t: int) -> np.ndarray:
        return self.base[t] * self.strength[t]


def _build_graph(
    embeddings: EmbeddingSet,
    ontology: Ontology,
    config: RetrofitConfig,
    lexicon: AffectLexicon | None,
) -> _Graph:
    if config.strength is not Strength.NONE and lexicon is None:
        raise MissingLexicon()
    affect = lexicon.affect_matrix(embeddings.vocab) if lexicon is not None else None

    targets: list[int] = []
    neighbors: list[np.ndarray] = []
    base: list[float] = []
    strength: list[np.ndarray] = []
    for i, word in enumerate(embeddings.vocab):
        rows = [embeddings.index[n] for n in ontology.neighbors(word) if n in embeddings.index]
        if not rows:
            continue
        nbr = np.array(rows, dtype=np.intp)
        targets.append(i)
        neighbors.append(nbr)
        base.append(
            1.0 / len(rows) if config.beta_rule is BetaRule.INVERSE_DEGREE else config.beta_constant
        )
        if affect is None or config.strength is Strength.NONE:
            strength.append(np.ones(len(rows)))
        else:
            strength.append(np.atleast_1d(config.strength(affect[i], affect[nbr], lexicon.scale)))

    return _Graph(
        targets=np.array(targets, dtype=np.intp),
        neighbors=neighbors,
        base=np.array(base, dtype=np.float64),
        strength=strength,
    )


# ── Retrofitting ──────────────────────────────────────────────────────────


SweepCallback = Callable[[int, np.ndarray], None]


def _gauss_seidel_sweep(q: np.ndarray, q_hat: np.ndarray, graph: _Graph, alpha: float) -> float:
    max_shift = 0.0
    for t, i in enumerate(graph.targets):
        w = graph.weights(t)
        updated = (w @ q[graph.neighbors[t]] + alpha * q_hat[i]) / (w.sum() + alpha)
        max_shift = max(max_shift, float(np.linalg.norm(updated - q[i])))
        q[i] = updated
    return max_shift


def _jacobi_operator(graph: _Graph, n_words: int) -> tuple[sparse.csr_matrix, np.ndarray]:
    rows = np.concatenate([np.full(len(n), t) for t, n in enumerate(graph.neighbors)])
    cols = np.concatenate(graph.neighbors)
    data = np.concatenate([graph.weights(t) for t in range(len(graph.targets))])
    weights = sparse.csr_matrix((data, (rows, cols)), shape=(len(graph.targets), n_words))
    return weights, np.asarray(weights.sum(axis=1)).ravel()


def retrofit(
    embeddings: EmbeddingSet,
    ontology: Ontology,
    config: RetrofitConfig = RetrofitConfig(),
    lexicon: AffectLexicon | None = None,
    on_sweep: SweepCallback | None = None,
) -> EmbeddingSet:
    """
    Retrofit `embeddings` to `ontology`. Words without in-vocabulary neighbors keep
    their vectors; vocabulary and width are unchanged.

    `on_sweep(sweep, matrix)` is called after every sweep with a read-only view.
    `config.jacobi` updates all words from the previous sweep at once (vectorized);
    it reaches the same fixed point along a different path.
    """
    graph = _build_graph(embeddings, ontology, config, lexicon)
    q_hat = embeddings.matrix
    q = q_hat.copy()
    logger.info(
        "Retrofitting %d of %d words (%s sweep, beta=%s, strength=%s, %d iterations)",
        len(graph.targets), len(embeddings), "Jacobi" if config.jacobi else "Gauss-Seidel",
        config.beta_rule, config.strength, config.iterations,
    )
    if not len(graph.targets):
        logger.warning("No vocabulary word has an in-vocabulary ontology neighbor; vectors unchanged")
        return embeddings.with_matrix(q)

    if config.jacobi:
        weights, totals = _jacobi_operator(graph, len(embeddings))
        denominators = (totals + config.alpha)[:, None]

    for sweep in range(1, config.iterations + 1):
        if config.jacobi:
            updated = (weights @ q + config.alpha * q_hat[graph.targets]) / denominators
            max_shift = float(np.linalg.norm(updated - q[graph.targets], axis=1).max())
            q[graph.targets] = updated
        else:
            max_shift = _gauss_seidel_sweep(q, q_hat, graph, config.alpha)
        logger.debug("Sweep %d: max per-word update %.3e", sweep, max_shift)

        if on_sweep is not None:
            view = q.view()
            view.setflags(write=False)
            on_sweep(sweep, view)

        if config.convergence_tol is not None and max_shift < config.convergence_tol:
            logger.info("Converged after %d sweep(s) (max update %.3e)", sweep, max_shift)
            break

    return embeddings.with_matrix(q)


# ── Objective ─────────────────────────────────────────────────────────────


class ObjectiveForm(StrEnum):
    # anchor terms with alpha, every edge counted once from each endpoint with its beta'
    DIRECTED = "directed"
    # anchor terms with alpha / b_i, every undirected edge once with its strength s_ij;
    # each sweep update is the exact minimizer of this form along q_i
    SWEEP = "sweep"


def objective(
    original: EmbeddingSet,
    current: EmbeddingSet,
    ontology: Ontology,
    config: RetrofitConfig = RetrofitConfig(),
    lexicon: AffectLexicon | None = None,
    form: ObjectiveForm = ObjectiveForm.DIRECTED,
) -> float:
    """Retrofitting objective of `current` relative to `original`."""
    if original.vocab != current.vocab or original.dim != current.dim:
        raise ShapeMismatch(
            f"objective needs matching vocabularies and widths "
            f"({len(original)}x{original.dim} vs {len(current)}x{current.dim})"
        )
    graph = _build_graph(original, ontology, config, lexicon)
    q_hat, q = original.matrix, current.matrix

    anchor = np.sum((q - q_hat) ** 2, axis=1)
    coefficient = np.full(len(original), config.alpha)
    if form is ObjectiveForm.SWEEP:
        coefficient[graph.targets] = config.alpha / graph.base
    total = float(coefficient @ anchor)

    for t, i in enumerate(graph.targets):
        distances = np.sum((q[i] - q[graph.neighbors[t]]) ** 2, axis=1)
        if form is ObjectiveForm.SWEEP:
            total += 0.5 * float(graph.strength[t] @ distances)
        else:
            total += float(graph.weights(t) @ distances)
    return total
