"""
Unit tests for retrofitting and Affect-STRENGTH.

The oracle assembles the fixed-point linear system of the sweep update directly,
solves it with numpy and compares it with the sweep limit.
"""

import logging
import math

import numpy as np
import pytest

from affembed.embedding_io import EmbeddingSet
from affembed.errors import EmbeddingIOError, InvalidConfig, MissingLexicon, ParseError, ShapeMismatch
from affembed.lexicon import AffectLexicon, AffectScale
from affembed.retrofit import (
    BetaRule,
    ObjectiveForm,
    Ontology,
    RetrofitConfig,
    Strength,
    cstrength,
    istrength,
    load_ontology,
    objective,
    retrofit,
)

SCALE = AffectScale(1.0, 9.0)


def hand_strength(kind, a, b):
    if kind is Strength.CSTRENGTH:
        return 1.0 - math.dist(a, b) / math.sqrt(len(a) * 8.0**2)
    if kind is Strength.ISTRENGTH:
        return sum(1.0 - abs(x - y) / 8.0 for x, y in zip(a, b))
    return 1.0


def linear_system_solution(emb, edges, lexicon, rule, constant, kind, alpha=1.0):
    n = len(emb)
    neighbors = {i: set() for i in range(n)}
    for a, b in edges:
        neighbors[a].add(b)
        neighbors[b].add(a)
    A = np.eye(n)
    rhs = np.array(emb.matrix)
    for i in range(n):
        if not neighbors[i]:
            continue
        base = 1.0 / len(neighbors[i]) if rule is BetaRule.INVERSE_DEGREE else constant
        A[i, i] = alpha
        rhs[i] = alpha * emb.matrix[i]
        for j in neighbors[i]:
            w = base * hand_strength(
                kind, lexicon.affect_vector(emb.vocab[i]), lexicon.affect_vector(emb.vocab[j])
            )
            A[i, i] += w
            A[i, j] -= w
    return np.linalg.solve(A, rhs)


def random_instance(rng):
    n = int(rng.integers(2, 7))
    dim = int(rng.integers(1, 5))
    vocab = [f"w{i}" for i in range(n)]
    emb = EmbeddingSet(vocab, rng.normal(size=(n, dim)))
    pairs = [(i, j) for i in range(n) for j in range(i + 1, n)]
    keep = rng.random(len(pairs)) < 0.5
    edges = [p for p, k in zip(pairs, keep) if k] or [pairs[0]]
    ontology = Ontology.from_edges((vocab[a], vocab[b]) for a, b in edges)
    ontology.add_edge(vocab[0], "not-in-vocab")
    rated = {vocab[i]: rng.uniform(1.0, 9.0, 3).tolist() for i in range(n) if rng.random() < 0.7}
    lexicon = AffectLexicon.from_entries(rated or {"unused": [5.0, 5.0, 5.0]})
    return emb, edges, ontology, lexicon


def two_words():
    emb = EmbeddingSet(["w1", "w2"], [[0.0], [2.0]])
    return emb, Ontology.from_edges([("w1", "w2")])


# ---------------------------------------------------------------------------
# Ontology
# ---------------------------------------------------------------------------

class TestOntology:
    def test_dedup_and_symmetry(self, tmp_path):
        path = tmp_path / "onto.txt"
        path.write_text("good nice fine\nnice good\n")
        graph = load_ontology(path)
        assert graph.edge_count == 2
        assert set(graph.neighbors("good")) == {"nice", "fine"}
        assert graph.neighbors("fine") == ("good",)

    def test_self_loop_dropped_with_warning(self, tmp_path, caplog):
        path = tmp_path / "onto.txt"
        path.write_text("a a\n")
        with caplog.at_level(logging.WARNING, logger="affembed.retrofit"):
            graph = load_ontology(path)
        assert graph.edge_count == 0
        assert "self-loop" in caplog.text

    def test_empty_file(self, tmp_path):
        path = tmp_path / "onto.txt"
        path.write_text("")
        assert len(load_ontology(path)) == 0

    def test_lowercase(self, tmp_path):
        path = tmp_path / "onto.txt"
        path.write_text("Good Nice\n")
        assert "good" in load_ontology(path, lowercase=True)

    def test_missing_file(self, tmp_path):
        with pytest.raises(EmbeddingIOError):
            load_ontology(tmp_path / "missing.txt")

    def test_invalid_utf8_reports_its_own_line(self, tmp_path):
        path = tmp_path / "onto.txt"
        lines = b"".join(b"w%d s%d\n" % (i, i) for i in range(2000))
        path.write_bytes(lines + b"na\xefve naive\n")
        with pytest.raises(ParseError) as exc:
            load_ontology(path)
        assert exc.value.line == 2001


# ---------------------------------------------------------------------------
# Strength functions
# ---------------------------------------------------------------------------

class TestStrength:
    def test_identical(self):
        assert cstrength([4.0, 6.0, 2.0], [4.0, 6.0, 2.0], SCALE) == 1.0
        assert istrength([4.0, 6.0, 2.0], [4.0, 6.0, 2.0], SCALE) == 3.0

    def test_opposite_corners(self):
        assert cstrength([1, 1, 1], [9, 9, 9], SCALE) == pytest.approx(0.0, abs=1e-12)
        assert istrength([1, 1, 1], [9, 9, 9], SCALE) == pytest.approx(0.0, abs=1e-12)

    def test_hand_computed(self):
        assert cstrength([5, 5, 5], [7, 3, 5], SCALE) == pytest.approx(1 - math.sqrt(8) / math.sqrt(192), abs=1e-12)
        assert cstrength([5, 5, 5], [7, 3, 5], SCALE) == pytest.approx(0.7959, abs=1e-4)
        assert istrength([5, 5, 5], [7, 3, 5], SCALE) == pytest.approx(2.5, abs=1e-12)

    def test_symmetry_and_bounds(self):
        rng = np.random.default_rng(0)
        a, b = rng.uniform(1, 9, (200, 3)), rng.uniform(1, 9, (200, 3))
        np.testing.assert_array_equal(cstrength(a, b, SCALE), cstrength(b, a, SCALE))
        np.testing.assert_array_equal(istrength(a, b, SCALE), istrength(b, a, SCALE))
        assert ((cstrength(a, b, SCALE) >= 0) & (cstrength(a, b, SCALE) <= 1)).all()
        assert ((istrength(a, b, SCALE) >= 0) & (istrength(a, b, SCALE) <= 3)).all()

    def test_enum_dispatch(self):
        assert Strength.NONE([5, 5, 5], [9, 9, 9], SCALE) == 1.0
        assert Strength("i")([5, 5, 5], [7, 3, 5], SCALE) == pytest.approx(2.5)
        assert Strength.ISTRENGTH.bound(3) == 3.0


# ---------------------------------------------------------------------------
# Configuration
# ---------------------------------------------------------------------------

class TestRetrofitConfig:
    def test_parse_beta(self):
        assert RetrofitConfig.parse_beta("inverse-degree") == (BetaRule.INVERSE_DEGREE, 1.0)
        assert RetrofitConfig.parse_beta("const:0.5") == (BetaRule.CONSTANT, 0.5)

    @pytest.mark.parametrize("text", ["const:", "const:x", "degree", ""])
    def test_parse_beta_rejects(self, text):
        with pytest.raises(InvalidConfig):
            RetrofitConfig.parse_beta(text)

    @pytest.mark.parametrize(
        "kwargs",
        [{"alpha": 0.0}, {"iterations": 0}, {"beta_rule": BetaRule.CONSTANT, "beta_constant": -1.0},
         {"convergence_tol": 0.0}],
    )
    def test_invalid_values(self, kwargs):
        with pytest.raises(InvalidConfig):
            RetrofitConfig(**kwargs)


# ---------------------------------------------------------------------------
# Retrofitting
# ---------------------------------------------------------------------------

class TestRetrofit:
    def test_first_sweep_uses_updated_neighbors(self):
        emb, graph = two_words()
        out = retrofit(emb, graph, RetrofitConfig(iterations=1))
        np.testing.assert_allclose(out.matrix, [[1.0], [1.5]])

    def test_two_word_limit(self):
        emb, graph = two_words()
        out = retrofit(emb, graph, RetrofitConfig(iterations=200))
        np.testing.assert_allclose(out.matrix, [[2 / 3], [4 / 3]], atol=1e-12)

    def test_no_edges_is_identity(self):
        emb = EmbeddingSet(["a", "b"], [[1.0, 2.0], [3.0, 4.0]])
        out = retrofit(emb, Ontology())
        np.testing.assert_array_equal(out.matrix, emb.matrix)

    def test_words_without_neighbors_keep_vectors(self):
        emb = EmbeddingSet(["a", "b", "c"], [[1.0], [5.0], [9.0]])
        out = retrofit(emb, Ontology.from_edges([("a", "b"), ("c", "ghost")]))
        assert out.matrix[2, 0] == 9.0
        assert out.vocab == emb.vocab

    def test_matches_linear_system(self):
        rng = np.random.default_rng(42)
        for case in range(30):
            emb, edges, ontology, lexicon = random_instance(rng)
            rule = BetaRule.INVERSE_DEGREE if case % 2 else BetaRule.CONSTANT
            kind = [Strength.NONE, Strength.CSTRENGTH, Strength.ISTRENGTH][case % 3]
            constant = float(rng.uniform(0.5, 2.0))
            config = RetrofitConfig(
                beta_rule=rule, beta_constant=constant, strength=kind, iterations=2000, convergence_tol=1e-13
            )
            out = retrofit(emb, ontology, config, lexicon=lexicon)
            expected = linear_system_solution(emb, edges, lexicon, rule, constant, kind)
            np.testing.assert_allclose(out.matrix, expected, atol=1e-6)

    def test_jacobi_reaches_same_fixed_point(self):
        rng = np.random.default_rng(7)
        emb, _, ontology, lexicon = random_instance(rng)
        config = RetrofitConfig(strength=Strength.CSTRENGTH, iterations=2000)
        sequential = retrofit(emb, ontology, config, lexicon=lexicon)
        jacobi = retrofit(emb, ontology, RetrofitConfig(strength=Strength.CSTRENGTH, iterations=2000, jacobi=True),
                          lexicon=lexicon)
        np.testing.assert_allclose(jacobi.matrix, sequential.matrix, atol=1e-8)

    def test_neutral_strength_matches_plain(self):
        rng = np.random.default_rng(3)
        emb, _, ontology, _ = random_instance(rng)
        same = AffectLexicon.from_entries({w: [6.2, 3.1, 7.7] for w in emb.vocab})
        plain = retrofit(emb, ontology)
        weighted = retrofit(emb, ontology, RetrofitConfig(strength=Strength.CSTRENGTH), lexicon=same)
        np.testing.assert_allclose(weighted.matrix, plain.matrix, atol=1e-12)

    def test_strong_anchor_keeps_input(self):
        rng = np.random.default_rng(5)
        emb, _, ontology, _ = random_instance(rng)
        out = retrofit(emb, ontology, RetrofitConfig(alpha=1e6, beta_rule=BetaRule.CONSTANT, beta_constant=1.0))
        np.testing.assert_allclose(out.matrix, emb.matrix, rtol=1e-4, atol=1e-4)

    def test_strength_requires_lexicon(self):
        emb, graph = two_words()
        with pytest.raises(MissingLexicon):
            retrofit(emb, graph, RetrofitConfig(strength=Strength.CSTRENGTH))

    def test_convergence_tolerance_stops_early(self):
        emb, graph = two_words()
        sweeps = []
        out = retrofit(
            emb, graph, RetrofitConfig(iterations=500, convergence_tol=1e-9),
            on_sweep=lambda sweep, matrix: sweeps.append(sweep),
        )
        assert len(sweeps) < 500
        q1, q2 = out.matrix[:, 0]
        assert abs(q1 - (q2 + 0.0) / 2) < 1e-9
        assert abs(q2 - (q1 + 2.0) / 2) < 1e-9

    def test_on_sweep_view_is_read_only(self):
        emb, graph = two_words()

        def poke(sweep, matrix):
            with pytest.raises(ValueError):
                matrix[0, 0] = 100.0

        retrofit(emb, graph, RetrofitConfig(iterations=2), on_sweep=poke)

    def test_input_untouched(self):
        emb, graph = two_words()
        retrofit(emb, graph)
        np.testing.assert_array_equal(emb.matrix, [[0.0], [2.0]])


# ---------------------------------------------------------------------------
# Objective
# ---------------------------------------------------------------------------

class TestObjective:
    def test_no_edges_at_origin(self):
        emb = EmbeddingSet(["a"], [[1.0, 1.0]])
        assert objective(emb, emb, Ontology()) == 0.0

    def test_directed_occurrences(self):
        emb, graph = two_words()
        config = RetrofitConfig(beta_rule=BetaRule.CONSTANT, beta_constant=1.0)
        assert objective(emb, emb, graph, config) == 8.0

    def test_sweep_form_counts_each_edge_once(self):
        emb, graph = two_words()
        config = RetrofitConfig(beta_rule=BetaRule.CONSTANT, beta_constant=1.0)
        assert objective(emb, emb, graph, config, form=ObjectiveForm.SWEEP) == 4.0

    def test_descent_every_sweep(self):
        rng = np.random.default_rng(99)
        for case in range(25):
            emb, _, ontology, lexicon = random_instance(rng)
            config = RetrofitConfig(
                beta_rule=BetaRule.INVERSE_DEGREE if case % 2 else BetaRule.CONSTANT,
                beta_constant=float(rng.uniform(0.5, 2.0)),
                strength=[Strength.NONE, Strength.CSTRENGTH, Strength.ISTRENGTH][case % 3],
                iterations=30,
            )
            values = [objective(emb, emb, ontology, config, lexicon, form=ObjectiveForm.SWEEP)]
            retrofit(
                emb, ontology, config, lexicon=lexicon,
                on_sweep=lambda sweep, matrix: values.append(
                    objective(emb, emb.with_matrix(matrix), ontology, config, lexicon, form=ObjectiveForm.SWEEP)
                ),
            )
            assert len(values) == 31
            assert all(b <= a + 1e-9 for a, b in zip(values, values[1:]))

    def test_shape_mismatch(self):
        emb, graph = two_words()
        other = EmbeddingSet(["w1", "w2"], [[0.0, 1.0], [2.0, 3.0]])
        with pytest.raises(ShapeMismatch):
            objective(emb, other, graph)
