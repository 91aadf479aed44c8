"""
Unit tests for similarity evaluation, nearest neighbors and affect noise metrics.
"""

import math

import numpy as np
import pytest

import affembed.evaluation as evaluation_module
from affembed.config import BENCHMARK_PRESETS, BenchmarkFormat
from affembed.embedding_io import EmbeddingSet
from affembed.errors import (
    DataError,
    DatasetEmptyAfterFiltering,
    InvalidConfig,
    LengthMismatch,
    ParseError,
    TooFewRows,
    UnknownWord,
    ZeroVariance,
    ZeroVector,
)
from affembed.evaluation import (
    Polarity,
    SimilarityDataset,
    cosine,
    evaluate_similarity,
    granular_noise_at_k,
    knn,
    load_similarity_dataset,
    noise_curve,
    noise_report,
    polarity,
    polarity_noise_at_k,
    spearman,
)
from affembed.lexicon import AffectLexicon


def average_ranks(values):
    order = sorted(range(len(values)), key=lambda i: values[i])
    ranks = [0.0] * len(values)
    i = 0
    while i < len(order):
        j = i
        while j + 1 < len(order) and values[order[j + 1]] == values[order[i]]:
            j += 1
        for t in range(i, j + 1):
            ranks[order[t]] = (i + j) / 2 + 1
        i = j + 1
    return ranks


def rank_then_pearson(xs, ys):
    rx, ry = average_ranks(xs), average_ranks(ys)
    mx, my = sum(rx) / len(rx), sum(ry) / len(ry)
    cov = sum((a - mx) * (b - my) for a, b in zip(rx, ry))
    return cov / math.sqrt(sum((a - mx) ** 2 for a in rx) * sum((b - my) ** 2 for b in ry))


def circle(angles):
    rad = np.radians(angles)
    return np.column_stack([np.cos(rad), np.sin(rad)])


# Eight rated words on the unit circle plus an unrated one that must never count
# as a neighbor. Valence relative to the neutral 5: + + - + - 0 - -
FIXTURE_ANGLES = {"w0": 0, "w1": 10, "w2": 25, "w3": 45, "w4": 70, "w5": 100, "w6": 135, "w7": 180, "the": 5}
FIXTURE_VALENCE = {"w0": 8, "w1": 7, "w2": 3, "w3": 6, "w4": 2, "w5": 5, "w6": 4, "w7": 1}


def noise_fixture():
    emb = EmbeddingSet(list(FIXTURE_ANGLES), circle(list(FIXTURE_ANGLES.values())))
    entries = {w: [float(v), 5.0, 5.0] for w, v in FIXTURE_VALENCE.items()}
    entries["absent"] = [9.0, 9.0, 9.0]
    return emb, AffectLexicon.from_entries(entries)


def exhaustive_noise(emb, lexicon, k, dim):
    pool = [w for w in emb.vocab if w in lexicon]
    neutral = lexicon.neutral[dim]
    pn, gn = [], []
    for word in pool:
        found = [n for n, _ in knn(emb, word, k, candidate_filter=pool)]
        a = lexicon.affect_vector(word)[dim]
        opposite = [
            n for n in found
            if (a - neutral) * (lexicon.affect_vector(n)[dim] - neutral) < 0
        ]
        pn.append(len(opposite) / len(found))
        gn.append(sum(abs(a - lexicon.affect_vector(n)[dim]) for n in found) / len(found))
    return sum(pn) / len(pn), sum(gn) / len(gn)


# ---------------------------------------------------------------------------
# Cosine and kNN
# ---------------------------------------------------------------------------

class TestCosine:
    def test_values(self):
        assert cosine([1, 0], [0, 1]) == 0.0
        assert cosine([1, 1], [2, 2]) == pytest.approx(1.0)
        assert cosine([1, 0], [-3, 0]) == -1.0

    def test_zero_vector(self):
        with pytest.raises(ZeroVector):
            cosine([0, 0], [1, 0])


class TestKnn:
    def test_matches_brute_force(self):
        rng = np.random.default_rng(1)
        vocab = [f"w{i}" for i in range(60)]
        emb = EmbeddingSet(vocab, rng.normal(size=(60, 8)))
        for word in ("w0", "w17", "w59"):
            i = emb.index[word]
            scores = [(cosine(emb.matrix[i], emb.matrix[j]), -j) for j in range(60) if j != i]
            expected = [vocab[-j] for _, j in sorted(scores, reverse=True)[:7]]
            assert [w for w, _ in knn(emb, word, 7)] == expected

    def test_ties_broken_by_vocabulary_index(self):
        emb = EmbeddingSet(["q", "c", "a", "b"], [[1.0, 0.0], [0.0, 1.0], [0.0, 1.0], [1.0, 0.0]])
        assert [w for w, _ in knn(emb, "q", 3)] == ["b", "c", "a"]

    def test_excludes_self_and_zero_vectors(self):
        emb = EmbeddingSet(["q", "zero", "x"], [[1.0, 0.0], [0.0, 0.0], [0.5, 0.5]])
        assert [w for w, _ in knn(emb, "q", 5)] == ["x"]

    def test_candidate_filter(self):
        emb = EmbeddingSet(["q", "near", "far"], [[1.0, 0.0], [1.0, 0.1], [0.0, 1.0]])
        assert [w for w, _ in knn(emb, "q", 1, candidate_filter={"far"})] == ["far"]

    def test_unknown_word(self):
        emb = EmbeddingSet(["a"], [[1.0]])
        with pytest.raises(UnknownWord):
            knn(emb, "b", 3)

    def test_fewer_candidates_than_k(self):
        emb = EmbeddingSet(["a", "b"], np.eye(2))
        assert len(knn(emb, "a", 10)) == 1


# ---------------------------------------------------------------------------
# Spearman
# ---------------------------------------------------------------------------

class TestSpearman:
    def test_matches_rank_then_pearson_with_ties(self):
        rng = np.random.default_rng(0)
        for _ in range(100):
            n = int(rng.integers(3, 40))
            xs = rng.integers(0, 6, n).astype(float).tolist()
            ys = rng.integers(0, 6, n).astype(float).tolist()
            if len(set(xs)) == 1 or len(set(ys)) == 1:
                continue
            assert spearman(xs, ys) == pytest.approx(rank_then_pearson(xs, ys), abs=1e-12)

    def test_monotone(self):
        xs = [0.1, 0.5, 0.7, 2.0, 3.3]
        assert spearman(xs, [1, 2, 3, 40, 50]) == pytest.approx(1.0)
        assert spearman(xs, [9, 8, 7, 1, 0]) == pytest.approx(-1.0)

    def test_length_mismatch(self):
        with pytest.raises(LengthMismatch):
            spearman([1, 2, 3], [1, 2])

    def test_too_short(self):
        with pytest.raises(TooFewRows):
            spearman([1.0], [2.0])

    def test_constant_input(self):
        with pytest.raises(ZeroVariance):
            spearman([1, 1, 1], [1, 2, 3])

    def test_symmetric_bounded_and_rank_invariant(self):
        rng = np.random.default_rng(11)
        for _ in range(50):
            n = int(rng.integers(5, 60))
            x = rng.normal(size=n)
            y = np.round(rng.uniform(0.1, 5.0, n), 1)
            rho = spearman(x, y)
            assert spearman(y, x) == pytest.approx(rho, abs=1e-12)
            assert -1.0 <= rho <= 1.0
            assert spearman(np.exp(x), y**3 + y) == pytest.approx(rho, abs=1e-12)


# ---------------------------------------------------------------------------
# Similarity benchmarks
# ---------------------------------------------------------------------------

class TestSimilarity:
    def embeddings(self):
        return EmbeddingSet(
            ["cat", "dog", "car", "tree"],
            [[1.0, 0.1, 0.0], [0.9, 0.2, 0.1], [0.0, 1.0, 0.2], [0.1, 0.1, 1.0]],
        )

    def test_skips_out_of_vocabulary_pairs(self):
        dataset = SimilarityDataset("toy", (
            ("cat", "dog", 9.0), ("cat", "car", 1.0), ("dog", "tree", 3.0), ("cat", "zebra", 5.0),
        ))
        score = evaluate_similarity(self.embeddings(), [dataset])["toy"]
        assert (score.used, score.skipped, score.total) == (3, 1, 4)
        assert score.rho == pytest.approx(1.0)

    def test_all_pairs_out_of_vocabulary(self):
        dataset = SimilarityDataset("oov", (("x", "y", 1.0), ("y", "z", 2.0)))
        with pytest.raises(DatasetEmptyAfterFiltering):
            evaluate_similarity(self.embeddings(), [dataset])

    def test_nan_score_rejected(self):
        with pytest.raises(DataError):
            SimilarityDataset("bad", (("a", "b", float("nan")),))

    def test_load_plain(self, tmp_path):
        path = tmp_path / "toy.txt"
        path.write_text("cat dog 9.0\n\ncat\tcar 2\n")
        dataset = load_similarity_dataset(path)
        assert dataset.name == "toy"
        assert dataset.pairs == (("cat", "dog", 9.0), ("cat", "car", 2.0))

    def test_load_simlex_preset(self, tmp_path):
        path = tmp_path / "SimLex-999.txt"
        path.write_text(
            "word1\tword2\tPOS\tSimLex999\tconc(w1)\n"
            "old\tnew\tA\t1.58\t2.72\n"
            "Smart\tintelligent\tA\t9.2\t1.75\n"
        )
        dataset = load_similarity_dataset(path, BENCHMARK_PRESETS["simlex999"], name="simlex999", lowercase=True)
        assert dataset.pairs == (("old", "new", 1.58), ("smart", "intelligent", 9.2))

    def test_load_header_and_score_column(self, tmp_path):
        path = tmp_path / "toy.csv"
        path.write_text("a,b,id,score\nx,y,1,3.5\n")
        dataset = load_similarity_dataset(path, BenchmarkFormat(score_column=3, has_header=True, delimiter=","))
        assert dataset.pairs == (("x", "y", 3.5),)

    def test_bad_score(self, tmp_path):
        path = tmp_path / "toy.txt"
        path.write_text("a b 1\nc d high\n")
        with pytest.raises(ParseError) as exc:
            load_similarity_dataset(path)
        assert exc.value.line == 2

    def test_missing_columns(self, tmp_path):
        path = tmp_path / "toy.txt"
        path.write_text("a b\n")
        with pytest.raises(ParseError):
            load_similarity_dataset(path)

    def test_invalid_utf8_reports_its_own_line(self, tmp_path):
        path = tmp_path / "toy.txt"
        pairs = b"".join(b"a%d b%d %d\n" % (i, i, i) for i in range(2000))
        path.write_bytes(b"\xef\xbb\xbf" + pairs + b"r\xe9sum\xe9 cv 4\n")
        with pytest.raises(ParseError) as exc:
            load_similarity_dataset(path)
        assert exc.value.line == 2001


# ---------------------------------------------------------------------------
# Affect noise
# ---------------------------------------------------------------------------

class TestPolarity:
    def test_relative_to_neutral(self):
        assert polarity(7.2, 5.0) is Polarity.POSITIVE
        assert polarity(2.0, 5.0) is Polarity.NEGATIVE
        assert polarity(5.0, 5.0) is Polarity.NEUTRAL


class TestNoise:
    def test_fixture_at_k2(self):
        emb, lex = noise_fixture()
        report = noise_report(emb, lex, 2)
        assert report.dimensions == ("valence", "arousal", "dominance")
        assert report.pn == (0.4375, 0.0, 0.0)
        assert report.gn == (2.9375, 0.0, 0.0)
        assert (report.evaluated, report.skipped) == (8, 0)

    def test_fixture_at_k1(self):
        emb, lex = noise_fixture()
        assert polarity_noise_at_k(emb, lex, 1, "valence") == 0.375
        assert granular_noise_at_k(emb, lex, 1, "valence") == 2.5

    def test_valence_ordered_space_beats_shuffled(self):
        vocab = [f"w{i}" for i in range(20)]
        theta = np.linspace(0.0, 0.9 * np.pi, 20)
        ordered_rows = np.column_stack([np.cos(theta), np.sin(theta)])
        lex = AffectLexicon.from_entries(
            {w: [float(v), 5.0, 5.0] for w, v in zip(vocab, np.linspace(1.0, 9.0, 20))}
        )
        ordered = EmbeddingSet(vocab, ordered_rows)
        shuffled = EmbeddingSet(vocab, ordered_rows[np.random.default_rng(3).permutation(20)])
        assert granular_noise_at_k(ordered, lex, 3, "valence") < granular_noise_at_k(shuffled, lex, 3, "valence")

    def test_fixture_matches_exhaustive_recomputation(self):
        emb, lex = noise_fixture()
        for k in (1, 2, 3, 5, 7):
            report = noise_report(emb, lex, k, dims=["valence"])
            assert (report.pn[0], report.gn[0]) == exhaustive_noise(emb, lex, k, 0)

    def test_curve_equals_separate_reports(self):
        emb, lex = noise_fixture()
        curve = noise_curve(emb, lex, [1, 2, 4])
        for report in curve:
            assert report == noise_report(emb, lex, report.k)

    def test_curve_rejects_unsorted(self):
        emb, lex = noise_fixture()
        with pytest.raises(InvalidConfig):
            noise_curve(emb, lex, [5, 2])

    def test_bounds_on_random_fixtures(self):
        rng = np.random.default_rng(17)
        for _ in range(20):
            n = int(rng.integers(3, 30))
            vocab = [f"w{i}" for i in range(n)]
            emb = EmbeddingSet(vocab, rng.normal(size=(n, 4)))
            lex = AffectLexicon.from_entries(
                {w: rng.uniform(1, 9, 3).round(1).tolist() for w in vocab if rng.random() < 0.8}
                or {vocab[0]: [5.0, 5.0, 5.0]}
            )
            report = noise_report(emb, lex, int(rng.integers(1, 10)))
            for pn, gn in zip(report.pn, report.gn):
                if report.evaluated:
                    assert 0.0 <= pn <= 1.0
                    assert 0.0 <= gn <= 8.0

    def test_zero_vector_words_are_skipped(self):
        emb = EmbeddingSet(["a", "b", "c"], [[1.0, 0.0], [0.9, 0.1], [0.0, 0.0]])
        lex = AffectLexicon.from_entries({"a": [7.0, 5.0, 5.0], "b": [3.0, 5.0, 5.0], "c": [9.0, 5.0, 5.0]})
        report = noise_report(emb, lex, 2)
        assert (report.evaluated, report.skipped) == (2, 1)
        assert report.pn[0] == 1.0
        assert report.gn[0] == 4.0

    def test_single_lexicon_word_has_nothing_to_compare(self):
        emb = EmbeddingSet(["a", "b"], np.eye(2))
        lex = AffectLexicon.from_entries({"a": [7.0, 5.0, 5.0]})
        report = noise_report(emb, lex, 3)
        assert (report.evaluated, report.skipped) == (0, 1)
        assert all(math.isnan(v) for v in report.pn)

    def test_thread_count_does_not_change_result(self, monkeypatch):
        monkeypatch.setattr(evaluation_module, "KNN_CHUNK_ROWS", 3)
        rng = np.random.default_rng(4)
        vocab = [f"w{i}" for i in range(25)]
        emb = EmbeddingSet(vocab, rng.normal(size=(25, 6)))
        lex = AffectLexicon.from_entries({w: rng.uniform(1, 9, 3).tolist() for w in vocab})
        assert noise_report(emb, lex, 4, threads=1) == noise_report(emb, lex, 4, threads=3)
