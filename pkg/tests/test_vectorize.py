import math

import numpy as np
import pytest

from tweetsent.vectorize import (
    NgramConfig,
    SparseVector,
    Vocabulary,
    concat_features,
    extract_char_ngrams,
    extract_word_ngrams,
    fit_vocabulary,
    load_vocabulary,
    save_vocabulary,
    stack_vectors,
    transform,
)


class TestWordNgrams:
    def test_unigrams_and_bigrams(self):
        counts = extract_word_ngrams(["a", "b", "a"], 2)
        assert counts == {"a": 2, "b": 1, "a b": 1, "b a": 1}

    def test_n_max_longer_than_sentence(self):
        counts = extract_word_ngrams(["x", "y"], 5)
        assert set(counts) == {"x", "y", "x y"}

    def test_empty_tokens(self):
        assert extract_word_ngrams([], 5) == {}


class TestCharNgrams:
    def test_counts(self):
        counts = extract_char_ngrams("aba", 2)
        assert counts == {"a": 2, "b": 1, "ab": 1, "ba": 1}

    def test_includes_spaces(self):
        counts = extract_char_ngrams("a b", 2)
        assert counts["a "] == 1 and counts[" b"] == 1

    def test_empty_text(self):
        assert extract_char_ngrams("", 6) == {}


class TestFitVocabulary:
    def test_idf_hand_computed(self):
        # Three documents; "solo" appears in one of them.
        # idf = ln((1 + 3) / (1 + 1)) + 1 = ln 2 + 1 = 1.6931...
        docs = [{"comun": 1, "solo": 1}, {"comun": 2}, {"comun": 1}]
        vocab = fit_vocabulary(docs)
        i = vocab.index["solo"]
        assert vocab.idf[i] == pytest.approx(1.6931, abs=1e-4)
        j = vocab.index["comun"]
        # Term in every document: ln(4/4) + 1 = 1.
        assert vocab.idf[j] == pytest.approx(1.0, abs=1e-12)

    def test_df_counts_documents_not_occurrences(self):
        docs = [{"x": 7}, {"y": 1}]
        vocab = fit_vocabulary(docs)
        assert vocab.idf[vocab.index["x"]] == pytest.approx(
            math.log(3 / 2) + 1, abs=1e-12
        )

    def test_indices_follow_sorted_terms(self):
        vocab = fit_vocabulary([{"zeta": 1, "alfa": 1, "media": 1}])
        assert vocab.index == {"alfa": 0, "media": 1, "zeta": 2}

    def test_empty_corpus_rejected(self):
        with pytest.raises(ValueError):
            fit_vocabulary([])

    def test_doc_count_recorded(self):
        assert fit_vocabulary([{"a": 1}, {"b": 1}]).doc_count == 2


class TestTransform:
    def setup_method(self):
        self.vocab = fit_vocabulary([{"a": 1, "b": 1}, {"a": 1}])

    def test_tfidf_vector_is_unit_norm(self):
        vec = transform({"a": 3, "b": 1}, self.vocab, NgramConfig())
        norm = math.sqrt(sum(v * v for _, v in vec.entries))
        assert norm == pytest.approx(1.0, abs=1e-9)

    def test_tfidf_values(self):
        config = NgramConfig(tfidf=True)
        vec = transform({"a": 2, "b": 1}, self.vocab, config)
        idf_a = self.vocab.idf[self.vocab.index["a"]]
        idf_b = self.vocab.idf[self.vocab.index["b"]]
        raw = {0: 2 * idf_a, 1: 1 * idf_b}
        norm = math.sqrt(sum(v * v for v in raw.values()))
        expected = {i: v / norm for i, v in raw.items()}
        assert dict(vec.entries) == pytest.approx(expected)

    def test_counts_mode_not_normalized(self):
        config = NgramConfig(binarize=False, tfidf=False)
        vec = transform({"a": 3, "b": 2}, self.vocab, config)
        assert dict(vec.entries) == {0: 3.0, 1: 2.0}

    def test_binarize_clamps_counts(self):
        config = NgramConfig(binarize=True, tfidf=False)
        vec = transform({"a": 5, "b": 1}, self.vocab, config)
        assert dict(vec.entries) == {0: 1.0, 1: 1.0}

    def test_binarize_with_tfidf(self):
        config = NgramConfig(binarize=True, tfidf=True)
        vec = transform({"a": 9, "b": 1}, self.vocab, config)
        idf_a = self.vocab.idf[self.vocab.index["a"]]
        idf_b = self.vocab.idf[self.vocab.index["b"]]
        norm = math.sqrt(idf_a**2 + idf_b**2)
        assert dict(vec.entries) == pytest.approx({0: idf_a / norm, 1: idf_b / norm})

    def test_unseen_terms_skipped(self):
        vec = transform({"nuevo": 4}, self.vocab, NgramConfig())
        assert vec.entries == ()

    def test_empty_counts_give_empty_vector(self):
        vec = transform({}, self.vocab, NgramConfig())
        assert vec.entries == () and vec.dim == 2


class TestSparseVector:
    def test_rejects_unsorted_indices(self):
        with pytest.raises(ValueError):
            SparseVector(3, ((1, 1.0), (0, 1.0)))

    def test_rejects_out_of_range(self):
        with pytest.raises(ValueError):
            SparseVector(2, ((2, 1.0),))

    def test_rejects_stored_zero(self):
        with pytest.raises(ValueError):
            SparseVector(2, ((0, 0.0),))

    def test_to_dense(self):
        vec = SparseVector(4, ((1, 2.0), (3, -1.0)))
        assert vec.to_dense().tolist() == [0.0, 2.0, 0.0, -1.0]


class TestConcat:
    def test_offsets(self):
        a = SparseVector(2, ((1, 1.0),))
        b = SparseVector(3, ((0, 2.0),))
        out = concat_features([a, b])
        assert out.dim == 5
        assert out.entries == ((1, 1.0), (2, 2.0))

    def test_dense_block(self):
        a = SparseVector(1, ((0, 1.0),))
        emb = np.array([0.5, 0.0, -0.5])
        out = concat_features([a, emb])
        assert out.dim == 4
        assert out.entries == ((0, 1.0), (1, 0.5), (3, -0.5))

    def test_expected_dims_checked(self):
        a = SparseVector(2, ())
        with pytest.raises(ValueError):
            concat_features([a], expected_dims=[3])


class TestStack:
    def test_csr_round_trip(self):
        vecs = [SparseVector(3, ((0, 1.0),)), SparseVector(3, ((2, 5.0),))]
        mat = stack_vectors(vecs)
        assert mat.shape == (2, 3)
        assert mat.toarray().tolist() == [[1.0, 0.0, 0.0], [0.0, 0.0, 5.0]]


class TestSaveLoad:
    def test_round_trip_exact(self, tmp_path):
        vocab = fit_vocabulary([{"a": 1, "ñu": 1}, {"a": 1}])
        config = NgramConfig(word_n_max=4, char_n_max=3, binarize=True, tfidf=False)
        path = tmp_path / "vocab.tsv"
        save_vocabulary(vocab, config, path)
        loaded, loaded_config = load_vocabulary(path)
        assert loaded.index == vocab.index
        assert loaded.doc_count == vocab.doc_count
        assert np.array_equal(loaded.idf, vocab.idf)
        assert loaded_config == config

    def test_vector_identical_after_reload(self, tmp_path):
        vocab = fit_vocabulary([{"a": 1, "b": 1, "c": 1}, {"a": 1}, {"b": 1}])
        config = NgramConfig()
        path = tmp_path / "vocab.tsv"
        save_vocabulary(vocab, config, path)
        loaded, _ = load_vocabulary(path)
        counts = {"a": 2, "c": 1}
        assert transform(counts, vocab, config) == transform(counts, loaded, config)
