import numpy as np
import pytest

from tweetsent.corpus import Dataset, Label, Tweet
from tweetsent.embeddings import (
    EmbeddingTable,
    SifConfig,
    UnigramModel,
    sif_embed,
)
from tweetsent.pipeline import (
    BLOCK_ORDER,
    FeatureBlocks,
    FeaturePipeline,
    load_pipeline,
    save_pipeline,
)
from tweetsent.preprocess import PreprocessConfig
from tweetsent.vectorize import NgramConfig


def tiny_dataset():
    return Dataset(
        "toy",
        "train",
        (
            Tweet("t1", "el gato duerme", Label.P),
            Tweet("t2", "el perro ladra fuerte", Label.N),
            Tweet("t3", "gato y perro juegan", Label.NEU),
        ),
    )


def embedding_fixture(dim=4):
    words = ["gato", "perro", "duerme", "ladra", "fuerte", "juegan", "el", "y"]
    rng = np.random.default_rng(1)
    vectors = {w: rng.normal(size=dim) for w in words}
    table = EmbeddingTable(dim=dim, vectors=vectors)
    unigram = UnigramModel(counts={w: i + 1 for i, w in enumerate(words)}, total=36)
    return table, unigram


def make_pipeline(blocks=None, sif_config=None, stopwords=frozenset()):
    table, unigram = embedding_fixture()
    return FeaturePipeline(
        preprocess_config=PreprocessConfig(stopwords=stopwords),
        ngram_config=NgramConfig(word_n_max=2, char_n_max=3),
        blocks=blocks or FeatureBlocks(),
        embedding_table=table,
        unigram=unigram,
        sif_config=sif_config,
    )


class TestFeatureBlocks:
    def test_at_least_one_required(self):
        with pytest.raises(ValueError):
            FeatureBlocks(bow=False, boc=False, embedding=False)

    def test_block_order_constant(self):
        assert BLOCK_ORDER == ("bow", "boc", "embedding")


class TestFit:
    def test_layout_order_and_dims(self):
        pipeline = make_pipeline().fit(tiny_dataset())
        names = [name for name, _ in pipeline.layout]
        assert names == ["bow", "boc", "embedding"]
        dims = dict(pipeline.layout)
        assert dims["bow"] == len(pipeline.bow_vocabulary)
        assert dims["boc"] == len(pipeline.boc_vocabulary)
        assert dims["embedding"] == 4

    def test_disabled_blocks_absent_from_layout(self):
        pipeline = make_pipeline(blocks=FeatureBlocks(bow=True, boc=False, embedding=False))
        pipeline.fit(tiny_dataset())
        assert [name for name, _ in pipeline.layout] == ["bow"]

    def test_empty_train_rejected(self):
        pipeline = make_pipeline()
        with pytest.raises(ValueError):
            pipeline.fit(Dataset("toy", "test", ()))

    def test_embedding_block_requires_resources(self):
        with pytest.raises(ValueError):
            FeaturePipeline(
                preprocess_config=PreprocessConfig(),
                ngram_config=NgramConfig(),
                blocks=FeatureBlocks(),
            )

    def test_layout_requires_fit(self):
        pipeline = make_pipeline()
        with pytest.raises(RuntimeError):
            pipeline.layout


class TestTransform:
    def test_vector_dim_is_sum_of_blocks(self):
        pipeline = make_pipeline().fit(tiny_dataset())
        vec = pipeline.transform_one("el gato ladra")
        assert vec.dim == sum(dim for _, dim in pipeline.layout)

    def test_matrix_shape(self):
        ds = tiny_dataset()
        pipeline = make_pipeline().fit(ds)
        matrix = pipeline.transform(ds)
        assert matrix.shape == (3, sum(dim for _, dim in pipeline.layout))

    def test_embedding_tail_matches_direct_sif(self):
        pipeline = make_pipeline().fit(tiny_dataset())
        table, unigram = pipeline.embedding_table, pipeline.unigram
        vec = pipeline.transform_one("el gato duerme").to_dense()
        expected = sif_embed(
            ["el", "gato", "duerme"], table, unigram, pipeline.sif_config
        )
        assert np.allclose(vec[-4:], expected)

    def test_bow_ignores_stopwords_boc_keeps_them(self):
        # The word view drops the stopword; the character view runs over the
        # basic text, which keeps it.
        with_stop = make_pipeline(stopwords=frozenset({"el"})).fit(tiny_dataset())
        assert "el" not in with_stop.bow_vocabulary.index
        assert "el " in with_stop.boc_vocabulary.index

    def test_transform_before_fit_rejected(self):
        pipeline = make_pipeline()
        with pytest.raises(RuntimeError):
            pipeline.transform_one("hola")

    def test_unseen_text_hits_embedding_only(self):
        pipeline = make_pipeline(
            blocks=FeatureBlocks(bow=True, boc=False, embedding=False)
        ).fit(tiny_dataset())
        vec = pipeline.transform_one("zzz qqq")
        assert vec.entries == ()

    def test_raw_and_preprocessed_text_agree(self):
        # Feeding back the basic-preprocessed text is a no-op by design, so
        # augmented instances and raw ones share one code path.
        pipeline = make_pipeline().fit(tiny_dataset())
        raw = "@maria el GATO duerme https://x.co/a"
        basic = "@USER el GATO duerme URL"
        assert pipeline.transform_one(raw) == pipeline.transform_one(basic)


class TestCommonComponent:
    def test_fit_records_component_when_enabled(self):
        pipeline = make_pipeline(sif_config=SifConfig(a=0.1, remove_common_component=True))
        pipeline.fit(tiny_dataset())
        assert pipeline.common_component is not None
        assert np.linalg.norm(pipeline.common_component) == pytest.approx(1.0)

    def test_train_embeddings_become_orthogonal(self):
        ds = tiny_dataset()
        pipeline = make_pipeline(sif_config=SifConfig(a=0.1, remove_common_component=True))
        pipeline.fit(ds)
        for tweet in ds.tweets:
            vec = pipeline.transform_one(tweet.text).to_dense()[-4:]
            assert abs(float(vec @ pipeline.common_component)) <= 1e-9

    def test_disabled_by_default(self):
        pipeline = make_pipeline().fit(tiny_dataset())
        assert pipeline.common_component is None


class TestSaveLoad:
    def write_resources(self, tmp_path):
        table, unigram = embedding_fixture()
        emb = tmp_path / "emb.txt"
        lines = [f"{len(table.vectors)} {table.dim}"]
        for word, vec in table.vectors.items():
            lines.append(word + " " + " ".join(repr(float(x)) for x in vec))
        emb.write_text("\n".join(lines) + "\n", encoding="utf-8")
        uni = tmp_path / "uni.tsv"
        uni.write_text(
            "".join(f"{w}\t{c}\n" for w, c in unigram.counts.items()), encoding="utf-8"
        )
        return {"embeddings": str(emb), "subword": None, "unigram_counts": str(uni)}

    def test_round_trip_transforms_identically(self, tmp_path):
        resources = self.write_resources(tmp_path)
        ds = tiny_dataset()
        table, unigram = embedding_fixture()
        pipeline = FeaturePipeline(
            preprocess_config=PreprocessConfig(stopwords=frozenset({"el"})),
            ngram_config=NgramConfig(word_n_max=2, char_n_max=3),
            blocks=FeatureBlocks(),
            embedding_table=table,
            unigram=unigram,
        ).fit(ds)
        save_pipeline(pipeline, tmp_path / "bundle", resources)
        loaded = load_pipeline(tmp_path / "bundle")
        assert loaded.layout == pipeline.layout
        for tweet in ds.tweets:
            assert loaded.transform_one(tweet.text) == pipeline.transform_one(tweet.text)

    def test_unfitted_rejected(self, tmp_path):
        with pytest.raises(ValueError):
            save_pipeline(make_pipeline(), tmp_path, {})

    def test_tampered_layout_rejected(self, tmp_path):
        import json

        resources = self.write_resources(tmp_path)
        pipeline = make_pipeline().fit(tiny_dataset())
        save_pipeline(pipeline, tmp_path / "bundle", resources)
        meta_path = tmp_path / "bundle" / "pipeline.json"
        meta = json.loads(meta_path.read_text(encoding="utf-8"))
        meta["layout"][0][1] += 1
        meta_path.write_text(json.dumps(meta), encoding="utf-8")
        with pytest.raises(ValueError, match="layout"):
            load_pipeline(tmp_path / "bundle")

    def test_common_component_round_trip(self, tmp_path):
        resources = self.write_resources(tmp_path)
        ds = tiny_dataset()
        table, unigram = embedding_fixture()
        pipeline = FeaturePipeline(
            preprocess_config=PreprocessConfig(),
            ngram_config=NgramConfig(word_n_max=2, char_n_max=3),
            blocks=FeatureBlocks(),
            embedding_table=table,
            unigram=unigram,
            sif_config=SifConfig(a=0.1, remove_common_component=True),
        ).fit(ds)
        save_pipeline(pipeline, tmp_path / "bundle", resources)
        loaded = load_pipeline(tmp_path / "bundle")
        assert np.array_equal(loaded.common_component, pipeline.common_component)
        for tweet in ds.tweets:
            assert loaded.transform_one(tweet.text) == pipeline.transform_one(tweet.text)
