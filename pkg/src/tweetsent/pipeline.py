"""Feature pipeline: fit the enabled blocks on training data, then turn any
dataset into a matrix with the fixed block order BoW, BoC, embedding.

Word n-grams and sentence embeddings see semantically preprocessed tokens;
character n-grams see the tweet text after basic preprocessing only.  Both
views are derived here from the stored text, and because basic preprocessing
is idempotent the pipeline accepts raw and already-preprocessed datasets
alike.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from scipy import sparse

from . import vectorize
from .corpus import Dataset
from .embeddings import (
    EmbeddingTable,
    SifConfig,
    UnigramModel,
    leading_component,
    remove_component,
    sif_embed,
)
from .preprocess import PreprocessConfig, basic_preprocess, join_tokens, semantic_preprocess, tokenize
from .vectorize import NgramConfig, SparseVector, Vocabulary, concat_features, stack_vectors

BLOCK_ORDER = ("bow", "boc", "embedding")


@dataclass(frozen=True)
class FeatureBlocks:
    """Which feature families are active; at least one must be."""

    bow: bool = True
    boc: bool = True
    embedding: bool = True

    def __post_init__(self) -> None:
        if not (self.bow or self.boc or self.embedding):
            raise ValueError("at least one feature block must be enabled")


class FeaturePipeline:
    def __init__(
        self,
        preprocess_config: PreprocessConfig,
        ngram_config: NgramConfig,
        blocks: FeatureBlocks,
        embedding_table: EmbeddingTable | None = None,
        unigram: UnigramModel | None = None,
        sif_config: SifConfig | None = None,
    ):
        if blocks.embedding and (embedding_table is None or unigram is None):
            raise ValueError("the embedding block needs an embedding table and unigram counts")
        self.preprocess_config = preprocess_config
        self.ngram_config = ngram_config
        self.blocks = blocks
        self.embedding_table = embedding_table
        self.unigram = unigram
        self.sif_config = sif_config if sif_config is not None else SifConfig()
        self.bow_vocabulary: Vocabulary | None = None
        self.boc_vocabulary: Vocabulary | None = None
        self.common_component: np.ndarray | None = None
        self.fitted = False

    def _views(self, text: str) -> tuple[str, list[str]]:
        """Per-tweet feature inputs: basic-preprocessed text, semantic tokens."""
        basic = basic_preprocess(tokenize(text), self.preprocess_config)
        semantic = semantic_preprocess(basic, self.preprocess_config)
        return join_tokens(basic), [token.surface for token in semantic]

    def fit(self, train: Dataset) -> "FeaturePipeline":
        if len(train) == 0:
            raise ValueError("cannot fit the feature pipeline on an empty dataset")
        views = [self._views(tweet.text) for tweet in train.tweets]
        if self.blocks.bow:
            self.bow_vocabulary = vectorize.fit_vocabulary(
                vectorize.extract_word_ngrams(tokens, self.ngram_config.word_n_max)
                for _, tokens in views
            )
        if self.blocks.boc:
            self.boc_vocabulary = vectorize.fit_vocabulary(
                vectorize.extract_char_ngrams(text, self.ngram_config.char_n_max)
                for text, _ in views
            )
        if self.blocks.embedding and self.sif_config.remove_common_component:
            matrix = np.stack([self._embed(tokens) for _, tokens in views])
            if matrix.any():
                self.common_component = leading_component(matrix)
        self.fitted = True
        return self

    def _embed(self, tokens: list[str]) -> np.ndarray:
        assert self.embedding_table is not None and self.unigram is not None
        return sif_embed(tokens, self.embedding_table, self.unigram, self.sif_config)

    @property
    def layout(self) -> list[tuple[str, int]]:
        """Enabled (block, dim) pairs in the fixed order."""
        if not self.fitted:
            raise RuntimeError("the pipeline must be fitted before its layout exists")
        out: list[tuple[str, int]] = []
        if self.blocks.bow:
            assert self.bow_vocabulary is not None
            out.append(("bow", len(self.bow_vocabulary)))
        if self.blocks.boc:
            assert self.boc_vocabulary is not None
            out.append(("boc", len(self.boc_vocabulary)))
        if self.blocks.embedding:
            assert self.embedding_table is not None
            out.append(("embedding", self.embedding_table.dim))
        return out

    def transform_one(self, text: str) -> SparseVector:
        if not self.fitted:
            raise RuntimeError("the pipeline must be fitted before transforming")
        boc_text, tokens = self._views(text)
        blocks: list[SparseVector | np.ndarray] = []
        if self.blocks.bow:
            assert self.bow_vocabulary is not None
            counts = vectorize.extract_word_ngrams(tokens, self.ngram_config.word_n_max)
            blocks.append(vectorize.transform(counts, self.bow_vocabulary, self.ngram_config))
        if self.blocks.boc:
            assert self.boc_vocabulary is not None
            counts = vectorize.extract_char_ngrams(boc_text, self.ngram_config.char_n_max)
            blocks.append(vectorize.transform(counts, self.boc_vocabulary, self.ngram_config))
        if self.blocks.embedding:
            vector = self._embed(tokens)
            if self.common_component is not None:
                vector = remove_component(vector.reshape(1, -1), self.common_component)[0]
            blocks.append(vector)
        return concat_features(blocks, expected_dims=[dim for _, dim in self.layout])

    def transform(self, dataset: Dataset) -> sparse.csr_matrix:
        return stack_vectors([self.transform_one(tweet.text) for tweet in dataset.tweets])


PIPELINE_FORMAT_VERSION = 1


def save_pipeline(pipeline: FeaturePipeline, directory: str | Path, resources: dict[str, str | None]) -> None:
    """Persist the fitted pipeline.

    Small preprocessing resources are inlined; ``resources`` records the
    embedding/subword/unigram file paths, which are reloaded from disk.
    """
    if not pipeline.fitted:
        raise ValueError("only fitted pipelines can be saved")
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    config = pipeline.preprocess_config
    meta = {
        "format_version": PIPELINE_FORMAT_VERSION,
        "blocks": {
            "bow": pipeline.blocks.bow,
            "boc": pipeline.blocks.boc,
            "embedding": pipeline.blocks.embedding,
        },
        "ngrams": {
            "word_n_max": pipeline.ngram_config.word_n_max,
            "char_n_max": pipeline.ngram_config.char_n_max,
            "binarize": pipeline.ngram_config.binarize,
            "tfidf": pipeline.ngram_config.tfidf,
        },
        "preprocess": {
            "negation_words": sorted(config.negation_words),
            "negation_scope": config.negation_scope,
            "stopwords": sorted(config.stopwords),
            "lemma_table": dict(sorted(config.lemma_table.items())),
            "repeat_cap": config.repeat_cap,
        },
        "sif": {
            "a": pipeline.sif_config.a,
            "remove_common_component": pipeline.sif_config.remove_common_component,
        },
        "resources": resources,
        "layout": pipeline.layout,
    }
    with open(directory / "pipeline.json", "w", encoding="utf-8", newline="\n") as handle:
        json.dump(meta, handle, indent=2, sort_keys=True, ensure_ascii=False)
        handle.write("\n")
    if pipeline.bow_vocabulary is not None:
        vectorize.save_vocabulary(pipeline.bow_vocabulary, pipeline.ngram_config, directory / "bow_vocab.tsv")
    if pipeline.boc_vocabulary is not None:
        vectorize.save_vocabulary(pipeline.boc_vocabulary, pipeline.ngram_config, directory / "boc_vocab.tsv")
    if pipeline.common_component is not None:
        np.save(directory / "common_component.npy", pipeline.common_component)


def load_pipeline(directory: str | Path) -> FeaturePipeline:
    """Reload a persisted pipeline, rejecting layout mismatches."""
    from .embeddings import load_embeddings, load_unigram_counts

    directory = Path(directory)
    with open(directory / "pipeline.json", encoding="utf-8") as handle:
        meta = json.load(handle)
    if meta.get("format_version") != PIPELINE_FORMAT_VERSION:
        raise ValueError(f"unsupported pipeline format version {meta.get('format_version')!r}")
    preprocess_config = PreprocessConfig(
        negation_words=frozenset(meta["preprocess"]["negation_words"]),
        negation_scope=meta["preprocess"]["negation_scope"],
        stopwords=frozenset(meta["preprocess"]["stopwords"]),
        lemma_table=meta["preprocess"]["lemma_table"],
        repeat_cap=meta["preprocess"]["repeat_cap"],
    )
    ngram_config = NgramConfig(**meta["ngrams"])
    blocks = FeatureBlocks(**meta["blocks"])
    sif_config = SifConfig(**meta["sif"])
    embedding_table = None
    unigram = None
    if blocks.embedding:
        resources = meta["resources"]
        if not resources.get("embeddings") or not resources.get("unigram_counts"):
            raise ValueError("pipeline metadata is missing embedding resource paths")
        embedding_table = load_embeddings(resources["embeddings"], resources.get("subword"))
        unigram = load_unigram_counts(resources["unigram_counts"])
    pipeline = FeaturePipeline(
        preprocess_config=preprocess_config,
        ngram_config=ngram_config,
        blocks=blocks,
        embedding_table=embedding_table,
        unigram=unigram,
        sif_config=sif_config,
    )
    if blocks.bow:
        pipeline.bow_vocabulary, _ = vectorize.load_vocabulary(directory / "bow_vocab.tsv")
    if blocks.boc:
        pipeline.boc_vocabulary, _ = vectorize.load_vocabulary(directory / "boc_vocab.tsv")
    component_path = directory / "common_component.npy"
    if component_path.exists():
        pipeline.common_component = np.load(component_path)
    pipeline.fitted = True
    stored_layout = [(str(name), int(dim)) for name, dim in meta["layout"]]
    if pipeline.layout != stored_layout:
        raise ValueError(
            f"reloaded feature layout {pipeline.layout} does not match stored layout {stored_layout}"
        )
    return pipeline
