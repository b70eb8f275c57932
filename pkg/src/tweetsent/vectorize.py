"""Sparse bag-of-words and bag-of-characters features.

Word n-grams are built from fully preprocessed tokens (n-grams joined with
single spaces), character n-grams from the tweet text itself.  Term weights
follow the smoothed idf convention ``ln((1 + N) / (1 + df)) + 1`` and tf-idf
vectors are L2-normalized.
"""

from __future__ import annotations

import math
from collections import Counter
from collections.abc import Iterable, Mapping, Sequence
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from scipy import sparse


@dataclass(frozen=True)
class NgramConfig:
    word_n_max: int = 5
    char_n_max: int = 6
    binarize: bool = False
    tfidf: bool = True

    def __post_init__(self) -> None:
        if self.word_n_max < 1:
            raise ValueError("word_n_max must be >= 1")
        if self.char_n_max < 1:
            raise ValueError("char_n_max must be >= 1")


@dataclass(frozen=True)
class SparseVector:
    """Immutable sparse vector: (index, value) entries sorted by index.

    Indices are strictly increasing and below ``dim``; zeros are never stored.
    """

    dim: int
    entries: tuple[tuple[int, float], ...]

    def __post_init__(self) -> None:
        previous = -1
        for index, value in self.entries:
            if index <= previous:
                raise ValueError("sparse vector indices must be strictly increasing")
            if index >= self.dim:
                raise ValueError(f"index {index} out of range for dim {self.dim}")
            if value == 0.0:
                raise ValueError("sparse vectors must not store zero values")
            previous = index

    def to_dense(self) -> np.ndarray:
        dense = np.zeros(self.dim)
        for index, value in self.entries:
            dense[index] = value
        return dense


@dataclass
class Vocabulary:
    """A fitted term space: term -> index plus per-index idf weights."""

    index: dict[str, int]
    idf: np.ndarray
    doc_count: int

    def __len__(self) -> int:
        return len(self.index)


def extract_word_ngrams(tokens: Sequence[str], n_max: int) -> Counter[str]:
    """All word n-grams for n = 1..n_max, joined with single spaces."""
    grams: Counter[str] = Counter()
    count = len(tokens)
    for n in range(1, n_max + 1):
        for start in range(count - n + 1):
            grams[" ".join(tokens[start : start + n])] += 1
    return grams


def extract_char_ngrams(text: str, n_max: int) -> Counter[str]:
    """All character n-grams for n = 1..n_max over the raw string."""
    grams: Counter[str] = Counter()
    length = len(text)
    for n in range(1, n_max + 1):
        for start in range(length - n + 1):
            grams[text[start : start + n]] += 1
    return grams


def fit_vocabulary(documents: Iterable[Mapping[str, int]]) -> Vocabulary:
    """Build the term index and idf weights from per-document term multisets.

    Indices are assigned in sorted term order, so fitting the same corpus
    twice yields an identical vocabulary.
    """
    document_frequency: Counter[str] = Counter()
    doc_count = 0
    for counts in documents:
        doc_count += 1
        document_frequency.update(set(counts))
    if doc_count == 0:
        raise ValueError("cannot fit a vocabulary on an empty corpus")
    terms = sorted(document_frequency)
    index = {term: i for i, term in enumerate(terms)}
    idf = np.empty(len(terms))
    for term, i in index.items():
        idf[i] = math.log((1.0 + doc_count) / (1.0 + document_frequency[term])) + 1.0
    return Vocabulary(index=index, idf=idf, doc_count=doc_count)


def transform(counts: Mapping[str, int], vocabulary: Vocabulary, config: NgramConfig) -> SparseVector:
    """Map a term multiset into the fitted space.

    Unseen terms are dropped.  Values are counts (or 1 when binarizing),
    scaled by idf and L2-normalized when tf-idf is on.
    """
    pairs: list[tuple[int, float]] = []
    for term, count in counts.items():
        if count <= 0:
            continue
        i = vocabulary.index.get(term)
        if i is None:
            continue
        value = 1.0 if config.binarize else float(count)
        if config.tfidf:
            value *= float(vocabulary.idf[i])
        pairs.append((i, value))
    pairs.sort()
    if config.tfidf and pairs:
        norm = math.sqrt(sum(value * value for _, value in pairs))
        if norm > 0.0:
            pairs = [(i, value / norm) for i, value in pairs]
    return SparseVector(dim=len(vocabulary), entries=tuple(pairs))


def concat_features(
    blocks: Sequence[SparseVector | np.ndarray],
    expected_dims: Sequence[int] | None = None,
) -> SparseVector:
    """Concatenate sparse and dense blocks into one index-shifted vector.

    ``expected_dims`` pins the fit-time layout; a mismatch is an error.
    """
    dims = [block.dim if isinstance(block, SparseVector) else len(block) for block in blocks]
    if expected_dims is not None and list(expected_dims) != dims:
        raise ValueError(f"feature block dims {dims} do not match fitted layout {list(expected_dims)}")
    pairs: list[tuple[int, float]] = []
    offset = 0
    for block, dim in zip(blocks, dims):
        if isinstance(block, SparseVector):
            pairs.extend((offset + i, value) for i, value in block.entries)
        else:
            for j in np.flatnonzero(block):
                pairs.append((offset + int(j), float(block[j])))
        offset += dim
    return SparseVector(dim=offset, entries=tuple(pairs))


def stack_vectors(vectors: Sequence[SparseVector]) -> sparse.csr_matrix:
    """Stack per-document sparse vectors into one CSR matrix."""
    if not vectors:
        raise ValueError("cannot stack an empty vector list")
    dim = vectors[0].dim
    indptr = [0]
    indices: list[int] = []
    data: list[float] = []
    for vector in vectors:
        if vector.dim != dim:
            raise ValueError("all vectors must share one dimension")
        for i, value in vector.entries:
            indices.append(i)
            data.append(value)
        indptr.append(len(indices))
    return sparse.csr_matrix(
        (np.asarray(data), np.asarray(indices, dtype=np.int64), np.asarray(indptr, dtype=np.int64)),
        shape=(len(vectors), dim),
    )


_HEADER_PREFIX = "#"


def save_vocabulary(vocabulary: Vocabulary, config: NgramConfig, path: str | Path) -> None:
    """Write ``term<TAB>index<TAB>idf`` rows under a one-line header."""
    with open(path, "w", encoding="utf-8", newline="\n") as handle:
        handle.write(
            f"{_HEADER_PREFIX}doc_count={vocabulary.doc_count}"
            f"\tword_n_max={config.word_n_max}\tchar_n_max={config.char_n_max}"
            f"\tbinarize={int(config.binarize)}\ttfidf={int(config.tfidf)}\n"
        )
        for term, i in sorted(vocabulary.index.items(), key=lambda item: item[1]):
            # float() first: numpy scalars repr as np.float64(...) and would
            # not parse back.  Plain float repr round-trips exactly.
            handle.write(f"{term}\t{i}\t{float(vocabulary.idf[i])!r}\n")


def load_vocabulary(path: str | Path) -> tuple[Vocabulary, NgramConfig]:
    path = Path(path)
    with open(path, encoding="utf-8") as handle:
        header = handle.readline().rstrip("\n")
        if not header.startswith(_HEADER_PREFIX):
            raise ValueError(f"{path}: missing vocabulary header")
        meta: dict[str, str] = {}
        for part in header[len(_HEADER_PREFIX) :].split("\t"):
            key, _, value = part.partition("=")
            meta[key] = value
        try:
            doc_count = int(meta["doc_count"])
            config = NgramConfig(
                word_n_max=int(meta["word_n_max"]),
                char_n_max=int(meta["char_n_max"]),
                binarize=bool(int(meta["binarize"])),
                tfidf=bool(int(meta["tfidf"])),
            )
        except (KeyError, ValueError) as exc:
            raise ValueError(f"{path}: malformed vocabulary header: {exc}") from None
        index: dict[str, int] = {}
        idf_by_index: dict[int, float] = {}
        for lineno, line in enumerate(handle, start=2):
            line = line.rstrip("\n")
            if not line:
                continue
            fields = line.split("\t")
            if len(fields) != 3:
                raise ValueError(f"{path}:{lineno}: expected 'term<TAB>index<TAB>idf'")
            term, raw_index, raw_idf = fields
            index[term] = int(raw_index)
            idf_by_index[int(raw_index)] = float(raw_idf)
    idf = np.empty(len(index))
    for i, value in idf_by_index.items():
        idf[i] = value
    vocabulary = Vocabulary(index=index, idf=idf, doc_count=doc_count)
    return vocabulary, config
