"""Tokenization and the sparse entity-term matrix."""

from __future__ import annotations

import re
from dataclasses import dataclass
from functools import lru_cache
from importlib import resources
from typing import Callable, Iterable, Sequence

import numpy as np
import snowballstemmer

from .errors import InputError
from .linalg import SparseMatrixCCS
from .model import EntityGraph

_SPLIT = re.compile(r"[\W_]+")

Stemmer = Callable[[str], str]


def identity_stemmer(token: str) -> str:
    return token


class PorterStemmer:
    """Porter's English stemmer, from the Snowball distribution."""

    def __init__(self):
        self._impl = snowballstemmer.stemmer("porter")
        self._cache: dict[str, str] = {}

    def __call__(self, token: str) -> str:
        out = self._cache.get(token)
        if out is None:
            out = self._cache[token] = self._impl.stemWord(token)
        return out


def get_stemmer(name: str) -> Stemmer:
    if name == "porter":
        return PorterStemmer()
    if name in ("identity", "none"):
        return identity_stemmer
    raise ValueError(f"unknown stemmer {name!r}")


@lru_cache(maxsize=1)
def default_stopwords() -> frozenset[str]:
    text = resources.files("ldrank").joinpath("data/stopwords_en.txt").read_text(encoding="utf-8")
    return frozenset(w.strip() for w in text.splitlines() if w.strip())


def read_stopwords(path) -> frozenset[str]:
    with open(path, encoding="utf-8") as fh:
        return frozenset(line.strip().lower() for line in fh if line.strip())


def tokenize(text: str, stopwords: Iterable[str] = (), stemmer: Stemmer = identity_stemmer) -> list[str]:
    """Lowercase, split on non-alphanumerics, drop 1-character tokens and
    stopwords, then stem."""
    stop = stopwords if isinstance(stopwords, (set, frozenset)) else set(stopwords)
    return [stemmer(t) for t in _SPLIT.split(text.lower()) if len(t) >= 2 and t not in stop]


@dataclass(frozen=True)
class Vocabulary:
    terms: tuple[str, ...]

    def __post_init__(self):
        object.__setattr__(self, "_index", {t: i for i, t in enumerate(self.terms)})
        if len(self._index) != len(self.terms):
            raise ValueError("duplicate term in vocabulary")

    def __len__(self):
        return len(self.terms)

    def index(self, term: str) -> int:
        return self._index[term]


@dataclass(frozen=True)
class EntityTermMatrix:
    matrix: SparseMatrixCCS
    vocabulary: Vocabulary
    row_entities: tuple[str, ...]

    def __post_init__(self):
        if self.matrix.shape != (len(self.row_entities), len(self.vocabulary)):
            raise ValueError("matrix shape does not match entities x vocabulary")
        if self.matrix.nnz and np.any(self.matrix.values <= 0):
            raise ValueError("entity-term weights must be positive")

    def row(self, uri: str) -> int:
        try:
            return self.row_entities.index(uri)
        except ValueError:
            raise InputError(f"entity {uri} has no row in the entity-term matrix") from None


def matrix_from_tokens(
    rows: Sequence[str], tokens: Sequence[Sequence[str]], weighting: str = "tf"
) -> EntityTermMatrix:
    if weighting not in ("tf", "tfidf"):
        raise ValueError(f"unknown weighting {weighting!r}")
    vocab: dict[str, int] = {}
    r_idx, c_idx = [], []
    for i, toks in enumerate(tokens):
        for t in toks:
            j = vocab.setdefault(t, len(vocab))
            r_idx.append(i)
            c_idx.append(j)
    if not r_idx:
        raise InputError("every entity text is empty after tokenization; the entity-term matrix would be zero")
    n, nterms = len(rows), len(vocab)
    tf = SparseMatrixCCS.from_triplets(n, nterms, r_idx, c_idx, np.ones(len(r_idx)))
    m = tf
    if weighting == "tfidf":
        df = np.diff(tf.col_ptr)
        idf = np.log(n / df)
        vals = tf.values * idf[tf.col_idx]
        keep = vals != 0
        if not keep.any():
            raise InputError("every term occurs in every entity; tf-idf matrix is zero")
        m = SparseMatrixCCS.from_triplets(n, nterms, tf.row_idx[keep], tf.col_idx[keep], vals[keep])
    return EntityTermMatrix(m, Vocabulary(tuple(sorted(vocab, key=vocab.__getitem__))), tuple(rows))


def build_matrix(
    g: EntityGraph,
    weighting: str = "tf",
    stopwords: Iterable[str] | None = None,
    stemmer: Stemmer | None = None,
) -> EntityTermMatrix:
    """Rows are the graph's entities in intern order; columns are terms in
    order of first appearance. Entities without text get an empty row.

    ``tf`` stores raw counts, ``tfidf`` multiplies them by ``ln(n / df)``
    (terms present in every entity vanish).
    """
    stop = default_stopwords() if stopwords is None else frozenset(stopwords)
    stem = PorterStemmer() if stemmer is None else stemmer
    tokens = [tokenize(g.text(i), stop, stem) for i in range(g.n)]
    return matrix_from_tokens(g.uris, tokens, weighting)
