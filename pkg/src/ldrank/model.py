"""Entities, triples and the graph they form."""

from __future__ import annotations

import re
from collections import Counter
from dataclasses import dataclass, field
from typing import Iterable, Mapping, NamedTuple, Sequence

import numpy as np

from .errors import InputError, ParseError
from .linalg import SparseMatrixCCS

# scheme ":" followed by at least one character that cannot appear unescaped
# in an IRI; permissive on purpose, only catches obvious garbage.
_IRI_RE = re.compile(r"^[A-Za-z][A-Za-z0-9+.\-]*:[^\s<>\"{}|\\^`]+$")


def check_iri(value: str, where: str | None = None) -> str:
    if not isinstance(value, str) or not _IRI_RE.match(value):
        raise ParseError(f"malformed IRI {value!r}", path=where)
    return value


class EntityId(NamedTuple):
    uri: str
    index: int


class Triple(NamedTuple):
    subject: EntityId
    predicate: str
    object: EntityId


@dataclass(frozen=True)
class Query:
    keywords: tuple[str, ...] = ()
    query_entities: frozenset[str] = frozenset()

    @classmethod
    def from_text(cls, text: str = "", entities: Iterable[str] = ()) -> "Query":
        return cls(tuple(text.split()), frozenset(entities))


@dataclass(frozen=True)
class EntityGraph:
    """Interned entities, a multiset of directed labeled triples and the
    descriptive text attached to entities.

    Build instances with :func:`build_graph`; the constructor does not
    validate.
    """

    uris: tuple[str, ...]
    subjects: np.ndarray
    predicates: tuple[str, ...]
    objects: np.ndarray
    texts: Mapping[int, str] = field(default_factory=dict)
    _index: dict = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "_index", {u: i for i, u in enumerate(self.uris)})
        for arr in (self.subjects, self.objects):
            arr.setflags(write=False)

    @property
    def n(self) -> int:
        return len(self.uris)

    @property
    def n_triples(self) -> int:
        return len(self.predicates)

    def index(self, uri: str) -> int:
        try:
            return self._index[uri]
        except KeyError:
            raise InputError(f"unknown entity {uri}") from None

    def __contains__(self, uri) -> bool:
        return uri in self._index

    def entity(self, key) -> EntityId:
        if isinstance(key, (int, np.integer)):
            return EntityId(self.uris[key], int(key))
        return EntityId(key, self.index(key))

    @property
    def entities(self) -> list[EntityId]:
        return [EntityId(u, i) for i, u in enumerate(self.uris)]

    def text(self, key) -> str:
        i = key if isinstance(key, (int, np.integer)) else self.index(key)
        return self.texts.get(int(i), "")

    def triples(self) -> list[Triple]:
        return [
            Triple(self.entity(int(s)), p, self.entity(int(o)))
            for s, p, o in zip(self.subjects, self.predicates, self.objects)
        ]

    def iri_triples(self) -> list[tuple[str, str, str]]:
        return [(self.uris[s], p, self.uris[o]) for s, p, o in zip(self.subjects, self.predicates, self.objects)]

    def multiplicity(self) -> Counter:
        """Count of each distinct ``(subject, predicate, object)``, by IRI."""
        return Counter(self.iri_triples())


def build_graph(triples: Sequence[tuple[str, str, str]], texts: Mapping[str, str] | None = None) -> EntityGraph:
    """Intern entities in order of first appearance.

    Subjects and objects are visited triple by triple, then text keys not
    seen yet. Duplicate triples are kept.
    """
    texts = dict(texts or {})
    index: dict[str, int] = {}

    def intern(uri):
        if uri not in index:
            index[uri] = len(index)
        return index[uri]

    subjects, predicates, objects = [], [], []
    for lineno, t in enumerate(triples, start=1):
        if len(t) != 3:
            raise ParseError(f"expected 3 fields, got {len(t)}", line=lineno)
        s, p, o = t
        for value in (s, p, o):
            try:
                check_iri(value)
            except ParseError as exc:
                raise ParseError(f"triple {lineno}: {exc}", line=lineno) from None
        subjects.append(intern(s))
        predicates.append(p)
        objects.append(intern(o))
    for uri in texts:
        check_iri(uri)
        intern(uri)
    if not index:
        raise InputError("empty graph: at least one entity is required")
    uris = tuple(sorted(index, key=index.__getitem__))
    return EntityGraph(
        uris=uris,
        subjects=np.array(subjects, dtype=np.int64),
        predicates=tuple(predicates),
        objects=np.array(objects, dtype=np.int64),
        texts={index[u]: t for u, t in texts.items()},
    )


def extend_graph(g: EntityGraph, triples: Iterable[tuple[str, str, str]]) -> EntityGraph:
    """Add triples not already present in ``g``; new entities are interned
    after the existing ones, in first-appearance order."""
    present = set(g.iri_triples())
    merged = list(g.iri_triples())
    for t in triples:
        t = tuple(t)
        if t not in present:
            present.add(t)
            merged.append(t)
    if len(merged) == g.n_triples:
        return g
    uris = list(g.uris)
    index = {u: i for i, u in enumerate(uris)}
    subjects, predicates, objects = [], [], []
    for s, p, o in merged:
        for value in (s, p, o):
            check_iri(value)
        for uri in (s, o):
            if uri not in index:
                index[uri] = len(uris)
                uris.append(uri)
        subjects.append(index[s])
        predicates.append(p)
        objects.append(index[o])
    return EntityGraph(
        uris=tuple(uris),
        subjects=np.array(subjects, dtype=np.int64),
        predicates=tuple(predicates),
        objects=np.array(objects, dtype=np.int64),
        texts=dict(g.texts),
    )


def adjacency_matrix(g: EntityGraph, bidirectional: bool = False, weighting: str = "unit") -> SparseMatrixCCS:
    """n x n adjacency matrix; entry (i, j) counts edges i -> j.

    ``weighting="unit"`` caps each entry at 1, ``"multiplicity"`` counts
    parallel edges (distinct predicates and repeated triples alike). With
    ``bidirectional`` every edge is also read in reverse. Self-loops are
    kept.
    """
    if weighting not in ("unit", "multiplicity"):
        raise ValueError(f"unknown edge weighting {weighting!r}")
    rows, cols = g.subjects, g.objects
    if bidirectional:
        loop = rows == cols
        rows, cols = np.concatenate([rows, cols[~loop]]), np.concatenate([cols, rows[~loop]])
    m = SparseMatrixCCS.from_triplets(g.n, g.n, rows, cols, np.ones(rows.size))
    if weighting == "unit" and m.nnz:
        m = SparseMatrixCCS(m.nrows, m.ncols, m.col_ptr, m.row_idx, np.ones(m.nnz))
    return m
