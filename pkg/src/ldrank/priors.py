"""A-priori importance distributions over entities: uniform, SERP hit
scores, and the stressed two-pass SVD."""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Iterable, Mapping, Sequence

import numpy as np

from .errors import InputError
from .ingest import Serp, check_doc_entities
from .linalg import truncated_svd
from .model import Query
from .text import EntityTermMatrix

log = logging.getLogger(__name__)

SIMPLEX_TOL = 1e-12


@dataclass(frozen=True)
class ProbVector:
    """A probability distribution over labeled entities."""

    values: np.ndarray
    labels: tuple[str, ...]

    def __post_init__(self):
        values = np.array(self.values, dtype=np.float64)
        if values.ndim != 1 or values.shape[0] != len(self.labels):
            raise ValueError("values and labels must have equal length")
        if values.size == 0:
            raise ValueError("empty distribution")
        if np.any(values < 0) or not np.all(np.isfinite(values)):
            raise ValueError("probabilities must be finite and nonnegative")
        if abs(values.sum() - 1.0) > SIMPLEX_TOL:
            raise ValueError(f"probabilities sum to {values.sum()!r}, not 1")
        values.setflags(write=False)
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "labels", tuple(self.labels))

    @classmethod
    def from_scores(cls, scores, labels) -> "ProbVector":
        scores = np.asarray(scores, dtype=np.float64)
        total = scores.sum()
        if not total > 0:
            raise ValueError("scores must have a positive sum")
        return cls(_renormalize(scores / total), labels)

    def __len__(self):
        return self.values.shape[0]

    def __getitem__(self, label: str) -> float:
        return float(self.values[self.labels.index(label)])

    def as_dict(self) -> dict[str, float]:
        return dict(zip(self.labels, self.values.tolist()))


def _renormalize(p: np.ndarray) -> np.ndarray:
    # one extra division absorbs the rounding of the first
    return p / p.sum()


def uniform_prior(n: int, labels: Sequence[str] | None = None) -> ProbVector:
    if n < 1:
        raise InputError("uniform prior needs at least one entity")
    labels = tuple(labels) if labels is not None else tuple(str(i) for i in range(n))
    return ProbVector(np.full(n, 1.0 / n), labels)


def hit_scores(serp: Serp, de: Mapping[str, Iterable[str]], entities: Sequence[str]) -> np.ndarray:
    """``hitscore(e) = sum over documents a containing e of (|A| + 1 - rank(a))``.

    Entities detected in documents but absent from ``entities`` are ignored.
    """
    if len(serp) == 0:
        raise InputError("empty SERP")
    check_doc_entities(de, serp)
    index = {u: i for i, u in enumerate(entities)}
    size = len(serp)
    scores = np.zeros(len(entities))
    ignored = set()
    for rank, doc in enumerate(serp.ranked_docs, start=1):
        for uri in de.get(doc, ()):
            i = index.get(uri)
            if i is None:
                ignored.add(uri)
                continue
            scores[i] += size + 1 - rank
    if ignored:
        log.warning("%d detected entities are not in the graph and get no hit score", len(ignored))
    return scores


def hit_prior(serp: Serp, de: Mapping[str, Iterable[str]], entities: Sequence[str]) -> ProbVector:
    scores = hit_scores(serp, de, entities)
    if not scores.sum() > 0:
        raise InputError("degenerate SERP: no entity has a positive hit score")
    return ProbVector.from_scores(scores, entities)


def best_hitscore_entity(serp: Serp, de: Mapping[str, Iterable[str]], entities: Sequence[str]) -> str:
    """Entity with the highest hit score; the lowest intern index wins ties."""
    scores = hit_scores(serp, de, entities)
    if not scores.sum() > 0:
        raise InputError("degenerate SERP: no entity has a positive hit score")
    return entities[int(np.argmax(scores))]


def info_need(query: Query, serp: Serp, de: Mapping[str, Iterable[str]], entities: Sequence[str]) -> frozenset[str]:
    """Query entities plus the best hit-score entity."""
    known = set(entities)
    missing = [e for e in query.query_entities if e not in known]
    if missing:
        raise InputError(f"query entities not in the graph: {', '.join(sorted(missing))}")
    return frozenset(query.query_entities) | {best_hitscore_entity(serp, de, entities)}


@dataclass(frozen=True)
class SvdScores:
    prev_norms: np.ndarray
    norms: np.ndarray
    scores: np.ndarray  # norms - prev_norms, unclamped


def svd_scores(
    r: EntityTermMatrix,
    need: Iterable[str],
    stress: float = 1000.0,
    k: int = 1,
    tol: float = 1e-10,
    max_iter: int = 10_000,
    seed: int = 0,
) -> SvdScores:
    """Growth of each entity's distance to the origin of the rank-``k``
    latent space when the rows of ``need`` are multiplied by ``stress``."""
    need = list(need)
    if not need:
        raise InputError("information need is empty")
    rows = [r.row(e) for e in need]
    m = r.matrix
    first = truncated_svd(m, k, tol=tol, max_iter=max_iter, seed=seed)
    # column e of S U^T is S * U[e, :]
    prev = np.linalg.norm(first.U * first.S, axis=1)
    factors = np.ones(m.nrows)
    factors[rows] = stress
    second = truncated_svd(m.scale_rows(factors), k, tol=tol, max_iter=max_iter, seed=seed)
    norms = np.linalg.norm(second.U * second.S, axis=1)
    return SvdScores(prev, norms, norms - prev)


def svd_prior(
    r: EntityTermMatrix,
    need: Iterable[str],
    stress: float = 1000.0,
    k: int = 1,
    tol: float = 1e-10,
    max_iter: int = 10_000,
    seed: int = 0,
) -> ProbVector:
    """Normalized positive part of :func:`svd_scores`; uniform when no
    entity moved away from the origin."""
    labels = r.row_entities
    if len(labels) == 1:
        for e in need:
            r.row(e)
        return ProbVector(np.ones(1), labels)
    s = svd_scores(r, need, stress, k, tol, max_iter, seed).scores
    clamped = np.maximum(s, 0.0)
    if not clamped.sum() > 0:
        return uniform_prior(len(labels), labels)
    return ProbVector.from_scores(clamped, labels)
