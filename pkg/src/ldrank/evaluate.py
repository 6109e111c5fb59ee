"""Ranking quality and crowd-judgment measurements: NDCG, majority vote,
worker filtering, Krippendorff's alpha and strategy timings."""

from __future__ import annotations

import math
import statistics
import time
from collections import Counter, defaultdict
from dataclasses import dataclass
from typing import Callable, Iterable, Mapping, NamedTuple, Sequence

import numpy as np

from .errors import InputError

GRADES = (0, 1, 2, 3)


# -- NDCG --------------------------------------------------------------------


def dcg(grades: Sequence[float], r: int) -> float:
    """``rel_1 + sum_{i=2..r} rel_i / log2(i)``."""
    if r < 1:
        raise InputError("rank cutoff must be at least 1")
    if r > len(grades):
        raise InputError(f"rank cutoff {r} exceeds the {len(grades)} graded results")
    total = float(grades[0])
    for i in range(2, r + 1):
        total += grades[i - 1] / math.log2(i)
    return total


def ndcg(ranking: Iterable, qrels: Mapping[str, int], r: int) -> float:
    """NDCG at ``r`` of a ranked entity list; unjudged entities grade 0.

    ``ranking`` yields entity IRIs or ``(IRI, score)`` pairs. The ideal
    ordering is the ranking's own grades sorted in decreasing order.
    """
    uris = [e[0] if isinstance(e, tuple) else e for e in ranking]
    grades = [qrels.get(u, 0) for u in uris]
    if r > len(grades):
        raise InputError(f"rank cutoff {r} exceeds the ranking length {len(grades)}")
    best = dcg(sorted(grades, reverse=True), r)
    if best <= 0:
        raise InputError("NDCG undefined: no positively graded entity in the ranking")
    return dcg(grades, r) / best


# -- crowd judgments ---------------------------------------------------------


class Judgment(NamedTuple):
    unit: str
    worker: str
    value: int


@dataclass(frozen=True)
class JudgmentSet:
    records: tuple[Judgment, ...]

    def __post_init__(self):
        seen = set()
        for r in self.records:
            if r.value not in GRADES:
                raise InputError(f"grade {r.value} out of scale 0-3")
            key = (r.unit, r.worker)
            if key in seen:
                raise InputError(f"duplicate judgment for unit {r.unit!r} by worker {r.worker!r}")
            seen.add(key)

    @classmethod
    def from_tuples(cls, rows: Iterable[tuple[str, str, int]]) -> "JudgmentSet":
        return cls(tuple(Judgment(str(u), str(w), int(v)) for u, w, v in rows))

    def __len__(self):
        return len(self.records)

    def units(self) -> list[str]:
        return list(dict.fromkeys(r.unit for r in self.records))

    def workers(self) -> list[str]:
        return list(dict.fromkeys(r.worker for r in self.records))

    def by_unit(self) -> dict[str, list[Judgment]]:
        out: dict[str, list[Judgment]] = defaultdict(list)
        for r in self.records:
            out[r.unit].append(r)
        return dict(out)


def majority_vote(
    j: JudgmentSet,
    unit: str,
    tiebreak: str = "highest",
    accuracies: Mapping[str, float] | None = None,
) -> int:
    """Modal grade of a unit.

    Ties go to the highest grade (``"highest"``) or to the grade whose voters
    have the greatest mean accuracy (``"accuracy"``; remaining ties go to
    the highest grade).
    """
    votes = [r for r in j.records if r.unit == unit]
    if not votes:
        raise InputError(f"unknown unit {unit!r}")
    return _vote(votes, tiebreak, accuracies)


def _vote(votes: list[Judgment], tiebreak: str, accuracies) -> int:
    counts = Counter(v.value for v in votes)
    top = max(counts.values())
    tied = sorted(g for g, c in counts.items() if c == top)
    if len(tied) == 1 or tiebreak == "highest":
        return tied[-1]
    if tiebreak != "accuracy":
        raise ValueError(f"unknown tie-break {tiebreak!r}")
    if accuracies is None:
        raise InputError("accuracy tie-break needs worker accuracies")

    def mean_acc(grade):
        voters = [v.worker for v in votes if v.value == grade]
        missing = [w for w in voters if w not in accuracies]
        if missing:
            raise InputError(f"no accuracy for worker(s) {', '.join(missing)}")
        return statistics.fmean(accuracies[w] for w in voters)

    return max(tied, key=lambda g: (mean_acc(g), g))


def majority_votes(j: JudgmentSet, tiebreak: str = "highest", accuracies=None) -> dict[str, int]:
    return {u: _vote(v, tiebreak, accuracies) for u, v in j.by_unit().items()}


def disagreement_rates(j: JudgmentSet) -> dict[str, float]:
    majority = majority_votes(j, "highest")
    given: Counter = Counter()
    wrong: Counter = Counter()
    for r in j.records:
        given[r.worker] += 1
        wrong[r.worker] += r.value != majority[r.unit]
    return {w: wrong[w] / given[w] for w in given}


def filter_workers(j: JudgmentSet, threshold: float = 0.412) -> JudgmentSet:
    """Drop workers who disagree with the unit majority on strictly more
    than ``threshold`` of their judgments. Majorities are computed once, on
    the unfiltered set."""
    rates = disagreement_rates(j)
    dropped = {w for w, rate in rates.items() if rate > threshold}
    return JudgmentSet(tuple(r for r in j.records if r.worker not in dropped))


# -- Krippendorff's alpha ----------------------------------------------------


@dataclass(frozen=True)
class OrdinalDistance:
    matrix: np.ndarray

    def __post_init__(self):
        m = np.array(self.matrix, dtype=np.float64)
        if m.shape != (4, 4):
            raise ValueError("distance matrix must be 4x4")
        if not np.array_equal(m, m.T) or np.any(np.diag(m) != 0):
            raise ValueError("distance matrix must be symmetric with a zero diagonal")
        if np.any(m < 0) or np.any(m > 1):
            raise ValueError("distances must lie in [0, 1]")
        m.setflags(write=False)
        object.__setattr__(self, "matrix", m)

    def __call__(self, a: int, b: int) -> float:
        return float(self.matrix[a, b])


def default_ordinal_distance() -> OrdinalDistance:
    """Distance between grades 0-3 that treats the gap between "irrelevant"
    and the relevant grades as larger than the gaps among them."""
    return OrdinalDistance(
        np.array(
            [
                [0.00, 0.50, 0.75, 1.00],
                [0.50, 0.00, 0.25, 0.50],
                [0.75, 0.25, 0.00, 0.25],
                [1.00, 0.50, 0.25, 0.00],
            ]
        )
    )


def binary_distance() -> OrdinalDistance:
    return OrdinalDistance(1.0 - np.eye(4))


def coincidence_matrix(j: JudgmentSet) -> np.ndarray:
    """Value-by-value coincidences over units with at least two judgments."""
    o = np.zeros((4, 4))
    for votes in j.by_unit().values():
        m = len(votes)
        if m < 2:
            continue
        counts = np.bincount([v.value for v in votes], minlength=4).astype(float)
        o += (np.outer(counts, counts) - np.diag(counts)) / (m - 1)
    return o


def krippendorff_alpha(j: JudgmentSet, d: OrdinalDistance | None = None) -> float:
    """``1 - D_o / D_e`` from the coincidence matrix of pairable values."""
    d = d or default_ordinal_distance()
    pairable = [u for u, v in j.by_unit().items() if len(v) >= 2]
    if len(pairable) < 2:
        raise InputError("alpha needs at least two units with two or more judgments")
    o = coincidence_matrix(j)
    n_c = o.sum(axis=1)
    n = n_c.sum()
    delta = d.matrix
    observed = float((o * delta).sum()) / n
    expected = float((np.outer(n_c, n_c) * delta).sum()) / (n * (n - 1))
    if expected == 0:
        raise InputError("agreement undefined: expected disagreement is zero")
    return 1.0 - observed / expected


# -- timings -----------------------------------------------------------------


class Timing(NamedTuple):
    strategy: str
    n_entities: int
    nnz: int
    median_ms: float


def bench(
    runs: Mapping[str, Callable[[], object]],
    repetitions: int,
    n_entities: int,
    nnz: int,
    clock: Callable[[], float] = time.perf_counter,
) -> list[Timing]:
    """Median wall-clock time of each named callable over ``repetitions``
    calls, in insertion order."""
    if repetitions < 1:
        raise InputError("repetitions must be at least 1")
    out = []
    for name, fn in runs.items():
        samples = []
        for _ in range(repetitions):
            t0 = clock()
            fn()
            samples.append((clock() - t0) * 1000.0)
        out.append(Timing(name, n_entities, nnz, statistics.median(samples)))
    return out


def timings_csv(rows: Sequence[Timing]) -> str:
    lines = ["strategy,n_entities,nnz,median_ms"]
    lines += [f"{t.strategy},{t.n_entities},{t.nnz},{t.median_ms:.3f}" for t in rows]
    return "\n".join(lines) + "\n"
