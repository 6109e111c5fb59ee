"""Consensual linear pooling of expert distributions.

Every round, each expert replaces its opinion by the average of itself and
a mixture of all opinions in which expert ``j`` weighs in proportion to its
distance from the revising expert. Rounds are synchronous. The self-weight
of one half keeps two-expert pools from oscillating.
"""

from __future__ import annotations

from typing import Callable, Sequence

import numpy as np

from .errors import ConvergenceError, InputError
from .priors import ProbVector


def tv_distance(p, q) -> float:
    """Total variation distance, ``0.5 * sum |p_i - q_i|``."""
    p = p.values if isinstance(p, ProbVector) else np.asarray(p, dtype=np.float64)
    q = q.values if isinstance(q, ProbVector) else np.asarray(q, dtype=np.float64)
    return 0.5 * float(np.abs(p - q).sum())


def l2_distance(p, q) -> float:
    p = p.values if isinstance(p, ProbVector) else np.asarray(p, dtype=np.float64)
    q = q.values if isinstance(q, ProbVector) else np.asarray(q, dtype=np.float64)
    return float(np.linalg.norm(p - q))


DISTANCES: dict[str, Callable] = {"tv": tv_distance, "l2": l2_distance}


def _pairwise(P: np.ndarray, distance: str) -> np.ndarray:
    diff = P[:, None, :] - P[None, :, :]
    if distance == "tv":
        return 0.5 * np.abs(diff).sum(axis=2)
    if distance == "l2":
        return np.sqrt((diff**2).sum(axis=2))
    raise ValueError(f"unknown distance {distance!r}")


def consensus_round(P: np.ndarray, distance: str = "tv") -> np.ndarray:
    """One synchronous revision of the ``(m, n)`` opinion matrix."""
    D = _pairwise(P, distance)
    totals = D.sum(axis=1)
    out = P.copy()
    moving = totals > 0
    if moving.any():
        W = D[moving] / totals[moving, None]
        out[moving] = 0.5 * P[moving] + 0.5 * (W @ P)
    return out


def consensus(
    opinions: Sequence[ProbVector],
    tol: float = 1e-9,
    max_iter: int = 10_000,
    distance: str = "tv",
    history: list | None = None,
) -> ProbVector:
    """Pool the opinions until every pairwise distance is below ``tol`` and
    return the mean of the converged opinions.

    If ``history`` is a list, the maximum pairwise distance before each
    round (and after the last) is appended to it.

    Raises
    ------
    InputError
        Empty pool or opinions over different entity labels.
    ConvergenceError
        After ``max_iter`` rounds; ``state`` is the last opinion matrix.
    """
    if not opinions:
        raise InputError("consensus needs at least one opinion")
    labels = opinions[0].labels
    for op in opinions[1:]:
        if op.labels != labels:
            raise InputError("all opinions must share the same entity labels")
    P = np.stack([op.values for op in opinions])
    for _ in range(max_iter + 1):
        spread = float(_pairwise(P, distance).max())
        if history is not None:
            history.append(spread)
        if spread < tol:
            mean = P.mean(axis=0)
            return ProbVector(mean / mean.sum(), labels)
        P = consensus_round(P, distance)
    raise ConvergenceError(f"consensus did not converge in {max_iter} rounds (spread {spread:.3g})", state=P)
