"""Triple selection through a CP (PARAFAC) decomposition of the
subject x object x predicate tensor."""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np

from .errors import InputError
from .ingest import NeighborhoodClient
from .model import EntityGraph, Triple, extend_graph

log = logging.getLogger(__name__)

RIDGE = 1e-12


def expand_1hop(g: EntityGraph, focus, client: NeighborhoodClient) -> EntityGraph:
    """Add every triple the client knows around the focus entities."""
    new = []
    for uri in focus:
        new.extend(client.expand(uri))
    return extend_graph(g, new) if new else g


@dataclass(frozen=True)
class Tensor3:
    """Sparse order-3 tensor indexed (subject, object, predicate)."""

    dims: tuple[int, int, int]
    subs: np.ndarray  # (nnz, 3) int
    vals: np.ndarray  # (nnz,)
    predicate_labels: tuple[str, ...] = ()

    def __post_init__(self):
        subs = np.asarray(self.subs, dtype=np.int64).reshape(-1, 3)
        vals = np.asarray(self.vals, dtype=np.float64)
        if vals.shape != (subs.shape[0],):
            raise ValueError("one value per nonzero")
        if subs.size and (np.any(subs < 0) or np.any(subs >= np.array(self.dims))):
            raise ValueError("tensor index out of range")
        if np.any(vals <= 0):
            raise ValueError("tensor values must be positive")
        if len({tuple(s) for s in subs.tolist()}) != subs.shape[0]:
            raise ValueError("duplicate tensor entry")
        object.__setattr__(self, "subs", subs)
        object.__setattr__(self, "vals", vals)

    @property
    def nnz(self) -> int:
        return int(self.vals.size)

    def norm(self) -> float:
        return float(np.linalg.norm(self.vals))

    def to_dense(self) -> np.ndarray:
        out = np.zeros(self.dims)
        out[self.subs[:, 0], self.subs[:, 1], self.subs[:, 2]] = self.vals
        return out

    @classmethod
    def from_dense(cls, a, predicate_labels=()) -> "Tensor3":
        a = np.asarray(a, dtype=np.float64)
        i, j, p = np.nonzero(a)
        if np.any(a[i, j, p] < 0):
            raise ValueError("tensor values must be positive")
        return cls(a.shape, np.stack([i, j, p], axis=1), a[i, j, p], tuple(predicate_labels))


def build_tensor(g: EntityGraph) -> Tensor3:
    """Binary tensor: entry (i, j, p) is 1 when triple (i, p, j) exists.
    Predicates are numbered by first appearance."""
    labels: dict[str, int] = {}
    seen = set()
    subs = []
    for s, p, o in zip(g.subjects.tolist(), g.predicates, g.objects.tolist()):
        k = labels.setdefault(p, len(labels))
        if (s, o, k) not in seen:
            seen.add((s, o, k))
            subs.append((s, o, k))
    return Tensor3((g.n, g.n, len(labels)), np.array(subs, dtype=np.int64).reshape(-1, 3), np.ones(len(subs)), tuple(labels))


@dataclass
class CpFactors:
    """``T ~ sum_r lambda_r a_r o b_r o c_r`` with unit-norm factor columns."""

    A: np.ndarray  # subjects x rank
    B: np.ndarray  # objects x rank
    C: np.ndarray  # predicates x rank
    weights: np.ndarray  # lambda, descending
    fit: float
    n_iter: int
    errors: list[float] = field(default_factory=list)
    warnings: list[str] = field(default_factory=list)

    @property
    def rank(self) -> int:
        return int(self.weights.size)

    def full(self) -> np.ndarray:
        return np.einsum("r,ir,jr,kr->ijk", self.weights, self.A, self.B, self.C)


def _mttkrp(t: Tensor3, mode: int, F1: np.ndarray, F2: np.ndarray) -> np.ndarray:
    """Matricized tensor times Khatri-Rao product for one mode, using only
    the nonzeros. ``F1``/``F2`` are the other two factors in mode order."""
    others = [m for m in range(3) if m != mode]
    rows = F1[t.subs[:, others[0]]] * F2[t.subs[:, others[1]]] * t.vals[:, None]
    out = np.zeros((t.dims[mode], F1.shape[1]))
    np.add.at(out, t.subs[:, mode], rows)
    return out


def _solve(gram: np.ndarray, rhs: np.ndarray, warnings: list[str]) -> np.ndarray:
    # rhs (n, r), gram (r, r): returns X with X @ gram = rhs
    try:
        L = np.linalg.cholesky(gram)
        if np.min(np.diag(L)) <= 1e-7 * np.max(np.diag(L)):
            raise np.linalg.LinAlgError
        return np.linalg.solve(gram, rhs.T).T
    except np.linalg.LinAlgError:
        msg = "rank-deficient normal equations; ridge 1e-12 applied"
        if msg not in warnings:
            warnings.append(msg)
            log.warning(msg)
        return np.linalg.solve(gram + RIDGE * np.eye(gram.shape[0]), rhs.T).T


def _nonzero(x):
    return np.where(x > 0, x, 1.0)


def _error(t: Tensor3, w, A, B, C) -> float:
    norm2 = float(t.vals @ t.vals)
    inner = float(np.sum(t.vals * np.einsum("nr,nr,nr,r->n", A[t.subs[:, 0]], B[t.subs[:, 1]], C[t.subs[:, 2]], w)))
    model2 = float(w @ ((A.T @ A) * (B.T @ B) * (C.T @ C)) @ w)
    return float(np.sqrt(max(norm2 - 2 * inner + model2, 0.0)))


def cp_als(t: Tensor3, rank: int = 10, iters: int = 100, seed: int = 0, tol: float = 1e-6) -> CpFactors:
    """CP decomposition by alternating least squares.

    Factors start uniform in [0, 1) from ``seed``. Each sweep solves for the
    subject, object and predicate factors in turn, then moves the column
    norms into the weights. Stops after ``iters`` sweeps or when the fit
    ``1 - ||T - T_hat|| / ||T||`` changes by less than ``tol``.
    ``errors`` holds ``||T - T_hat||`` after every sweep.
    """
    if rank < 1:
        raise InputError("rank must be at least 1")
    if t.nnz == 0:
        raise InputError("cannot decompose an empty tensor")
    rng = np.random.default_rng(seed)
    A = rng.random((t.dims[0], rank))
    B = rng.random((t.dims[1], rank))
    C = rng.random((t.dims[2], rank))
    norm = t.norm()
    errors: list[float] = []
    warnings: list[str] = []
    w = np.ones(rank)
    fit = 0.0
    n_iter = 0
    for n_iter in range(1, iters + 1):
        A = _solve((B.T @ B) * (C.T @ C), _mttkrp(t, 0, B, C), warnings)
        B = _solve((A.T @ A) * (C.T @ C), _mttkrp(t, 1, A, C), warnings)
        C = _solve((A.T @ A) * (B.T @ B), _mttkrp(t, 2, A, B), warnings)
        na, nb, nc = (np.linalg.norm(F, axis=0) for F in (A, B, C))
        w = na * nb * nc
        A, B, C = A / _nonzero(na), B / _nonzero(nb), C / _nonzero(nc)
        err = _error(t, w, A, B, C)
        errors.append(err)
        new_fit = 1.0 - err / norm
        done = n_iter > 1 and abs(new_fit - fit) < tol
        fit = new_fit
        if done:
            break
    order = np.argsort(-w, kind="stable")
    return CpFactors(A[:, order], B[:, order], C[:, order], w[order], fit, n_iter, errors, warnings)


def select_triples(f: CpFactors, g: EntityGraph, entity: str, m: int = 2, q: int = 3) -> list[Triple]:
    """Triples around ``entity`` carried by its strongest components.

    Components are ranked by ``max(|A[e, c]|, |B[e, c]|)``; the top ``m``
    with a nonzero loading are kept. In each, the ``q`` predicates with the
    largest nonzero ``|C[p, c]|`` are kept. Output order: component weight,
    then predicate loading, then (subject, object) intern indices.
    """
    if not 1 <= m <= f.rank:
        raise InputError(f"m={m} must lie in [1, rank={f.rank}]")
    if q < 1:
        raise InputError("q must be at least 1")
    e = g.index(entity)
    tensor_preds = {p: k for k, p in enumerate(dict.fromkeys(g.predicates))}
    loading = np.maximum(np.abs(f.A[e]), np.abs(f.B[e]))
    comps = [c for c in np.lexsort((np.arange(f.rank), -loading))[:m] if loading[c] > 0]
    comps.sort(key=lambda c: (-f.weights[c], c))

    incident: dict[int, list[tuple[int, int, str]]] = {}
    for s, p, o in zip(g.subjects.tolist(), g.predicates, g.objects.tolist()):
        if s == e or o == e:
            incident.setdefault(tensor_preds[p], []).append((s, o, p))

    out: list[Triple] = []
    seen = set()
    for c in comps:
        score = np.abs(f.C[:, c])
        preds = [k for k in np.lexsort((np.arange(score.size), -score))[:q] if score[k] > 0]
        for k in preds:
            for s, o, p in sorted(incident.get(int(k), [])):
                key = (s, p, o)
                if key not in seen:
                    seen.add(key)
                    out.append(Triple(g.entity(s), p, g.entity(o)))
    return out
