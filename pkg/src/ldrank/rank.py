"""PageRank-style ranking with a prior-biased teleportation.

The chain is ``H = alpha * S + (1 - alpha) * T`` where ``S`` is the
row-normalized adjacency matrix (dangling rows replaced by a jump
distribution) and every row of ``T`` is the prior. Neither ``S``'s dangling
rows nor ``T`` are ever materialized: one step costs a single sparse
transposed product plus two scalar corrections.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Mapping, Iterable

import numpy as np

from .consensus import consensus
from .errors import InputError
from .ingest import Serp
from .linalg import IterationResult, SparseMatrixCCS, power_iteration, spmv_t
from .model import EntityGraph, Query, adjacency_matrix
from .priors import ProbVector, hit_prior, info_need, svd_prior, uniform_prior
from .text import EntityTermMatrix


class Strategy(str, enum.Enum):
    EQUI = "equi"
    HIT = "hit"
    SVD = "svd"
    LDRANK = "ldrank"

    @classmethod
    def parse(cls, name: str) -> "Strategy":
        try:
            return cls(name.lower())
        except ValueError:
            raise InputError(f"unknown strategy {name!r}; expected one of equi, hit, svd, ldrank") from None


@dataclass(frozen=True)
class LdrankConfig:
    alpha: float = 0.7
    tol: float = 1e-10
    max_iter: int = 10_000
    epsilon_smoothing: float = 1e-8
    bidirectional: bool = False
    edge_weighting: str = "unit"
    dangling: str = "prior"
    # prior construction
    stress: float = 1000.0
    nb_dim: int = 1
    consensus_tol: float = 1e-9
    consensus_distance: str = "tv"
    seed: int = 0

    def __post_init__(self):
        if not 0 < self.alpha < 1:
            raise InputError(f"alpha must lie in (0, 1), got {self.alpha}")
        if not 0 <= self.epsilon_smoothing <= 1e-3:
            raise InputError(f"epsilon_smoothing must lie in [0, 1e-3], got {self.epsilon_smoothing}")
        if self.dangling not in ("prior", "uniform"):
            raise InputError(f"dangling policy must be 'prior' or 'uniform', got {self.dangling!r}")
        if self.edge_weighting not in ("unit", "multiplicity"):
            raise InputError(f"edge weighting must be 'unit' or 'multiplicity', got {self.edge_weighting!r}")
        if self.tol <= 0 or self.max_iter < 1 or self.nb_dim < 1:
            raise InputError("tol, max_iter and nb_dim must be positive")


class StochasticOperator:
    """Row-stochastic view of an adjacency matrix, applied as ``x -> x^T S``.

    Nonzero rows are divided by their sums. Dangling rows behave as
    ``dangling_dist`` (``policy="prior"``) or as the uniform distribution.
    """

    def __init__(self, m: SparseMatrixCCS, dangling_dist, policy: str = "prior"):
        if m.nrows != m.ncols:
            raise InputError("adjacency matrix must be square")
        n = m.nrows
        d = dangling_dist.values if isinstance(dangling_dist, ProbVector) else np.asarray(dangling_dist, float)
        if d.shape != (n,):
            raise InputError("dangling distribution has the wrong length")
        if policy == "uniform":
            d = np.full(n, 1.0 / n)
        elif policy != "prior":
            raise InputError(f"unknown dangling policy {policy!r}")
        sums = m.row_sums()
        self.dangling = sums == 0
        inv = np.zeros(n)
        inv[~self.dangling] = 1.0 / sums[~self.dangling]
        self.matrix = m.scale_rows(inv)
        self.dangling_dist = d
        self.n = n

    def apply(self, x: np.ndarray) -> np.ndarray:
        """``x^T S`` for a row vector ``x``."""
        return spmv_t(self.matrix, x) + x[self.dangling].sum() * self.dangling_dist

    __call__ = apply

    def to_dense(self) -> np.ndarray:
        s = self.matrix.to_dense()
        s[self.dangling] = self.dangling_dist
        return s


def stochastic_matrix(m: SparseMatrixCCS, dangling_dist, policy: str = "prior") -> StochasticOperator:
    return StochasticOperator(m, dangling_dist, policy)


def smooth_prior(prior: ProbVector, epsilon: float) -> ProbVector:
    n = len(prior)
    p = (1.0 - epsilon) * prior.values + epsilon / n
    return ProbVector(p / p.sum(), prior.labels)


def stationary(s_op: StochasticOperator, prior: ProbVector, cfg: LdrankConfig = LdrankConfig()) -> ProbVector:
    """Stationary distribution of ``alpha * S + (1 - alpha) * 1 prior^T``.

    The prior is first smoothed towards uniform by ``cfg.epsilon_smoothing``
    so that the chain is primitive; iteration starts from the smoothed prior.
    """
    return stationary_result(s_op, prior, cfg)[0]


def stationary_result(
    s_op: StochasticOperator, prior: ProbVector, cfg: LdrankConfig = LdrankConfig()
) -> tuple[ProbVector, IterationResult]:
    if len(prior) != s_op.n:
        raise InputError("prior length does not match the graph")
    teleport = smooth_prior(prior, cfg.epsilon_smoothing).values
    alpha = cfg.alpha

    def step(x):
        return alpha * s_op(x) + (1.0 - alpha) * x.sum() * teleport

    res = power_iteration(step, teleport, tol=cfg.tol, max_iter=cfg.max_iter, renormalize="L1")
    x = res.x / res.x.sum()
    return ProbVector(x, prior.labels), res


@dataclass(frozen=True)
class RankedList:
    """Entities by descending score; equal scores keep intern order."""

    entities: tuple[str, ...]
    scores: np.ndarray
    distribution: ProbVector = field(repr=False)

    @classmethod
    def from_distribution(cls, dist: ProbVector) -> "RankedList":
        v = dist.values
        order = np.lexsort((np.arange(v.size), -v))
        return cls(tuple(dist.labels[i] for i in order), v[order], dist)

    def __len__(self):
        return len(self.entities)

    def __iter__(self):
        return iter(zip(self.entities, self.scores.tolist()))

    def top(self, k: int) -> list[str]:
        return list(self.entities[:k])

    def to_tsv(self) -> str:
        return "".join(f"{e}\t{s:.17g}\n" for e, s in self)


def write_ranking(path, ranking: RankedList) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(ranking.to_tsv())


def read_ranking(path) -> list[tuple[str, float]]:
    from .ingest import _rows

    out = []
    for _, (uri, score) in _rows(path, 2):
        out.append((uri, float(score)))
    return out


@dataclass
class RankInputs:
    serp: Serp | None = None
    doc_entities: Mapping[str, Iterable[str]] | None = None
    query: Query | None = None
    matrix: EntityTermMatrix | None = None


def compute_priors(g: EntityGraph, strategy: Strategy, inputs: RankInputs, cfg: LdrankConfig) -> dict[str, ProbVector]:
    """The named priors a strategy needs; for LDRANK also ``"final"``."""
    strategy = Strategy.parse(strategy) if isinstance(strategy, str) else strategy
    labels = g.uris
    need_hit = strategy in (Strategy.HIT, Strategy.SVD, Strategy.LDRANK)
    need_svd = strategy in (Strategy.SVD, Strategy.LDRANK)
    missing = []
    if need_hit and inputs.serp is None:
        missing.append("serp")
    if need_hit and inputs.doc_entities is None:
        missing.append("doc_entities")
    if need_svd and inputs.matrix is None:
        missing.append("entity-term matrix (texts)")
    if missing:
        raise InputError(f"strategy {strategy.value} needs: {', '.join(missing)}")

    priors = {}
    if strategy in (Strategy.EQUI, Strategy.LDRANK):
        priors["equi"] = uniform_prior(g.n, labels)
    if strategy in (Strategy.HIT, Strategy.LDRANK):
        priors["hit"] = hit_prior(inputs.serp, inputs.doc_entities, labels)
    if need_svd:
        if inputs.matrix.row_entities != labels:
            raise InputError("entity-term matrix rows do not match the graph's entities")
        need = info_need(inputs.query or Query(), inputs.serp, inputs.doc_entities, labels)
        priors["svd"] = svd_prior(
            inputs.matrix, sorted(need, key=g.index), cfg.stress, cfg.nb_dim, tol=cfg.tol, seed=cfg.seed
        )
    if strategy is Strategy.LDRANK:
        priors["final"] = consensus(
            [priors["equi"], priors["hit"], priors["svd"]], tol=cfg.consensus_tol, distance=cfg.consensus_distance
        )
    return priors


def rank_with_prior(g: EntityGraph, prior: ProbVector, cfg: LdrankConfig = LdrankConfig()) -> RankedList:
    m = adjacency_matrix(g, bidirectional=cfg.bidirectional, weighting=cfg.edge_weighting)
    teleport = smooth_prior(prior, cfg.epsilon_smoothing)
    s_op = StochasticOperator(m, teleport, cfg.dangling)
    return RankedList.from_distribution(stationary(s_op, prior, cfg))


def rank(
    g: EntityGraph,
    strategy: Strategy | str,
    inputs: RankInputs | None = None,
    cfg: LdrankConfig = LdrankConfig(),
) -> RankedList:
    """Rank the graph's entities with one of the four strategies.

    EQUI teleports uniformly (plain PageRank), HIT by SERP hit scores, SVD
    by the stressed-SVD prior and LDRANK by the consensus of all three.
    """
    strategy = Strategy.parse(strategy) if isinstance(strategy, str) else strategy
    priors = compute_priors(g, strategy, inputs or RankInputs(), cfg)
    key = {Strategy.EQUI: "equi", Strategy.HIT: "hit", Strategy.SVD: "svd", Strategy.LDRANK: "final"}[strategy]
    return rank_with_prior(g, priors[key], cfg)
