"""Entity ranking over Linked Data graphs with a consensus-built PageRank prior."""

from .consensus import consensus
from .errors import ConvergenceError, InputError, LdrankError, ParseError
from .evaluate import JudgmentSet, krippendorff_alpha, ndcg
from .linalg import SparseMatrixCCS, spmv, spmv_t, truncated_svd
from .model import EntityGraph, Query, adjacency_matrix, build_graph
from .parafac import cp_als, select_triples
from .priors import ProbVector, hit_prior, svd_prior, uniform_prior
from .rank import LdrankConfig, RankedList, RankInputs, Strategy, rank
from .text import build_matrix

__version__ = "0.1.0"

__all__ = [
    "ConvergenceError",
    "EntityGraph",
    "InputError",
    "JudgmentSet",
    "LdrankConfig",
    "LdrankError",
    "ParseError",
    "ProbVector",
    "Query",
    "RankInputs",
    "RankedList",
    "SparseMatrixCCS",
    "Strategy",
    "adjacency_matrix",
    "build_graph",
    "build_matrix",
    "consensus",
    "cp_als",
    "hit_prior",
    "krippendorff_alpha",
    "ndcg",
    "rank",
    "select_triples",
    "spmv",
    "spmv_t",
    "svd_prior",
    "truncated_svd",
    "uniform_prior",
]
