import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from conftest import DBR
from oracles import dense_cp_error
from ldrank import ingest
from ldrank.errors import InputError
from ldrank.ingest import FileNeighborhoodClient
from ldrank.model import build_graph
from ldrank.parafac import Tensor3, build_tensor, cp_als, expand_1hop, select_triples

O = "http://dbpedia.org/ontology/"


def rank1(rng, dims):
    a, b, c = (rng.random(d) + 0.1 for d in dims)
    return np.einsum("i,j,k->ijk", a, b, c)


def test_tensor_roundtrip(rng):
    dense = np.where(rng.random((3, 4, 2)) < 0.5, 1.0, 0.0)
    dense[0, 0, 0] = 1.0
    t = Tensor3.from_dense(dense)
    np.testing.assert_array_equal(t.to_dense(), dense)
    assert t.norm() == pytest.approx(np.linalg.norm(dense))


def test_tensor_validation():
    with pytest.raises(ValueError):
        Tensor3((2, 2, 2), [[0, 0, 0], [0, 0, 0]], [1.0, 1.0])
    with pytest.raises(ValueError):
        Tensor3((2, 2, 2), [[2, 0, 0]], [1.0])


def test_build_tensor_from_graph(small_dir):
    g = build_graph(ingest.parse_graph_file(small_dir / "graph.tsv"))
    t = build_tensor(g)
    assert t.dims == (g.n, g.n, 5)
    assert t.predicate_labels[0] == O + "country"
    assert t.nnz == 8 and np.all(t.vals == 1.0)


def test_rank_one_recovery(rng):
    dense = rank1(rng, (5, 4, 3))
    f = cp_als(Tensor3.from_dense(dense), rank=1, iters=200, tol=1e-12)
    assert f.fit >= 0.999
    np.testing.assert_allclose(f.full(), dense, atol=1e-8)


def test_error_history_matches_dense_oracle(rng):
    dense = rank1(rng, (4, 4, 3)) + rank1(rng, (4, 4, 3))
    t = Tensor3.from_dense(dense)
    f = cp_als(t, rank=2, iters=30)
    assert f.errors[-1] == pytest.approx(dense_cp_error(dense, f.weights, f.A, f.B, f.C), abs=1e-7)
    assert f.n_iter == len(f.errors)
    assert np.all(np.diff(f.weights) <= 0)
    np.testing.assert_allclose(np.linalg.norm(f.A, axis=0), 1.0)


def test_rank_deficient_warns(rng):
    dense = rank1(rng, (3, 3, 2))
    f = cp_als(Tensor3.from_dense(dense), rank=3, iters=20)
    assert f.warnings
    assert f.fit > 0.99


def test_cp_als_errors():
    t = Tensor3.from_dense(np.ones((2, 2, 2)))
    with pytest.raises(InputError):
        cp_als(t, rank=0)


def test_cp_als_deterministic(rng):
    t = Tensor3.from_dense(rank1(rng, (4, 3, 2)) + rank1(rng, (4, 3, 2)))
    a, b = cp_als(t, rank=2, seed=3), cp_als(t, rank=2, seed=3)
    np.testing.assert_array_equal(a.A, b.A)
    assert a.errors == b.errors


def test_expand_and_select(small_dir):
    g = build_graph(ingest.parse_graph_file(small_dir / "graph.tsv"))
    client = FileNeighborhoodClient(small_dir / "neighborhood.tsv")
    h = expand_1hop(g, [DBR + "Bocuse"], client)
    assert h.n_triples == g.n_triples + 2
    assert h.uris[: g.n] == g.uris
    f = cp_als(build_tensor(h), rank=4, iters=100)
    sel = select_triples(f, h, DBR + "Bocuse", m=2, q=3)
    assert sel
    assert all(DBR + "Bocuse" in (t.subject.uri, t.object.uri) for t in sel)
    assert len({(t.subject, t.predicate, t.object) for t in sel}) == len(sel)
    assert sel == select_triples(f, h, DBR + "Bocuse", m=2, q=3)
    with pytest.raises(InputError):
        select_triples(f, h, DBR + "Bocuse", m=9)


@settings(max_examples=20, deadline=None)
@given(st.integers(0, 2**31 - 1), st.integers(1, 3))
def test_als_error_non_increasing_property(seed, rank):
    rng = np.random.default_rng(seed)
    dense = np.where(rng.random((5, 4, 3)) < 0.4, 1.0, 0.0)
    dense[0, 0, 0] = 1.0
    f = cp_als(Tensor3.from_dense(dense), rank=rank, iters=25, seed=seed, tol=0.0)
    errs = np.array(f.errors)
    assert np.all(np.diff(errs) <= 1e-9 * max(1.0, errs[0]))
