import numpy as np
import pytest
from hypothesis import given, strategies as st

from conftest import DBR
from ldrank.errors import InputError
from ldrank.model import build_graph
from ldrank.text import (
    PorterStemmer,
    build_matrix,
    default_stopwords,
    get_stemmer,
    matrix_from_tokens,
    tokenize,
)


@pytest.mark.parametrize(
    "word,stem",
    [("boxing", "box"), ("boxer", "boxer"), ("caresses", "caress"), ("ponies", "poni"), ("relational", "relat")],
)
def test_porter_golden(word, stem):
    assert PorterStemmer()(word) == stem


def test_tokenize_filters_and_stems():
    toks = tokenize("The Boxers were BOXING, a x_y e-mail!", default_stopwords(), PorterStemmer())
    assert toks == ["boxer", "box", "mail"]


def test_default_stopwords_loaded():
    sw = default_stopwords()
    assert {"the", "and", "of"} <= sw
    assert "lyon" not in sw


def test_get_stemmer():
    assert get_stemmer("identity")("boxing") == "boxing"
    with pytest.raises(ValueError):
        get_stemmer("lancaster")


def test_tf_matrix_and_vocabulary_order():
    m = matrix_from_tokens(["a", "b"], [["x", "y", "x"], ["y", "z"]])
    assert m.vocabulary.terms == ("x", "y", "z")
    np.testing.assert_array_equal(m.matrix.to_dense(), [[2, 1, 0], [0, 1, 1]])


def test_tfidf_drops_ubiquitous_terms():
    m = matrix_from_tokens(["a", "b"], [["x", "y"], ["y", "z"]], weighting="tfidf")
    dense = m.matrix.to_dense()
    assert dense[:, 1].tolist() == [0, 0]
    assert dense[0, 0] == pytest.approx(np.log(2))
    assert len(m.vocabulary) == 3


def test_all_empty_text_rejected():
    with pytest.raises(InputError):
        matrix_from_tokens(["a"], [[]])


def test_build_matrix_rows_follow_graph(small_dir):
    from ldrank import ingest

    g = build_graph(ingest.parse_graph_file(small_dir / "graph.tsv"), ingest.parse_texts(small_dir / "texts.tsv"))
    m = build_matrix(g)
    assert m.row_entities == g.uris
    lyon = m.matrix.to_dense()[m.row(DBR + "Lyon")]
    assert lyon[m.vocabulary.index("gastronomi")] == 1


@given(st.lists(st.lists(st.sampled_from("abcdef"), max_size=6), min_size=1, max_size=6))
def test_tf_counts_property(rows):
    tokens = [[c * 2 for c in r] for r in rows]
    if not any(tokens):
        return
    m = matrix_from_tokens([str(i) for i in range(len(tokens))], tokens)
    dense = m.matrix.to_dense()
    np.testing.assert_array_equal(dense.sum(axis=1), [len(t) for t in tokens])
    for i, t in enumerate(tokens):
        for term in set(t):
            assert dense[i, m.vocabulary.index(term)] == t.count(term)
