import math

import pytest
from hypothesis import given, settings, strategies as st

from ufotree import (
    MAX,
    SUM,
    CycleError,
    DuplicateEdge,
    MissingEdge,
    NotConnected,
    OracleForest,
    oracle_cut,
    oracle_from_edges,
    oracle_link,
    oracle_query,
    product,
)


@pytest.fixture
def five():
    # 0 -2- 1 -3- 2, 1 -4- 3, 3 -1- 4; hand-checked answers below
    return oracle_from_edges(5, [(0, 1, 2), (1, 2, 3), (1, 3, 4), (3, 4, 1)])


def test_link_records_edge():
    f = OracleForest(3)
    oracle_link(f, 0, 1, 5)
    assert f.edges() == [(0, 1, 5)]


def test_two_links_make_a_path():
    f = OracleForest(3)
    oracle_link(f, 0, 1)
    oracle_link(f, 1, 2)
    assert f.component(0) and sorted(f.component(0)) == [0, 1, 2]
    assert f.path_query(0, 2) == 2


def test_duplicate_link():
    f = oracle_from_edges(3, [(0, 1)])
    with pytest.raises(DuplicateEdge):
        f.link(0, 1)
    with pytest.raises(DuplicateEdge):
        f.link(1, 0)


def test_cycle_and_self_loop():
    f = oracle_from_edges(3, [(0, 1), (1, 2)])
    with pytest.raises(CycleError):
        f.link(0, 2)
    with pytest.raises(CycleError):
        f.link(1, 1)


def test_cut_splits_path():
    f = oracle_from_edges(3, [(0, 1), (1, 2)])
    oracle_cut(f, 0, 1)
    assert not f.connected(0, 1)
    assert f.connected(1, 2)


def test_cut_missing_edge():
    f = oracle_from_edges(3, [(0, 1), (1, 2)])
    with pytest.raises(MissingEdge):
        f.cut(0, 2)


def test_star_cut_leaf():
    f = oracle_from_edges(5, [(0, i) for i in range(1, 5)])
    f.cut(0, 3)
    assert sorted(f.component(0)) == [0, 1, 2, 4]
    assert f.component(3) == [3]


def test_weighted_path_sum_and_max():
    f = oracle_from_edges(3, [(0, 1, 5), (1, 2, 7)])
    assert oracle_query(f, "path", 0, 2) == 12
    g = oracle_from_edges(3, [(0, 1, 5), (1, 2, 7)], MAX)
    assert g.path_query(0, 2) == 7


def test_lca_root_on_path():
    f = oracle_from_edges(3, [(0, 1), (1, 2)])
    assert f.lca(0, 2, 1) == 1


def test_five_vertex_fixture(five):
    assert five.path_query(0, 4) == 7
    assert five.path_query(2, 4) == 8
    assert five.path_query(3, 3) == 0
    assert five.lca(2, 4, 0) == 1
    assert five.lca(4, 3, 2) == 3
    assert five.lca(0, 0, 4) == 0
    # lengths equal weights under SUM: 2 -> 1 -> 3 -> 4 is 3 + 4 + 1
    assert five.diameter(0) == 8
    assert five.path_length(0, 4) == 7


def test_five_vertex_subtree_and_marks(five):
    for v, val in enumerate([1, 10, 100, 1000, 10000]):
        five.set_value(v, val)
    assert five.subtree_query(1, 0) == 11110
    assert five.subtree_query(3, 1) == 11000
    assert five.subtree_query(0, 1) == 1
    assert five.nearest_marked(0) == math.inf
    five.mark(4)
    five.mark(2)
    assert five.nearest_marked(0) == 5
    assert five.nearest_marked(3) == 1
    five.mark(4, False)
    assert five.nearest_marked(3) == 7


def test_not_connected_errors():
    f = OracleForest(4)
    with pytest.raises(NotConnected):
        f.path_query(0, 1)
    with pytest.raises(NotConnected):
        f.lca(0, 1, 2)


def test_unknown_query_kind():
    with pytest.raises(ValueError):
        oracle_query(OracleForest(2), "median", 0)


def test_product_spec_is_componentwise():
    sm = product(SUM, MAX)
    f = oracle_from_edges(3, [(0, 1, (5, 5)), (1, 2, (7, 7))], sm)
    assert f.path_query(0, 2) == (12, 7)
    assert sm.invertible is False


@st.composite
def forests(draw, max_n=12):
    n = draw(st.integers(2, max_n))
    edges = []
    for v in range(1, n):
        if draw(st.booleans()):
            u = draw(st.integers(0, v - 1))
            edges.append((u, v, draw(st.integers(-9, 9))))
    return n, edges


@given(forests())
def test_connectivity_is_an_equivalence(data):
    n, edges = data
    f = oracle_from_edges(n, edges)
    comp = {}
    for v in range(n):
        comp.setdefault(min(f.component(v)), set()).add(v)
    for u in range(n):
        for v in range(n):
            same = any(u in c and v in c for c in comp.values())
            assert f.connected(u, v) == same


@given(forests(), st.data())
def test_sum_paths_split_at_an_inner_vertex(data, draw):
    n, edges = data
    f = oracle_from_edges(n, edges)
    u = draw.draw(st.integers(0, n - 1))
    w = draw.draw(st.sampled_from(f.component(u)))
    v = draw.draw(st.sampled_from(f._path(u, w)))
    assert f.path_query(u, v) + f.path_query(v, w) == f.path_query(u, w)


@given(forests())
def test_edge_count_matches_components(data):
    n, edges = data
    f = oracle_from_edges(n, edges)
    assert f.is_forest()
    comps = len({min(f.component(v)) for v in range(n)})
    assert len(f.edges()) == n - comps


@settings(max_examples=50)
@given(st.integers(-9, 9), st.integers(-9, 9))
def test_inverse_law_for_sum(x, y):
    assert SUM.inverse(SUM.combine(x, y), y) == x
    assert SUM.combine(x, SUM.identity) == x
