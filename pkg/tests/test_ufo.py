import math

import pytest
from hypothesis import HealthCheck, given, settings, strategies as st

from helpers import SUMMAX, Fuzz
from ufotree import (
    MAX,
    SUM,
    CycleError,
    DuplicateEdge,
    MissingEdge,
    NotConnected,
    UFOTree,
    WorkloadSpec,
    generate,
)
from ufotree.ufo import (
    delete_ancestors,
    ufo_build,
    ufo_connected,
    ufo_cut,
    ufo_diameter,
    ufo_height,
    ufo_lca,
    ufo_link,
    ufo_mark,
    ufo_nearest_marked,
    ufo_path_query,
    ufo_subtree_query_invertible,
    ufo_subtree_query_noninv,
)

STAR5 = [(0, i) for i in range(1, 5)]
# center 0 with four arms of three edges each; weights equal the child id
STAR_OF_PATHS = [
    (0, 1, 1), (1, 2, 2), (2, 3, 3), (0, 4, 4), (4, 5, 5), (5, 6, 6),
    (0, 7, 7), (7, 8, 8), (8, 9, 9), (0, 10, 10), (10, 11, 11), (11, 12, 12),
]


def path_edges(n, w=1):
    return [(i, i + 1, w) for i in range(n - 1)]


def test_star_has_height_one():
    t = ufo_build(STAR5, 5)
    assert ufo_height(t) == 1
    t.check()
    t.check_contraction()


def test_small_heights():
    assert ufo_height(ufo_build(path_edges(2), 2)) == 1
    assert ufo_height(ufo_build(path_edges(6), 6)) <= 3
    assert ufo_height(ufo_build([], 1)) == 0


def test_short_paths_exceed_half_diameter():
    # no legal merge joins three path vertices, so a 3-path needs two levels
    # and a 5-path three, one more than ceil(D / 2)
    assert ufo_height(ufo_build(path_edges(3), 3)) == 2
    assert ufo_height(ufo_build(path_edges(5), 5)) == 3


def test_star_subtree_sum():
    spec = SUM.with_vertex_values({v: 1 for v in range(5)})
    t = ufo_build(STAR5, 5, spec)
    assert ufo_subtree_query_invertible(t, 0, 3) == 4
    assert ufo_subtree_query_invertible(t, 3, 0) == 1


def test_star_subtree_max_then_cut():
    spec = MAX.with_vertex_values({0: 9, 1: 1, 2: 7, 3: 3, 4: 5})
    t = ufo_build(STAR5, 5, spec, rank_trees=True)
    assert ufo_subtree_query_noninv(t, 0, 1) == 9
    assert ufo_subtree_query_noninv(t, 1, 0) == 1
    # the max-bearing vertex becomes a leaf of a smaller star
    ufo_cut(t, 0, 2)
    assert ufo_subtree_query_noninv(t, 1, 0) == 1
    assert ufo_subtree_query_noninv(t, 0, 4) == 9
    t.set_value(0, -1)
    assert ufo_subtree_query_noninv(t, 0, 4) == 3
    t.check()


def test_subtree_entry_points_check_mode():
    with pytest.raises(ValueError):
        ufo_subtree_query_invertible(ufo_build(STAR5, 5, MAX), 0, 1)
    with pytest.raises(ValueError):
        ufo_subtree_query_noninv(ufo_build(STAR5, 5, SUM, metrics=False), 0, 1)


def test_star_lca():
    t = ufo_build(STAR5, 5)
    assert ufo_lca(t, 1, 2, 3) == 0
    assert ufo_lca(t, 1, 1, 3) == 1
    assert ufo_lca(t, 0, 2, 3) == 0


def test_weighted_path_query():
    t = ufo_build([(0, 1, 5), (1, 2, 7)], 3)
    assert ufo_path_query(t, 0, 2) == 12
    assert ufo_path_query(t, 1, 1) == 0
    m = ufo_build([(0, 1, 5), (1, 2, 7)], 3, MAX)
    assert ufo_path_query(m, 0, 2) == 7


def test_path_through_star_merge():
    # values frozen from the oracle
    t = ufo_build(STAR_OF_PATHS, 13)
    assert ufo_path_query(t, 3, 12) == 39
    assert ufo_path_query(t, 1, 9) == 25
    assert ufo_diameter(t, 0) == 57


def test_diameter_and_marks():
    assert ufo_diameter(ufo_build([], 1), 0) == 0
    t = ufo_build(path_edges(6), 6)
    assert ufo_diameter(t, 2) == 5
    assert ufo_nearest_marked(t, 0) == math.inf
    ufo_mark(t, 2)
    assert ufo_nearest_marked(t, 0) == 2
    assert ufo_nearest_marked(t, 2) == 0
    ufo_mark(t, 2, False)
    assert ufo_nearest_marked(t, 2) == math.inf


def test_random_tree_frozen_answers():
    # answers computed once by the oracle on this generated tree
    edges = generate(WorkloadSpec("random_unbounded", 50, seed=7))
    spec = SUM.with_vertex_values({v: v for v in range(50)})
    t = ufo_build(edges, 50, spec)
    assert ufo_path_query(t, 3, 41) == 3072
    assert ufo_path_query(t, 0, 49) == 4208
    assert ufo_path_query(t, 12, 30) == 2043
    assert ufo_lca(t, 5, 17, 0) == 28
    assert ufo_lca(t, 3, 41, 10) == 34
    assert ufo_lca(t, 22, 8, 49) == 21
    assert ufo_diameter(t, 0) == 5523
    assert t.subtree_query(21, 28) == 549
    assert t.subtree_query(44, 13) == 83
    t.mark(9)
    t.mark(33)
    assert ufo_nearest_marked(t, 0) == 3333
    assert ufo_nearest_marked(t, 40) == 3666
    m = ufo_build(edges, 50, MAX)
    assert ufo_path_query(m, 3, 41) == 872
    assert ufo_path_query(m, 0, 49) == 875


def test_update_errors():
    t = ufo_build([(0, 1), (1, 2)], 4)
    with pytest.raises(DuplicateEdge):
        ufo_link(t, 1, 0)
    with pytest.raises(CycleError):
        ufo_link(t, 0, 2)
    with pytest.raises(CycleError):
        ufo_link(t, 3, 3)
    with pytest.raises(MissingEdge):
        ufo_cut(t, 0, 2)
    with pytest.raises(NotConnected):
        ufo_path_query(t, 0, 3)
    with pytest.raises(IndexError):
        ufo_link(t, 0, 9)
    t.check()


def test_link_then_cut_restores_answers():
    t = ufo_build(path_edges(10, 2), 10)
    before = [ufo_path_query(t, 0, v) for v in range(10)]
    ufo_cut(t, 4, 5)
    assert not ufo_connected(t, 0, 9)
    ufo_link(t, 4, 5, 2)
    assert [ufo_path_query(t, 0, v) for v in range(10)] == before
    t.check_contraction()


# -- delete_ancestors ------------------------------------------------------------


def _ancestors(c):
    out = []
    while c.parent is not None:
        c = c.parent
        out.append(c)
    return out


def test_delete_ancestors_frees_low_chain():
    t = ufo_build(path_edges(8), 8)
    leaf = t.leaves[0]
    anc = _ancestors(leaf)
    assert len(anc) >= 3
    others = [c for a in anc for c in a.children if c not in anc and c is not leaf]
    t._begin()
    t._delete_ancestors([leaf])
    assert not any(a.alive for a in anc)
    assert leaf.parent is None
    assert all(c.parent is None for c in others)
    t._recluster()
    t._finish()
    t.check()
    t.check_contraction()


def test_delete_ancestors_keeps_high_fanout():
    t = ufo_build([(0, i) for i in range(1, 6)], 6)
    star = t.leaves[1].parent
    assert len(star.children) == 6
    t._begin()
    t._delete_ancestors([t.leaves[1]])
    assert star.alive
    assert t.leaves[1].parent is None
    assert t.leaves[2].parent is star
    t._recluster()
    t._finish()
    t.check()
    assert t.leaves[1].parent is star


def test_delete_ancestors_keeps_high_degree_link():
    # spider: hub 0 with three arms of three vertices
    edges = [(0, 1), (1, 2), (2, 3), (0, 4), (4, 5), (5, 6), (0, 7), (7, 8), (8, 9)]
    t = ufo_build(edges, 10)
    hub = t.leaves[0]
    P = hub.parent
    assert len(P.nbrs) == 3
    t._begin()
    t._delete_ancestors([hub])
    assert P.alive and hub.parent is P
    t._recluster()
    t._finish()
    t.check()


def test_delete_ancestors_public_entry():
    t = ufo_build(path_edges(8), 8)
    delete_ancestors(t, t.leaves[3], 0)
    t.check()
    t.check_contraction()
    with pytest.raises(ValueError):
        delete_ancestors(t, t.leaves[3], 2)


# -- properties -------------------------------------------------------------------


def _assert_locality(t):
    s = t.stats
    assert max(s.roots, default=0) <= 500
    assert max(s.deletions, default=0) <= 360
    assert s.max_root_degree <= 4
    assert s.high_frees == 0


@settings(max_examples=25, deadline=None, suppress_health_check=[HealthCheck.too_slow])
@given(
    n=st.integers(2, 40),
    seed=st.integers(0, 10**6),
    hub=st.sampled_from([0.0, 0.5]),
    rank=st.booleans(),
)
def test_random_ops_match_oracle(n, seed, hub, rank):
    t = UFOTree(n, SUMMAX, rank_trees=rank or None)
    f = Fuzz(n, {"ufo": t}, seed=seed, hub=hub)
    for _ in range(80):
        op = f.step()
        if op[0] in ("link", "cut"):
            _assert_locality(t)
        t.check()
        t.check_contraction()
        f.check_queries(2)


@settings(max_examples=20, deadline=None)
@given(n=st.integers(2, 60), seed=st.integers(0, 10**6))
def test_plain_mode_keeps_contraction_invariants(n, seed):
    t = UFOTree(n, SUM, subtree=False, metrics=False)
    f = Fuzz(n, {"ufo": t}, spec=SUM, seed=seed, hub=0.3)
    for _ in range(80):
        op = f.step()
        if op[0] in ("link", "cut"):
            _assert_locality(t)
            t.check_contraction()
        u, v = f.rng.randrange(n), f.rng.randrange(n)
        assert t.connected(u, v) == f.oracle.connected(u, v)
    t.check()


@settings(max_examples=15, deadline=None)
@given(family=st.sampled_from(["path", "star", "binary", "dandelion", "zipf", "pref_attach"]),
       n=st.integers(1, 300), seed=st.integers(0, 1000))
def test_build_height_bound(family, n, seed):
    from ufotree.workloads import tree_diameter

    edges = generate(WorkloadSpec(family, n, seed=seed))
    t = UFOTree(n, SUM, edges, subtree=False, metrics=False)
    D = tree_diameter(n, edges)
    # the last two levels can each remove only one vertex of a short path
    bound = min(math.ceil(D / 2) + 1, math.ceil(math.log(n, 1.2)) if n > 1 else 0)
    assert t.height() <= bound
    t.check()
    t.check_contraction()
