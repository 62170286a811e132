import io
import statistics

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from ufotree import BadSpec, ParseError
from ufotree.workloads import (
    CSV_HEADER,
    FAMILIES,
    IMPLS,
    ValidationFailure,
    WorkloadSpec,
    bench_queries,
    bench_updates,
    diameter_sweep,
    generate,
    log_ratio_fit,
    median_by,
    memory_row,
    parse_edge_list,
    parse_family,
    read_edge_list,
    spanning_forest,
    tree_diameter,
    write_edge_list,
)


def shapes(edges):
    return [e[:2] for e in edges]


def test_fixed_small_families():
    assert shapes(generate(WorkloadSpec("star", 5, permute=False))) == [(0, 1), (0, 2), (0, 3), (0, 4)]
    assert shapes(generate(WorkloadSpec("path", 4, permute=False))) == [(0, 1), (1, 2), (2, 3)]
    assert shapes(generate(WorkloadSpec("dandelion", 6, permute=False))) == [
        (0, 1), (1, 2), (0, 3), (0, 4), (0, 5)]
    assert shapes(generate(WorkloadSpec("kary", 5, arity=4, permute=False))) == [
        (0, 1), (0, 2), (0, 3), (0, 4)]


def test_weights_are_seeded():
    # frozen from the PCG64 stream for seed 0
    assert [e[2] for e in generate(WorkloadSpec("path", 4, permute=False))] == [637, 512, 270]


@pytest.mark.parametrize("family", FAMILIES)
def test_every_family_is_a_spanning_tree(family):
    n = 300
    edges = generate(WorkloadSpec(family, n, seed=4))
    assert len(edges) == n - 1
    ds = spanning_forest(n, edges, "ris", seed=1)
    assert len(ds) == n - 1
    assert all(1 <= e[2] <= 1000 for e in edges)
    assert generate(WorkloadSpec(family, n, seed=4)) == edges
    if family == "random_deg3":
        assert np.bincount(np.asarray(shapes(edges)).ravel()).max() <= 3


def test_zipf_diameter_shrinks_with_alpha():
    n = 10**5
    meds = []
    for a in (0.5, 1.0, 1.5, 2.0):
        ds = [tree_diameter(n, generate(WorkloadSpec("zipf", n, seed=s, alpha=a))) for s in range(5)]
        meds.append(statistics.median(ds))
    assert meds == sorted(meds, reverse=True)
    assert meds[0] > meds[-1]


def test_tree_diameter_basics():
    assert tree_diameter(1, []) == 0
    assert tree_diameter(6, [(i, i + 1) for i in range(5)]) == 5
    assert tree_diameter(5, [(0, i) for i in range(1, 5)]) == 2


def test_ris_with_fixed_order_on_a_triangle():
    edges = [(0, 1), (1, 2), (0, 2)]
    assert spanning_forest(3, edges, "ris", order=[0, 1, 2]) == [(0, 1), (1, 2)]
    assert spanning_forest(3, edges, "ris", order=[2, 1, 0]) == [(0, 2), (1, 2)]


@settings(max_examples=40, deadline=None)
@given(n=st.integers(1, 30), raw=st.lists(st.tuples(st.integers(0, 29), st.integers(0, 29)), max_size=80),
       mode=st.sampled_from(["bfs", "ris"]), seed=st.integers(0, 99))
def test_spanning_forest_spans_every_component(n, raw, mode, seed):
    edges = [(u % n, v % n) for u, v in raw]
    forest = spanning_forest(n, edges, mode, seed)
    from scipy.sparse import coo_array
    from scipy.sparse.csgraph import connected_components

    def comps(es):
        if not es:
            return n
        a = np.asarray(es)
        g = coo_array((np.ones(len(a)), (a[:, 0], a[:, 1])), shape=(n, n))
        return connected_components(g, directed=False)[0]

    c = comps(edges)
    assert len(forest) == n - c
    assert comps(forest) == c
    assert set(forest) <= set(edges)


def test_parse_edge_list_and_roundtrip(tmp_path):
    n, edges = parse_edge_list(["# header", "0 1", "", "1 3 7  # weighted"])
    assert n == 4 and edges == [(0, 1), (1, 3, 7)]
    p = tmp_path / "g.txt"
    write_edge_list(str(p), edges)
    assert read_edge_list(str(p)) == (4, edges)
    buf = io.StringIO()
    write_edge_list(buf, [(2, 3, 4)])
    assert buf.getvalue() == "2 3 4\n"


@pytest.mark.parametrize("lines, lineno", [(["0 1", "1 x"], 2), (["0 1 2 3"], 1), (["0 1", "#", "-1 2"], 3)])
def test_parse_error_names_the_line(lines, lineno):
    with pytest.raises(ParseError, match=f"line {lineno}:"):
        parse_edge_list(lines)


def test_parse_family():
    assert parse_family("kary(4)") == ("kary", {"arity": 4})
    assert parse_family("zipf(1.5)") == ("zipf", {"alpha": 1.5})
    assert parse_family("path") == ("path", {})
    for bad in ("tree", "kary(x)", "path(2)"):
        with pytest.raises(BadSpec):
            parse_family(bad)


@pytest.mark.parametrize("kw", [
    dict(family="moebius", n=5), dict(family="path", n=0), dict(family="path", n=5, impl="avl"),
    dict(family="path", n=5, k=4, impl="linkcut"), dict(family="path", n=5, k=0),
])
def test_bad_specs(kw):
    with pytest.raises(BadSpec):
        WorkloadSpec(**kw).check()


def test_topology_rejects_high_degree_family():
    with pytest.raises(BadSpec):
        bench_updates(WorkloadSpec("star", 10, impl="topology"))


@pytest.mark.parametrize("impl", IMPLS)
def test_bench_updates_rows(impl):
    rows = bench_updates(WorkloadSpec("random_deg3", 200, impl=impl, reps=2, validate=True))
    assert len(rows) == 4
    assert all(len(r) == len(CSV_HEADER) for r in rows)
    assert [r[6] for r in rows] == ["insert", "delete"] * 2
    assert all(r[7] >= 0 and r[8] > 0 for r in rows)
    if impl in ("ufo", "topology"):
        assert all(r[9] > 0 for r in rows)


def test_batched_bench_and_queries():
    rows = bench_updates(WorkloadSpec("binary", 500, k=50, threads=2, validate=True))
    assert rows[0][3] == 50 and rows[0][4] == 2
    q = bench_queries(WorkloadSpec("path", 100, queries=200, validate=True))
    assert [r[6] for r in q] == ["connected", "path"]


def test_validation_failure_is_raised(monkeypatch):
    from ufotree import UFOTree

    monkeypatch.setattr(UFOTree, "path_query", lambda self, u, v: -1)
    with pytest.raises(ValidationFailure):
        bench_queries(WorkloadSpec("path", 50, validate=True))


def test_sweep_memory_and_helpers():
    rows = diameter_sweep([0.5, 2.0], 300, [0, 1])
    assert len(rows) == 4 and all(r[4] > 0 for r in rows)
    meds = median_by(rows, lambda r: (r[1],), 4)
    assert meds[(0.5,)] >= meds[(2.0,)]
    m = memory_row(WorkloadSpec("star", 100))
    assert m[6] == "build" and m[8] > 0
    assert log_ratio_fit([(8, 8, 8.0), (3, 1, 4.0)]) == [1.0, 2.0]
