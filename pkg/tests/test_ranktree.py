import math
import operator

from hypothesis import given, settings, strategies as st

from ufotree.ranktree import RankTree


def test_empty_total_is_identity():
    r = RankTree(operator.add, 0)
    assert r.total() == 0 and len(r) == 0


def test_aggregates_and_fold_excluding():
    r = RankTree(max, -math.inf)
    leaves = [r.insert(i, v, 1) for i, v in enumerate([3, 9, 4, 1])]
    assert r.total() == 9
    assert r.fold_excluding(leaves[1]) == 4
    r.delete(leaves[1], 1)
    assert r.total() == 4
    assert sorted(x.item for x in r.leaves()) == [0, 2, 3]
    r.check()


def test_heavy_item_stays_shallow():
    r = RankTree(operator.add, 0)
    for i in range(64):
        r.insert(i, 1, 1)
    heavy = r.insert("h", 1, 1 << 20)
    assert r.depth(heavy) <= math.log2(r.weight / (1 << 20)) + 2


@settings(max_examples=60, deadline=None)
@given(st.lists(st.tuples(st.integers(1, 2000), st.integers(-50, 50), st.booleans()), max_size=80))
def test_depth_bound_and_sums_under_churn(ops):
    r = RankTree(operator.add, 0)
    live = {}
    for i, (w, val, drop) in enumerate(ops):
        if drop and live:
            key = min(live)
            leaf, lw, _ = live.pop(key)
            r.delete(leaf, lw)
        else:
            live[i] = (r.insert(i, val, w), w, val)
        r.check()
        assert r.total() == sum(v for _, _, v in live.values())
        assert r.weight == sum(w for _, w, _ in live.values())
        assert len(r) == len(live)
        for leaf, w, v in live.values():
            assert r.depth(leaf) <= math.log2(r.weight / w) + 2
            assert r.fold_excluding(leaf) == r.total() - v
    assert r.node_count() <= max(0, 4 * len(live) - 1)
