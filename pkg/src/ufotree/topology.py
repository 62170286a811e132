"""Topology trees over forests of maximum degree 3.

Each level is a maximal matching of allowed merges between adjacent
clusters: degree pairs {1,1}, {1,2}, {2,2} and {1,3}.  An update frees every
ancestor of both endpoints and reclusters the resulting roots bottom-up.
"""

from __future__ import annotations

from typing import Iterable

from ._core import Cluster, ContractionForest, UpdateStats
from .aggregates import SUM, AggregateSpec, Value
from .errors import DegreeError

LEGAL = frozenset({(1, 1), (1, 2), (2, 1), (2, 2), (1, 3), (3, 1)})


class TopologyTree(ContractionForest):
    kind = "topology"
    max_degree = 3

    def _validate_link(self, u: int, v: int) -> None:
        super()._validate_link(u, v)
        for x in (u, v):
            if len(self.leaves[x].nbrs) >= 3:
                raise DegreeError(f"vertex {x} already has degree 3")

    def _delete_all_ancestors(self, starts: Iterable[Cluster]) -> None:
        doomed: dict[Cluster, None] = {}
        for s in starts:
            c = s.parent
            while c is not None and c not in doomed:
                doomed[c] = None
                c = c.parent
        for c in sorted(doomed, key=lambda c: -c.level):
            self._free(c)

    def _do_link(self, u: int, v: int, euv: tuple, evu: tuple) -> None:
        lu, lv = self.leaves[u], self.leaves[v]
        self._delete_all_ancestors([lu, lv])
        self._note_root(lu)
        self._note_root(lv)
        self._link_at(lu, lv, euv, evu)

    def _do_cut(self, u: int, v: int) -> None:
        lu, lv = self.leaves[u], self.leaves[v]
        self._unlink_at(lu, lv)
        self._delete_all_ancestors([lu, lv])
        self._note_root(lu)
        self._note_root(lv)

    def _recluster(self) -> None:
        stats = self.stats
        lvl = 0
        while lvl < len(self._rootlist):
            lst = self._rootlist[lvl]
            live = [x for x in lst if x.alive and x.parent is None]
            UpdateStats._bump(stats.roots, lvl, len(live))
            UpdateStats._bump(stats.root_degree_sum, lvl, sum(len(x.nbrs) for x in live))
            for x in live:
                stats.max_root_degree = max(stats.max_root_degree, len(x.nbrs))
            for x in live:
                if x.parent is not None or not x.nbrs:
                    continue
                d = len(x.nbrs)
                for y in x.nbrs:
                    Q = y.parent
                    if (d, len(y.nbrs)) in LEGAL and (Q is None or len(Q.children) == 1):
                        if Q is None:
                            P = self._new_cluster(lvl + 1)
                            self._set_parent(x, P)
                            self._set_parent(y, P)
                        else:
                            self._delete_all_ancestors([Q])
                            self._set_parent(x, Q)
                            self._note_root(Q)
                        break
                else:
                    self._set_parent(x, self._new_cluster(lvl + 1))
            lvl += 1

    def _check_merge(self, P: Cluster) -> None:
        ch = P.children
        assert 1 <= len(ch) <= 2, f"topology cluster {P!r} has fanout {len(ch)}"
        for c in ch:
            assert len(c.nbrs) <= 3
        if len(ch) == 2:
            a, b = ch
            assert b in a.nbrs, f"pair children of {P!r} not adjacent"
            assert (len(a.nbrs), len(b.nbrs)) in LEGAL, f"illegal merge in {P!r}"

    def _check_maximal(self, x: Cluster) -> None:
        if not x.nbrs:
            assert x.parent is None
            return
        assert x.parent is not None
        if len(x.parent.children) == 1:
            for y in x.nbrs:
                if len(y.parent.children) == 1:
                    assert (len(x.nbrs), len(y.nbrs)) not in LEGAL, (
                        f"unmatched neighbours {x!r} and {y!r}"
                    )


def topo_build(
    edges: Iterable[tuple], n: int, spec: AggregateSpec = SUM, **options
) -> TopologyTree:
    edges = list(edges)
    deg = [0] * n
    for e in edges:
        deg[e[0]] += 1
        deg[e[1]] += 1
    bad = [v for v in range(n) if deg[v] > 3]
    if bad:
        raise DegreeError(f"vertex {bad[0]} has degree {deg[bad[0]]} > 3")
    return TopologyTree(n, spec, edges, **options)


def topo_link(t: TopologyTree, u: int, v: int, w: Value = None) -> None:
    t.link(u, v, w)


def topo_cut(t: TopologyTree, u: int, v: int) -> None:
    t.cut(u, v)


def topo_connected(t: TopologyTree, u: int, v: int) -> bool:
    return t.connected(u, v)


def topo_path_query(t: TopologyTree, u: int, v: int) -> Value:
    return t.path_query(u, v)


def topo_subtree_query(t: TopologyTree, v: int, p: int) -> Value:
    return t.subtree_query(v, p)


def topo_lca(t: TopologyTree, u: int, v: int, r: int) -> int:
    return t.lca(u, v, r)


def topo_diameter(t: TopologyTree, v: int):
    return t.diameter(v)


def topo_mark(t: TopologyTree, v: int, on: bool = True) -> None:
    t.mark(v, on)


def topo_nearest_marked(t: TopologyTree, v: int):
    return t.nearest_marked(v)


def topo_height(t: TopologyTree) -> int:
    return t.height()
