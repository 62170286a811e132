"""UFO trees: contraction with unbounded fan-out merges.

A level-(i+1) cluster is formed from one of:

* a single child;
* two adjacent children of degree at most 2;
* one high-degree child (degree >= 3) together with one or more of its
  degree-1 neighbours (a "star").  A star with a single degree-1 neighbour
  has fanout 2 and is handled by the pair formulas.

Updates never free a cluster of high degree or high fanout; instead the
changed low-degree children are detached and reclustered.
"""

from __future__ import annotations

from typing import Iterable, Optional

from ._core import Cluster, ContractionForest, UpdateStats
from .aggregates import SUM, AggregateSpec, Value


class UFOTree(ContractionForest):
    kind = "ufo"

    # -- DeleteAncestors --------------------------------------------------------

    def _valid_after(self, P: Cluster, removed: list[Cluster]) -> bool:
        """Whether P's remaining children still form a legal merge."""
        remaining = len(P.children) - len(removed)
        if remaining <= 0:
            return False
        if remaining == 1:
            return True
        gone = set(removed)
        if remaining == 2:
            a, b = [c for c in P.children if c not in gone]
            return b in a.nbrs
        for x in removed:
            sibs = 0
            for d in x.nbrs:
                if d.parent is P:
                    sibs += 1
            if sibs >= 2:
                return False
        return True

    @staticmethod
    def _is_high_residue(P: Cluster, removed: list[Cluster]) -> bool:
        """Whether what is left of P after removing children is high degree or fanout.

        Only edges already present at P's level count, so a batch insertion
        that has not been lifted yet does not make P high degree.
        """
        if len(P.children) - len(removed) >= 3:
            return True
        gone = set(removed)
        deg = 0
        for x in P.children:
            if x not in gone:
                for d in x.nbrs:
                    if d in gone:
                        deg += 1
                    elif d.parent is not P and d.parent is not None and P.nbrs.get(d.parent) is x.nbrs[d]:
                        deg += 1
        return deg >= 3

    def _delete_ancestors(self, starts: Iterable[Cluster]) -> None:
        """Conditional ancestor removal, run in lockstep from every start.

        Decisions are taken level by level on the unmodified hierarchy; the
        planned frees and detaches are then applied top-down, which keeps the
        cost of unlifting edges constant per level.
        """
        freed: set[Cluster] = set()
        removed: dict[Cluster, list[Cluster]] = {}
        plan: list[tuple[int, int, Cluster]] = []
        stats = self.stats
        front = [(s, s.parent) for s in dict.fromkeys(starts) if s.parent is not None]
        while front:
            groups: dict[Cluster, list[Cluster]] = {}
            for prev, curr in front:
                g = groups.setdefault(curr, [])
                if prev not in g:
                    g.append(prev)
            front = []
            for curr, prevs in groups.items():
                rem = removed.get(curr)
                fan = len(curr.children) - (len(rem) if rem else 0)
                deg = len(curr.nbrs)
                nxt = curr.parent
                if deg < 3 and fan < 3:
                    kill = True
                else:
                    if rem is None:
                        rem = removed[curr] = []
                    for prev in prevs:
                        if prev not in freed and len(prev.nbrs) <= 2:
                            rem.append(prev)
                            plan.append((curr.level, 1, prev))
                    kill = not self._valid_after(curr, rem)
                    if kill and self._is_high_residue(curr, rem):
                        stats.high_frees += 1
                if kill:
                    freed.add(curr)
                    plan.append((curr.level, 0, curr))
                    if nxt is not None:
                        removed.setdefault(nxt, []).append(curr)
                if nxt is not None:
                    front.append((curr, nxt))
        plan.sort(key=lambda t: (-t[0], t[1]))
        for _, op, c in plan:
            if op == 0:
                if c.alive:
                    self._free(c)
            elif c.alive and c.parent is not None:
                self._clear_parent(c)
                self._note_root(c)

    # -- sequential updates --------------------------------------------------------

    def _do_link(self, u: int, v: int, euv: tuple, evu: tuple) -> None:
        lu, lv = self.leaves[u], self.leaves[v]
        self._delete_ancestors([lu, lv])
        self._note_root(lu)
        self._note_root(lv)
        self._link_at(lu, lv, euv, evu)

    def _do_cut(self, u: int, v: int) -> None:
        lu, lv = self.leaves[u], self.leaves[v]
        self._unlink_at(lu, lv)
        self._delete_ancestors([lu, lv])
        self._note_root(lu)
        self._note_root(lv)

    @staticmethod
    def _merges(y: Cluster) -> bool:
        return y.parent is not None and len(y.parent.children) >= 2

    def _join(self, x: Cluster, Q: Cluster) -> None:
        self._set_parent(x, Q)
        if Q.parent is None:
            self._note_root(Q)

    def _recluster(self) -> None:
        stats = self.stats
        lvl = 0
        while lvl < len(self._rootlist):
            lst = self._rootlist[lvl]
            if not lst:
                lvl += 1
                continue
            start = len(lst)
            live = [x for x in lst if x.alive and x.parent is None]
            # high-degree roots absorb every degree-1 neighbour
            k = 0
            while k < len(lst):
                x = lst[k]
                k += 1
                if not x.alive or x.parent is not None or len(x.nbrs) < 3:
                    continue
                P = self._new_cluster(lvl + 1)
                self._set_parent(x, P)
                for y in list(x.nbrs):
                    if len(y.nbrs) == 1:
                        if y.parent is not None:
                            self._delete_ancestors([y])
                        if y.parent is None:
                            self._set_parent(y, P)
            live += lst[start:]
            UpdateStats._bump(stats.roots, lvl, len(live))
            UpdateStats._bump(stats.root_degree_sum, lvl, sum(len(x.nbrs) for x in live))
            for x in live:
                if len(x.nbrs) > stats.max_root_degree:
                    stats.max_root_degree = len(x.nbrs)
            for want in (2, 1):
                for x in lst:
                    if x.alive and x.parent is None and len(x.nbrs) == want:
                        if not self._match(x, lvl):
                            self._set_parent(x, self._new_cluster(lvl + 1))
            for x in lst:
                if x.alive and x.parent is None and x.nbrs:
                    self._set_parent(x, self._new_cluster(lvl + 1))
            lvl += 1

    def _match(self, x: Cluster, lvl: int) -> bool:
        if len(x.nbrs) == 2:
            for y in x.nbrs:
                if len(y.nbrs) <= 2 and not self._merges(y):
                    Q = y.parent
                    if Q is not None:
                        self._delete_ancestors([Q])
                        self._join(x, Q)
                    else:
                        P = self._new_cluster(lvl + 1)
                        self._set_parent(x, P)
                        self._set_parent(y, P)
                    return True
            return False
        y = next(iter(x.nbrs))
        Q = y.parent
        if Q is not None and (not self._merges(y) or len(y.nbrs) >= 3):
            self._delete_ancestors([Q])
            self._join(x, Q)
            return True
        P = self._new_cluster(lvl + 1)
        self._set_parent(x, P)
        if Q is None:
            self._set_parent(y, P)
        return True

    # -- validation -------------------------------------------------------------------

    def _check_merge(self, P: Cluster) -> None:
        ch = P.children
        if len(ch) == 1:
            return
        if len(ch) == 2:
            a, b = ch
            assert b in a.nbrs, f"pair children of {P!r} not adjacent"
            da, db = len(a.nbrs), len(b.nbrs)
            ok = (da <= 2 and db <= 2) or (min(da, db) == 1 and max(da, db) >= 3)
            assert ok, f"illegal pair degrees {da}, {db} in {P!r}"
            return
        centers = [c for c in ch if len(c.nbrs) >= 3]
        assert len(centers) == 1, f"star {P!r} has {len(centers)} centers"
        C = centers[0]
        for x in ch:
            if x is not C:
                assert len(x.nbrs) == 1 and C in x.nbrs, f"bad star leaf {x!r} in {P!r}"

    def _check_maximal(self, x: Cluster) -> None:
        deg = len(x.nbrs)
        if deg == 0:
            assert x.parent is None, f"isolated {x!r} has a parent"
            return
        assert x.parent is not None
        if deg >= 3:
            for y in x.nbrs:
                if len(y.nbrs) == 1:
                    assert y.parent is x.parent, f"degree-1 {y!r} not absorbed by {x!r}"
        elif len(x.parent.children) == 1:
            for y in x.nbrs:
                if len(y.nbrs) <= 2 and len(y.parent.children) == 1:
                    raise AssertionError(f"unmatched neighbours {x!r} and {y!r}")


def ufo_build(
    edges: Iterable[tuple], n: int, spec: AggregateSpec = SUM, **options
) -> UFOTree:
    return UFOTree(n, spec, edges, **options)


def ufo_link(t: UFOTree, u: int, v: int, w: Value = None) -> None:
    t.link(u, v, w)


def ufo_cut(t: UFOTree, u: int, v: int) -> None:
    t.cut(u, v)


def ufo_connected(t: UFOTree, u: int, v: int) -> bool:
    return t.connected(u, v)


def ufo_path_query(t: UFOTree, u: int, v: int) -> Value:
    return t.path_query(u, v)


def ufo_subtree_query_invertible(t: UFOTree, v: int, p: int) -> Value:
    if not t.spec.invertible:
        raise ValueError("aggregate has no inverse; use ufo_subtree_query_noninv")
    return t.subtree_query(v, p)


def ufo_subtree_query_noninv(t: UFOTree, v: int, p: int) -> Value:
    if not t.rank_trees:
        raise ValueError("tree was not built in rank-tree mode")
    return t.subtree_query(v, p)


def ufo_lca(t: UFOTree, u: int, v: int, r: int) -> int:
    return t.lca(u, v, r)


def ufo_diameter(t: UFOTree, v: int):
    return t.diameter(v)


def ufo_mark(t: UFOTree, v: int, on: bool = True) -> None:
    t.mark(v, on)


def ufo_nearest_marked(t: UFOTree, v: int):
    return t.nearest_marked(v)


def ufo_height(t: UFOTree) -> int:
    return t.height()


def delete_ancestors(t: UFOTree, c: Cluster, i: Optional[int] = None) -> None:
    """Run the conditional ancestor walk from ``c`` as a standalone update step."""
    if i is not None and c.level != i:
        raise ValueError(f"cluster is at level {c.level}, not {i}")
    t._begin()
    t._delete_ancestors([c])
    if c.parent is None and c.nbrs:
        t._note_root(c)
    t._recluster()
    t._finish()
