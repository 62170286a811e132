"""Machinery shared by topology trees and UFO trees.

Both structures are contraction hierarchies over the same cluster record.
Level-0 clusters are the input vertices.  A level-i edge between clusters
``A`` and ``B`` exists at level i+1 between ``A.parent`` and ``B.parent``
exactly when both parents exist and differ; :meth:`ContractionForest._link_at`
and :meth:`ContractionForest._unlink_at` keep this lifting rule intact while
edges come and go, so adjacency never needs to be rebuilt wholesale.

Every cluster stores an oriented edge record ``(a, b, value, length)`` per
neighbour, with ``a`` inside the cluster.  The two orientations of an input
edge are created once and shared by every level the edge reaches.
"""

from __future__ import annotations

import math
import sys
from dataclasses import dataclass, field
from typing import Iterable, Optional

from .aggregates import SUM, AggregateSpec, Value, lift_value
from .errors import CycleError, DuplicateEdge, MissingEdge, NotConnected
from .forest import edge_length
from .ranktree import RankTree

INF = math.inf
NEG = -math.inf


class Cluster:
    __slots__ = (
        "level", "parent", "nbrs", "children", "cidx", "vertex", "uid", "alive",
        "bnd", "fold", "rnode", "dirty", "stamp", "sb0", "sb1", "pagg", "__weakref__",
    )

    def __init__(self, level: int, uid: int, vertex: int = -1) -> None:
        self.level = level
        self.parent: Optional[Cluster] = None
        self.nbrs: dict[Cluster, tuple] = {}
        self.children: list[Cluster] = []
        self.cidx = -1
        self.vertex = vertex
        self.uid = uid
        self.alive = True
        self.bnd: list = []
        self.fold: Optional[Fold] = None
        self.rnode = None
        self.dirty = False
        self.stamp = -1
        self.sb0 = -1
        self.sb1 = -1
        self.pagg = None

    def __repr__(self) -> str:
        kind = f"v{self.vertex}" if self.vertex >= 0 else f"#{self.uid}"
        return f"<Cluster {kind} L{self.level} deg={len(self.nbrs)} fan={len(self.children)}>"


class AugCluster(Cluster):
    """Cluster carrying subtree and distance augmentations."""

    __slots__ = ("n", "vagg", "plen", "diam", "e0", "e1", "m0", "m1")

    def __init__(self, level: int, uid: int, vertex: int = -1) -> None:
        super().__init__(level, uid, vertex)
        self.n = 0
        self.vagg = None
        self.plen = 0
        self.diam = 0
        self.e0 = self.e1 = 0
        self.m0 = self.m1 = INF


class Fold:
    """Aggregate over the non-center children of a high-fanout cluster."""

    __slots__ = ("center", "pending", "arms", "total", "stale", "rt")

    def __init__(self, center: Cluster) -> None:
        self.center = center
        self.pending: list[Cluster] = []
        self.arms: Optional[dict[Cluster, tuple]] = None
        self.total = None
        self.stale = False
        self.rt: Optional[RankTree] = None


@dataclass
class UpdateStats:
    """Per-update instrumentation, indexed by level."""

    roots: list[int] = field(default_factory=list)
    deletions: list[int] = field(default_factory=list)
    touched: list[int] = field(default_factory=list)
    created: int = 0
    max_root_degree: int = 0
    root_degree_sum: list[int] = field(default_factory=list)
    dsets: list[int] = field(default_factory=list)
    high_frees: int = 0

    @staticmethod
    def _bump(arr: list[int], level: int, by: int = 1) -> None:
        while len(arr) <= level:
            arr.append(0)
        arr[level] += by

    @property
    def total_touched(self) -> int:
        return sum(self.touched)


# -- small helpers over a cluster's boundary ---------------------------------


def _bnd_add(c: Cluster, v: int) -> None:
    b = c.bnd
    for i in range(0, len(b), 2):
        if b[i] == v:
            b[i + 1] += 1
            return
    b.append(v)
    b.append(1)


def _bnd_remove(c: Cluster, v: int) -> None:
    b = c.bnd
    for i in range(0, len(b), 2):
        if b[i] == v:
            if b[i + 1] == 1:
                del b[i:i + 2]
            else:
                b[i + 1] -= 1
            return
    raise AssertionError(f"boundary vertex {v} missing from {c!r}")


def _ecc(x: AugCluster, a: int):
    return x.e0 if a == x.sb0 else x.e1


def _near(x: AugCluster, a: int):
    return x.m0 if a == x.sb0 else x.m1


def _plen(x: AugCluster, a: int, b: int):
    return 0 if a == b else x.plen


class ContractionForest:
    """Base class: a contraction hierarchy over a vertex-static forest."""

    #: name used in CSV output
    kind = "base"
    max_degree: Optional[int] = None

    def __init__(
        self,
        n: int,
        spec: AggregateSpec = SUM,
        edges: Iterable[tuple] = (),
        *,
        subtree: bool = True,
        metrics: bool = True,
        rank_trees: Optional[bool] = None,
    ) -> None:
        if n < 0:
            raise ValueError("n must be non-negative")
        self.n = n
        self.spec = spec
        self.subtree = subtree
        self.metrics = metrics
        if rank_trees is None:
            # folds that cannot subtract an arm would rescan on every removal
            rank_trees = metrics or (subtree and not spec.invertible)
        self.rank_trees = rank_trees
        self.use_fold = subtree or metrics or rank_trees
        self._aug = subtree or metrics or rank_trees
        self._Cluster = AugCluster if self._aug else Cluster
        self._uid = 0
        self.values: list[Value] = [spec.vertex_value(v) for v in range(n)]
        self.marked = bytearray(n)
        self.edges: dict[tuple[int, int], tuple[tuple, tuple]] = {}
        self.leaves: list[Cluster] = []
        for v in range(n):
            self.leaves.append(self._make(0, v))
        self._rootlist: list[list[Cluster]] = []
        self._rootset: set[Cluster] = set()
        self._dirty: list[list[Cluster]] = []
        self._epoch = 0
        self.stats = UpdateStats()
        self._collect_stats = True
        for c in self.leaves:
            self._mark_dirty(c)
        edges = list(edges)
        if edges:
            self.build(edges)
        else:
            self._refresh()

    # -- allocation and bookkeeping ------------------------------------------

    def _make(self, level: int, vertex: int = -1) -> Cluster:
        self._uid += 1
        return self._Cluster(level, self._uid, vertex)

    def _new_cluster(self, level: int) -> Cluster:
        c = self._make(level)
        c.stamp = self._epoch
        self.stats.created += 1
        UpdateStats._bump(self.stats.touched, level)
        self._note_root(c)
        self._mark_dirty(c)
        return c

    def _touch(self, c: Cluster) -> None:
        if c.stamp != self._epoch:
            c.stamp = self._epoch
            UpdateStats._bump(self.stats.touched, c.level)

    def _mark_dirty(self, c: Cluster) -> None:
        if not c.dirty:
            c.dirty = True
            d = self._dirty
            while len(d) <= c.level:
                d.append([])
            d[c.level].append(c)

    def _changed(self, c: Cluster) -> None:
        self._mark_dirty(c)
        if c.stamp != self._epoch:
            c.stamp = self._epoch
            UpdateStats._bump(self.stats.touched, c.level)

    def _note_root(self, c: Cluster) -> None:
        if c not in self._rootset:
            self._rootset.add(c)
            r = self._rootlist
            while len(r) <= c.level:
                r.append([])
            r[c.level].append(c)

    def _begin(self) -> None:
        self._epoch += 1
        self.stats = UpdateStats()

    def _finish(self) -> None:
        self._rootlist = []
        self._rootset = set()
        self._refresh()

    # -- edge lifting primitives ---------------------------------------------

    def _link_at(self, A: Cluster, B: Cluster, eAB: tuple, eBA: tuple) -> None:
        """Add edge A-B at A's level and lift it as far as the parents allow."""
        while True:
            A.nbrs[B] = eAB
            B.nbrs[A] = eBA
            _bnd_add(A, eAB[0])
            _bnd_add(B, eBA[0])
            self._changed(A)
            self._changed(B)
            PA = A.parent
            PB = B.parent
            if PA is None or PB is None or PA is PB:
                if PA is None:
                    self._note_root(A)
                if PB is None:
                    self._note_root(B)
                return
            if PB in PA.nbrs:
                return
            A, B = PA, PB

    def _link_once(self, A: Cluster, B: Cluster, eAB: tuple, eBA: tuple) -> None:
        A.nbrs[B] = eAB
        B.nbrs[A] = eBA
        _bnd_add(A, eAB[0])
        _bnd_add(B, eBA[0])
        self._changed(A)
        self._changed(B)

    def _unlink_at(self, A: Cluster, B: Cluster) -> None:
        """Remove edge A-B at A's level and at every level it was lifted to."""
        while True:
            eAB = A.nbrs.pop(B, None)
            if eAB is None:
                return
            eBA = B.nbrs.pop(A)
            _bnd_remove(A, eAB[0])
            _bnd_remove(B, eBA[0])
            self._changed(A)
            self._changed(B)
            PA = A.parent
            PB = B.parent
            if PA is None or PB is None or PA is PB:
                return
            A, B = PA, PB

    def _set_parent(self, x: Cluster, P: Cluster) -> None:
        x.parent = P
        x.cidx = len(P.children)
        P.children.append(x)
        if P.fold is not None:
            P.fold.pending.append(x)
        self._changed(P)
        for d, e in x.nbrs.items():
            dp = d.parent
            if dp is not None and dp is not P and dp not in P.nbrs:
                self._link_at(P, dp, e, d.nbrs[x])

    def _clear_parent(self, x: Cluster) -> None:
        P = x.parent
        for d in x.nbrs:
            dp = d.parent
            if dp is not None and dp is not P:
                self._unlink_at(P, dp)
        i = x.cidx
        last = P.children.pop()
        if last is not x:
            P.children[i] = last
            last.cidx = i
        x.parent = None
        x.cidx = -1
        if P.fold is not None:
            self._fold_remove(P, x)
        self._changed(P)

    def _free(self, Z: Cluster) -> None:
        if Z.parent is not None:
            self._clear_parent(Z)
        for c in list(Z.children):
            self._clear_parent(c)
            self._note_root(c)
        assert not Z.nbrs, f"freed {Z!r} still has edges"
        Z.alive = False
        Z.fold = None
        self._touch(Z)
        UpdateStats._bump(self.stats.deletions, Z.level)

    # -- folds over high-fanout child sets -----------------------------------

    def _arm(self, x: AugCluster, center: Cluster) -> tuple:
        a, _, _, ln = x.nbrs[center]
        if self.metrics:
            return (x.vagg, x.n, ln + _ecc(x, a), NEG, x.diam, ln + _near(x, a))
        return (x.vagg, x.n, NEG, NEG, 0, INF)

    def _arm_identity(self) -> tuple:
        return (self.spec.identity, 0, NEG, NEG, 0, INF)

    def _arm_combine(self, p: tuple, q: tuple) -> tuple:
        pt1 = p[2]
        qt1 = q[2]
        if pt1 >= qt1:
            t1 = pt1
            t2 = p[3] if p[3] >= qt1 else qt1
        else:
            t1 = qt1
            t2 = q[3] if q[3] >= pt1 else pt1
        vagg = self.spec.combine(p[0], q[0]) if self.subtree else None
        return (
            vagg,
            p[1] + q[1],
            t1,
            t2,
            p[4] if p[4] >= q[4] else q[4],
            p[5] if p[5] <= q[5] else q[5],
        )

    def _fold_subtractable(self) -> bool:
        return not self.metrics and (not self.subtree or self.spec.invertible)

    def _fold_subtract(self, total: tuple, arm: tuple) -> tuple:
        vagg = self.spec.inverse(total[0], arm[0]) if self.subtree else None
        return (vagg, total[1] - arm[1], NEG, NEG, 0, INF)

    def _fold_build(self, P: Cluster) -> None:
        center = max(P.children, key=lambda c: len(c.nbrs))
        f = Fold(center)
        if self.rank_trees:
            f.rt = RankTree(self._arm_combine, self._arm_identity())
        else:
            f.arms = {}
            f.total = self._arm_identity()
        f.pending = [c for c in P.children if c is not center]
        P.fold = f

    def _fold_drop(self, P: Cluster) -> None:
        for c in P.children:
            c.rnode = None
        P.fold = None

    def _fold_remove(self, P: Cluster, x: Cluster) -> None:
        f = P.fold
        if x is f.center:
            self._fold_drop(P)
            x.rnode = None
            return
        if f.rt is not None:
            if x.rnode is not None:
                f.rt.delete(x.rnode, x.rnode.agg[1])
                x.rnode = None
                return
        elif x in f.arms:
            arm = f.arms.pop(x)
            if self._fold_subtractable():
                f.total = self._fold_subtract(f.total, arm)
            else:
                f.stale = True
            return
        f.pending.remove(x)

    def _fold_refresh(self, P: Cluster, x: Cluster) -> None:
        f = P.fold
        if x is f.center:
            return
        if (f.rt is not None and x.rnode is not None) or (f.arms is not None and x in f.arms):
            self._fold_remove(P, x)
            f.pending.append(x)

    def _fold_settle(self, P: Cluster) -> tuple:
        f = P.fold
        center = f.center
        if f.rt is not None:
            for x in f.pending:
                x.rnode = f.rt.insert(x, self._arm(x, center), x.n)
            f.pending.clear()
            return f.rt.total()
        comb = self._arm_combine
        if f.stale:
            total = self._arm_identity()
            for x in f.arms:
                arm = self._arm(x, center)
                f.arms[x] = arm
                total = comb(total, arm)
            f.total = total
            f.stale = False
        for x in f.pending:
            arm = self._arm(x, center)
            f.arms[x] = arm
            f.total = comb(f.total, arm)
        f.pending.clear()
        return f.total

    def _fold_excluding(self, P: Cluster, x: Cluster) -> tuple:
        f = P.fold
        if f.rt is not None:
            return f.rt.fold_excluding(x.rnode)
        if self._fold_subtractable():
            return self._fold_subtract(f.total, f.arms[x])
        acc = self._arm_identity()
        for y, arm in f.arms.items():
            if y is not x:
                acc = self._arm_combine(acc, arm)
        return acc

    def _fold_total(self, P: Cluster) -> tuple:
        f = P.fold
        return f.rt.total() if f.rt is not None else f.total

    # -- summaries -----------------------------------------------------------

    def _refresh(self) -> None:
        """Recompute summaries of dirty clusters bottom-up."""
        d = self._dirty
        lvl = 0
        while lvl < len(d):
            bucket = d[lvl]
            for c in bucket:
                c.dirty = False
                if not c.alive:
                    continue
                self._recompute(c)
                P = c.parent
                if P is not None:
                    if P.fold is not None:
                        self._fold_refresh(P, c)
                    self._mark_dirty(P)
            bucket.clear()
            lvl += 1

    def _center_of(self, P: Cluster) -> Cluster:
        if P.fold is not None:
            return P.fold.center
        return max(P.children, key=lambda c: len(c.nbrs))

    def _recompute(self, c: Cluster) -> None:
        b = c.bnd
        nb = len(b)
        c.sb0 = b[0] if nb else -1
        c.sb1 = b[2] if nb > 2 else -1
        ch = c.children
        f = len(ch)
        if self.use_fold:
            if f >= 3:
                if c.fold is None:
                    self._fold_build(c)
            elif c.fold is not None:
                self._fold_drop(c)
        if c.vertex >= 0:
            self._summ_leaf(c)
        elif f == 1:
            self._summ_single(c, ch[0])
        elif f == 2:
            self._summ_pair(c, ch[0], ch[1])
        else:
            if self.use_fold:
                self._summ_star(c, c.fold.center, self._fold_settle(c))
            else:
                self._summ_star(c, None, None)

    def _summ_leaf(self, c) -> None:
        c.pagg = self.spec.identity
        if not self._aug:
            return
        c.n = 1
        if self.subtree:
            c.vagg = self.values[c.vertex]
        if self.metrics:
            c.plen = 0
            c.diam = 0
            c.e0 = c.e1 = 0
            c.m0 = c.m1 = 0 if self.marked[c.vertex] else INF

    def _summ_single(self, c, x) -> None:
        s0, s1 = c.sb0, c.sb1
        c.pagg = self.spec.identity if s1 < 0 else x.pagg
        if not self._aug:
            return
        c.n = x.n
        if self.subtree:
            c.vagg = x.vagg
        if self.metrics:
            c.plen = 0 if s1 < 0 else x.plen
            c.diam = x.diam
            if s0 >= 0:
                c.e0 = _ecc(x, s0)
                c.m0 = _near(x, s0)
            if s1 >= 0:
                c.e1 = _ecc(x, s1)
                c.m1 = _near(x, s1)

    def _side_path(self, X, beta: int, a: int):
        """Aggregate of the path from boundary ``beta`` to boundary ``a`` inside X."""
        return self.spec.identity if beta == a else X.pagg

    def _summ_pair(self, c, A, B) -> None:
        a, bb, val, ln = A.nbrs[B]
        comb = self.spec.combine
        s0, s1 = c.sb0, c.sb1
        inA0 = s0 == A.sb0 or s0 == A.sb1
        if s1 < 0:
            c.pagg = self.spec.identity
        else:
            inA1 = s1 == A.sb0 or s1 == A.sb1
            if inA0 == inA1:
                X = A if inA0 else B
                c.pagg = X.pagg
            elif inA0:
                c.pagg = comb(comb(self._side_path(A, s0, a), val), self._side_path(B, bb, s1))
            else:
                c.pagg = comb(comb(self._side_path(A, s1, a), val), self._side_path(B, bb, s0))
        if not self._aug:
            return
        c.n = A.n + B.n
        if self.subtree:
            c.vagg = comb(A.vagg, B.vagg)
        if not self.metrics:
            return
        ea = _ecc(A, a)
        eb = _ecc(B, bb)
        c.diam = max(A.diam, B.diam, ea + ln + eb)
        na = _near(A, a)
        nbb = _near(B, bb)
        if s0 >= 0:
            if inA0:
                d = _plen(A, s0, a)
                c.e0 = max(_ecc(A, s0), d + ln + eb)
                c.m0 = min(_near(A, s0), d + ln + nbb)
            else:
                d = _plen(B, s0, bb)
                c.e0 = max(_ecc(B, s0), d + ln + ea)
                c.m0 = min(_near(B, s0), d + ln + na)
        if s1 >= 0:
            inA1 = s1 == A.sb0 or s1 == A.sb1
            if inA1:
                d1 = _plen(A, s1, a)
                c.e1 = max(_ecc(A, s1), d1 + ln + eb)
                c.m1 = min(_near(A, s1), d1 + ln + nbb)
            else:
                d1 = _plen(B, s1, bb)
                c.e1 = max(_ecc(B, s1), d1 + ln + ea)
                c.m1 = min(_near(B, s1), d1 + ln + na)
            if inA0 == inA1:
                X = A if inA0 else B
                c.plen = X.plen
            elif inA0:
                c.plen = _plen(A, s0, a) + ln + _plen(B, bb, s1)
            else:
                c.plen = _plen(A, s1, a) + ln + _plen(B, bb, s0)
        else:
            c.plen = 0

    def _summ_star(self, c, C, F) -> None:
        c.pagg = self.spec.identity
        if not self._aug:
            return
        c.n = C.n + F[1]
        if self.subtree:
            c.vagg = self.spec.combine(C.vagg, F[0])
        if self.metrics:
            cc = C.sb0
            ec = _ecc(C, cc)
            t1, t2 = F[2], F[3]
            c.plen = 0
            c.diam = max(C.diam, F[4], ec + t1, t1 + t2)
            c.e0 = c.e1 = max(ec, t1)
            c.m0 = c.m1 = min(_near(C, cc), F[5])

    # -- public updates --------------------------------------------------------

    def _check_vertex(self, v: int) -> None:
        if not 0 <= v < self.n:
            raise IndexError(f"vertex {v} out of range [0, {self.n})")

    def _make_edge(self, u: int, v: int, w: Value, length) -> tuple[tuple, tuple]:
        if w is None:
            w = lift_value(self.spec, 1)
        if length is None:
            length = edge_length(self.spec, w)
        return (u, v, w, length), (v, u, w, length)

    @staticmethod
    def _key(u: int, v: int) -> tuple[int, int]:
        return (u, v) if u < v else (v, u)

    def _validate_link(self, u: int, v: int) -> None:
        self._check_vertex(u)
        self._check_vertex(v)
        if u == v:
            raise CycleError(f"self-loop at {u}")
        if self._key(u, v) in self.edges:
            raise DuplicateEdge(f"edge ({u}, {v}) already present")
        if self.top(u) is self.top(v):
            raise CycleError(f"{u} and {v} are already connected")

    def link(self, u: int, v: int, w: Value = None, *, length=None) -> None:
        self._validate_link(u, v)
        euv, evu = self._make_edge(u, v, w, length)
        self._begin()
        self._do_link(u, v, euv, evu)
        self.edges[self._key(u, v)] = (euv, evu) if u < v else (evu, euv)
        self._recluster()
        self._finish()

    def cut(self, u: int, v: int) -> None:
        self._check_vertex(u)
        self._check_vertex(v)
        if self._key(u, v) not in self.edges:
            raise MissingEdge(f"edge ({u}, {v}) not present")
        self._begin()
        del self.edges[self._key(u, v)]
        self._do_cut(u, v)
        self._recluster()
        self._finish()

    def build(self, edges: Iterable[tuple]) -> None:
        """Insert many edges at once (a batch insert)."""
        from .batch import batch_update

        batch_update(self, [(e[0], e[1], False, *e[2:]) for e in edges])

    def batch_update(self, updates, threads: int = 1):
        from .batch import batch_update

        return batch_update(self, updates, threads=threads)

    def mark(self, v: int, on: bool = True) -> None:
        self._check_vertex(v)
        self.marked[v] = 1 if on else 0
        self._mark_dirty(self.leaves[v])
        self._refresh()

    def set_value(self, v: int, value: Value) -> None:
        self._check_vertex(v)
        self.values[v] = value
        self._mark_dirty(self.leaves[v])
        self._refresh()

    def _do_link(self, u, v, euv, evu) -> None:  # pragma: no cover - abstract
        raise NotImplementedError

    def _do_cut(self, u, v) -> None:  # pragma: no cover - abstract
        raise NotImplementedError

    def _recluster(self) -> None:  # pragma: no cover - abstract
        raise NotImplementedError

    # -- queries ---------------------------------------------------------------

    def top(self, v: int) -> Cluster:
        c = self.leaves[v]
        while c.parent is not None:
            c = c.parent
        return c

    def connected(self, u: int, v: int) -> bool:
        self._check_vertex(u)
        self._check_vertex(v)
        return self.top(u) is self.top(v)

    def has_edge(self, u: int, v: int) -> bool:
        return self._key(u, v) in self.edges

    def degree(self, v: int) -> int:
        return len(self.leaves[v].nbrs)

    def _lift_paths(self, X: Cluster, m: dict) -> dict:
        P = X.parent
        out = {}
        comb = self.spec.combine
        for beta in (P.sb0, P.sb1):
            if beta < 0:
                continue
            if beta in m:
                out[beta] = m[beta]
            elif len(P.children) == 2:
                Y = P.children[0] if P.children[1] is X else P.children[1]
                x, y, val, _ = X.nbrs[Y]
                out[beta] = comb(comb(m[x], val), self._side_path(Y, y, beta))
            else:
                # X is a degree-1 child of a star; beta is the center's boundary
                x, _, val, _ = next(iter(X.nbrs.values()))
                out[beta] = comb(m[x], val)
        return out

    def path_query(self, u: int, v: int) -> Value:
        self._check_vertex(u)
        self._check_vertex(v)
        if u == v:
            return self.spec.identity
        X, Y = self.leaves[u], self.leaves[v]
        mu = {u: self.spec.identity}
        mv = {v: self.spec.identity}
        comb = self.spec.combine
        while True:
            PX, PY = X.parent, Y.parent
            if PX is None or PY is None:
                raise NotConnected(f"{u} and {v} are not connected")
            if PX is PY:
                break
            mu = self._lift_paths(X, mu)
            mv = self._lift_paths(Y, mv)
            X, Y = PX, PY
        e = X.nbrs.get(Y)
        if e is not None:
            return comb(comb(mu[e[0]], e[2]), mv[e[1]])
        # two degree-1 children of one star meet at the center
        x, _, v1, _ = next(iter(X.nbrs.values()))
        y, _, v2, _ = next(iter(Y.nbrs.values()))
        return comb(comb(comb(mu[x], v1), v2), mv[y])

    def _require(self, flag: bool, what: str) -> None:
        if not flag:
            raise RuntimeError(f"{what} augmentation disabled for this instance")

    def diameter(self, v: int):
        self._require(self.metrics, "metric")
        self._check_vertex(v)
        return self.top(v).diam

    def nearest_marked(self, v: int):
        self._require(self.metrics, "metric")
        self._check_vertex(v)
        X = self.leaves[v]
        best = 0 if self.marked[v] else INF
        dm = {v: 0}
        while X.parent is not None:
            P = X.parent
            ch = P.children
            out = {}
            if len(ch) == 2:
                Y = ch[0] if ch[1] is X else ch[1]
                x, y, _, ln = X.nbrs[Y]
                base = dm[x] + ln
                best = min(best, base + _near(Y, y))
                for beta in (P.sb0, P.sb1):
                    if beta >= 0:
                        out[beta] = dm[beta] if beta in dm else base + _plen(Y, y, beta)
            elif len(ch) == 1:
                out = dm
            else:
                C = P.fold.center
                if X is C:
                    cc = C.sb0
                    best = min(best, dm[cc] + self._fold_total(P)[5])
                    out = {cc: dm[cc]} if P.sb0 >= 0 else {}
                else:
                    x, cc, _, ln = X.nbrs[C]
                    base = dm[x] + ln
                    rest = self._fold_excluding(P, X)[5]
                    best = min(best, base + _near(C, cc), base + rest)
                    if P.sb0 >= 0:
                        out = {cc: base}
            dm = out
            X = P
        return best

    def subtree_query(self, v: int, p: int) -> Value:
        self._require(self.subtree, "subtree")
        self._check_vertex(v)
        self._check_vertex(p)
        if self._key(v, p) not in self.edges:
            raise MissingEdge(f"edge ({v}, {p}) not present")
        comb = self.spec.combine
        X, Z = self.leaves[v], self.leaves[p]
        while X.parent is not Z.parent:
            X, Z = X.parent, Z.parent
        P = X.parent
        ch = P.children
        side: dict[int, bool] = {}
        if len(ch) == 2:
            R = X.vagg
            for beta in (P.sb0, P.sb1):
                if beta >= 0:
                    side[beta] = beta == X.sb0 or beta == X.sb1
        elif X is P.fold.center:
            R = comb(X.vagg, self._fold_excluding(P, Z)[0])
            if P.sb0 >= 0:
                side[P.sb0] = True
        else:
            R = X.vagg
            if P.sb0 >= 0:
                side[P.sb0] = False
        X = P
        while X.parent is not None:
            P = X.parent
            ch = P.children
            out = {}
            if len(ch) == 1:
                out = side
            elif len(ch) == 2:
                Y = ch[0] if ch[1] is X else ch[1]
                x = X.nbrs[Y][0]
                if side[x]:
                    R = comb(R, Y.vagg)
                for beta in (P.sb0, P.sb1):
                    if beta >= 0:
                        out[beta] = side[beta] if beta in side else side[x]
            else:
                C = P.fold.center
                if X is C:
                    cc = C.sb0
                    if side[cc]:
                        R = comb(R, self._fold_total(P)[0])
                    if P.sb0 >= 0:
                        out[cc] = side[cc]
                else:
                    x, cc, _, _ = X.nbrs[C]
                    if side[x]:
                        R = comb(comb(R, C.vagg), self._fold_excluding(P, X)[0])
                    if P.sb0 >= 0:
                        out[cc] = side[x]
            side = out
            X = P
        return R

    def _chain(self, v: int) -> list[Cluster]:
        out = [self.leaves[v]]
        while out[-1].parent is not None:
            out.append(out[-1].parent)
        return out

    def lca(self, u: int, v: int, r: int) -> int:
        for x in (u, v, r):
            self._check_vertex(x)
        X = self.top(u)
        if self.top(v) is not X or self.top(r) is not X:
            raise NotConnected(f"{u}, {v} and {r} are not all connected")
        chains: dict[int, list[Cluster]] = {}

        def child_of(t: int, level: int) -> Cluster:
            ch = chains.get(t)
            if ch is None:
                ch = chains[t] = self._chain(t)
            return ch[level]

        terms = [u, v, r]
        while True:
            a, b, c = terms
            if a == b or a == c:
                return a
            if b == c:
                return b
            lvl = X.level - 1
            ca, cb, cc = child_of(a, lvl), child_of(b, lvl), child_of(c, lvl)
            if ca is cb and cb is cc:
                X = ca
                continue
            if ca is cb or ca is cc or cb is cc:
                Y = ca if (ca is cb or ca is cc) else cb
                odd = 2 if ca is cb else (1 if ca is cc else 0)
                Z = (ca, cb, cc)[odd]
                e = Y.nbrs.get(Z)
                if e is None:
                    e = next(iter(Y.nbrs.values()))
                terms[odd] = e[0]
                X = Y
                continue
            # three distinct children of a star: the median is the center vertex
            return self._center_of(X).sb0

    # -- introspection ----------------------------------------------------------

    def levels(self) -> list[list[Cluster]]:
        """All live clusters grouped by level."""
        out = [list(self.leaves)]
        while True:
            seen = {}
            for c in out[-1]:
                p = c.parent
                if p is not None:
                    seen[p] = None
            if not seen:
                return out
            out.append(list(seen))

    def level_counts(self) -> list[int]:
        return [len(lv) for lv in self.levels()]

    def cluster_count(self) -> int:
        return sum(self.level_counts())

    def height(self) -> int:
        return len(self.levels()) - 1

    def component_height(self, v: int) -> int:
        return self.top(v).level

    def memory_bytes(self) -> int:
        """Live bytes owned by the structure (clusters, adjacency, child sets, folds)."""
        size = sys.getsizeof
        total = size(self.leaves) + size(self.edges)
        for e1, e2 in self.edges.values():
            total += size(e1) + size(e2)
        for level in self.levels():
            for c in level:
                total += size(c) + size(c.nbrs) + size(c.children) + size(c.bnd)
                f = c.fold
                if f is not None:
                    total += size(f) + size(f.pending)
                    if f.arms is not None:
                        total += size(f.arms) + sum(size(a) for a in f.arms.values())
                    if f.rt is not None:
                        total += size(f.rt) + size(f.rt.roots)
                        total += f.rt.node_count() * (size(f.rt.top) + 64)
        return total

    # -- validation ---------------------------------------------------------------

    def check(self) -> None:
        """Full structural validation; raises AssertionError on any violation."""
        levels = self.levels()
        for c in self.leaves:
            assert c.level == 0 and c.alive
        want_leaf: dict[Cluster, dict] = {c: {} for c in self.leaves}
        for (a, b), (eab, eba) in self.edges.items():
            want_leaf[self.leaves[a]][self.leaves[b]] = eab
            want_leaf[self.leaves[b]][self.leaves[a]] = eba
        for c in self.leaves:
            assert c.nbrs == want_leaf[c], f"leaf adjacency mismatch at {c!r}"
            assert not c.children
        for lvl, clusters in enumerate(levels):
            for c in clusters:
                assert c.alive, f"dead cluster reachable: {c!r}"
                assert c.level == lvl
                assert not c.dirty
                for i, x in enumerate(c.children):
                    assert x.parent is c and x.cidx == i
                if lvl > 0:
                    assert c.children, f"childless internal cluster {c!r}"
                for d, e in c.nbrs.items():
                    assert d.alive and d.level == c.level
                    assert d.nbrs[c] == (e[1], e[0], e[2], e[3])
                bset: dict[int, int] = {}
                for e in c.nbrs.values():
                    bset[e[0]] = bset.get(e[0], 0) + 1
                have = {c.bnd[i]: c.bnd[i + 1] for i in range(0, len(c.bnd), 2)}
                assert have == bset, f"boundary bookkeeping off at {c!r}"
                assert len(bset) <= 2, f"{c!r} has {len(bset)} boundary vertices"
                if len(c.nbrs) >= 3:
                    assert len(bset) == 1, f"high-degree {c!r} has boundary {bset}"
                if c.parent is None:
                    assert not c.nbrs, f"parentless {c!r} still has edges"
            # lifting rule from this level to the next
            if lvl + 1 < len(levels):
                for P in levels[lvl + 1]:
                    want = {}
                    for x in P.children:
                        for d, e in x.nbrs.items():
                            if d.parent is not P:
                                assert d.parent is not None
                                want[d.parent] = e
                    assert P.nbrs == want, f"lifted adjacency mismatch at {P!r}"
        for lvl in range(1, len(levels)):
            for P in levels[lvl]:
                self._check_merge(P)
        for clusters in levels[:-1]:
            for x in clusters:
                self._check_maximal(x)
        self._check_summaries(levels)

    def _check_summaries(self, levels) -> None:
        saved = {}
        for clusters in levels:
            for c in clusters:
                saved[c] = self._snapshot(c)
        for clusters in levels:
            for c in clusters:
                if len(c.children) >= 3 and self.use_fold:
                    self._check_fold(c)
                    b = c.bnd
                    c.sb0 = b[0] if b else -1
                    c.sb1 = b[2] if len(b) > 2 else -1
                    self._summ_star(c, c.fold.center, self._scan_arms(c))
                else:
                    self._recompute(c)
                got = self._snapshot(c)
                assert got == saved[c], f"stale summary at {c!r}: {saved[c]} != {got}"

    def _scan_arms(self, c) -> tuple:
        center = c.fold.center
        acc = self._arm_identity()
        for x in c.children:
            if x is not center:
                acc = self._arm_combine(acc, self._arm(x, center))
        return acc

    def _check_fold(self, c) -> None:
        f = c.fold
        assert not f.pending
        assert f.center in c.children
        assert len(f.center.nbrs) >= 3
        expect = self._scan_arms(c)
        got = self._fold_total(c)
        assert self._arm_eq(got, expect), f"fold total off at {c!r}: {got} != {expect}"
        if f.rt is not None:
            f.rt.check()
            for x in c.children:
                if x is f.center:
                    continue
                depth = f.rt.depth(x.rnode)
                assert depth <= math.log2(c.n / x.n) + 2, (depth, c.n, x.n)

    def _arm_eq(self, p, q) -> bool:
        keep = [1]
        if self.subtree:
            keep.append(0)
        if self.metrics:
            keep += [2, 3, 4, 5]
        return all(p[i] == q[i] for i in keep)

    def _snapshot(self, c) -> tuple:
        if not self._aug:
            return (c.sb0, c.sb1, c.pagg)
        out = [c.sb0, c.sb1, c.pagg, c.n]
        if self.subtree:
            out.append(c.vagg)
        if self.metrics:
            out += [c.diam, c.plen if c.sb1 >= 0 else 0]
            if c.sb0 >= 0:
                out += [c.e0, c.m0]
            if c.sb1 >= 0:
                out += [c.e1, c.m1]
        return tuple(out)

    def _check_merge(self, P) -> None:  # pragma: no cover - abstract
        raise NotImplementedError

    def _check_maximal(self, x) -> None:  # pragma: no cover - abstract
        raise NotImplementedError

    def check_contraction(self) -> None:
        counts = self.level_counts()
        for lvl in range(1, len(counts)):
            if counts[lvl - 1] >= 2:
                assert 6 * counts[lvl] <= 5 * counts[lvl - 1], (lvl, counts)
        assert sum(counts) <= 6 * max(self.n, 1), counts
