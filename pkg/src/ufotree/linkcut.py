"""Splay-based link-cut trees with edge-weighted path aggregates.

There is exactly one node per vertex, so edge values are stored on the
endpoints.  A node keeps the value of the edge to its predecessor on its
preferred path (``up``) and to its successor (``down``).  The splay-subtree
aggregate combines the ``up``/``down`` values that lie inside the subtree's
path segment, so the edge hanging off the head of a preferred path is parked
on the head and never counted.
"""

from __future__ import annotations

from typing import Optional

from .aggregates import SUM, AggregateSpec, Value, lift_value
from .errors import CycleError, DuplicateEdge, MissingEdge, NotConnected


class LctNode:
    __slots__ = ("ch", "p", "flip", "up", "down", "has_up", "has_down", "agg", "idx")

    def __init__(self, idx: int, identity: Value) -> None:
        self.idx = idx
        self.ch: list[Optional[LctNode]] = [None, None]
        self.p: Optional[LctNode] = None
        self.flip = False
        self.up = identity
        self.down = identity
        self.has_up = False
        self.has_down = False
        self.agg = identity


class LinkCutTree:
    kind = "linkcut"

    def __init__(self, n: int, spec: AggregateSpec = SUM) -> None:
        self.n = n
        self.spec = spec
        self.nodes = [LctNode(i, spec.identity) for i in range(n)]
        self.edges: dict[tuple[int, int], Value] = {}

    # -- splay machinery ---------------------------------------------------------

    @staticmethod
    def _is_root(x: LctNode) -> bool:
        p = x.p
        return p is None or (p.ch[0] is not x and p.ch[1] is not x)

    @staticmethod
    def _toggle(x: Optional[LctNode]) -> None:
        if x is None:
            return
        x.ch[0], x.ch[1] = x.ch[1], x.ch[0]
        x.up, x.down = x.down, x.up
        x.has_up, x.has_down = x.has_down, x.has_up
        x.flip = not x.flip

    def _push(self, x: LctNode) -> None:
        if x.flip:
            self._toggle(x.ch[0])
            self._toggle(x.ch[1])
            x.flip = False

    def _update(self, x: LctNode) -> None:
        comb = self.spec.combine
        L, R = x.ch
        acc = self.spec.identity
        if L is not None:
            acc = comb(L.agg, x.up) if x.has_up else L.agg
        if R is not None:
            acc = comb(comb(acc, x.down), R.agg) if x.has_down else comb(acc, R.agg)
        x.agg = acc

    def _rotate(self, x: LctNode) -> None:
        p = x.p
        g = p.p
        d = 1 if p.ch[1] is x else 0
        b = x.ch[1 - d]
        if not self._is_root(p):
            g.ch[1 if g.ch[1] is p else 0] = x
        x.p = g
        p.ch[d] = b
        if b is not None:
            b.p = p
        x.ch[1 - d] = p
        p.p = x
        self._update(p)
        self._update(x)

    def _splay(self, x: LctNode) -> None:
        stack = [x]
        y = x
        while not self._is_root(y):
            y = y.p
            stack.append(y)
        for z in reversed(stack):
            self._push(z)
        while not self._is_root(x):
            p = x.p
            if not self._is_root(p):
                g = p.p
                zigzig = (g.ch[0] is p) == (p.ch[0] is x)
                self._rotate(p if zigzig else x)
            self._rotate(x)

    def _access(self, x: LctNode) -> None:
        last: Optional[LctNode] = None
        y: Optional[LctNode] = x
        while y is not None:
            self._splay(y)
            # y's successor on the new preferred path is the head of `last`
            if last is None:
                y.ch[1] = None
                y.has_down = False
                y.down = self.spec.identity
            else:
                head = last
                while True:
                    self._push(head)
                    if head.ch[0] is None:
                        break
                    head = head.ch[0]
                self._splay(head)
                y.has_down = head.has_up
                y.down = head.up
                y.ch[1] = head
            self._update(y)
            last = y
            y = y.p
        self._splay(x)

    def _evert(self, x: LctNode) -> None:
        self._access(x)
        self._toggle(x)

    def _findroot(self, x: LctNode) -> LctNode:
        self._access(x)
        r = x
        while True:
            self._push(r)
            if r.ch[0] is None:
                break
            r = r.ch[0]
        self._splay(r)
        return r

    # -- public operations ---------------------------------------------------------

    def _check_vertex(self, v: int) -> None:
        if not 0 <= v < self.n:
            raise IndexError(f"vertex {v} out of range [0, {self.n})")

    def connected(self, u: int, v: int) -> bool:
        self._check_vertex(u)
        self._check_vertex(v)
        if u == v:
            return True
        return self._findroot(self.nodes[u]) is self._findroot(self.nodes[v])

    def link(self, u: int, v: int, w: Value = None) -> None:
        self._check_vertex(u)
        self._check_vertex(v)
        if u == v:
            raise CycleError(f"self-loop at {u}")
        key = (u, v) if u < v else (v, u)
        if key in self.edges:
            raise DuplicateEdge(f"edge ({u}, {v}) already present")
        if self.connected(u, v):
            raise CycleError(f"{u} and {v} are already connected")
        if w is None:
            w = lift_value(self.spec, 1)
        x = self.nodes[u]
        self._evert(x)
        self._push(x)
        # x is now the root of its represented tree: it has no predecessor
        x.up = w
        x.has_up = True
        self._update(x)
        x.p = self.nodes[v]
        self.edges[key] = w

    def cut(self, u: int, v: int) -> None:
        self._check_vertex(u)
        self._check_vertex(v)
        key = (u, v) if u < v else (v, u)
        if key not in self.edges:
            raise MissingEdge(f"edge ({u}, {v}) not present")
        x, y = self.nodes[u], self.nodes[v]
        self._evert(x)
        self._access(y)
        # path is x - y, so x is y's left child and has no children of its own
        self._push(y)
        lx = y.ch[0]
        self._push(lx)
        assert lx is x and x.ch[0] is None and x.ch[1] is None
        y.ch[0] = None
        x.p = None
        x.has_down = False
        x.down = self.spec.identity
        y.has_up = False
        y.up = self.spec.identity
        self._update(x)
        self._update(y)
        del self.edges[key]

    def path_query(self, u: int, v: int) -> Value:
        self._check_vertex(u)
        self._check_vertex(v)
        if u == v:
            return self.spec.identity
        if not self.connected(u, v):
            raise NotConnected(f"{u} and {v} are not connected")
        self._evert(self.nodes[u])
        self._access(self.nodes[v])
        return self.nodes[v].agg

    def has_edge(self, u: int, v: int) -> bool:
        return ((u, v) if u < v else (v, u)) in self.edges

    # -- validation -----------------------------------------------------------------

    def _push_all(self) -> None:
        """Resolve every pending flip, top-down along each splay tree."""
        for x in self.nodes:
            if self._is_root(x):
                stack = [x]
                while stack:
                    y = stack.pop()
                    self._push(y)
                    for c in y.ch:
                        if c is not None:
                            stack.append(c)

    def reconstruct_edges(self) -> dict[tuple[int, int], Value]:
        """Rebuild the represented forest from the preferred-path decomposition."""
        self._push_all()
        out = {}
        for x in self.nodes:
            if not self._is_root(x):
                continue
            # in-order walk of this splay tree gives one preferred path
            order = []
            stack, cur = [], x
            while stack or cur is not None:
                while cur is not None:
                    stack.append(cur)
                    cur = cur.ch[0]
                cur = stack.pop()
                order.append(cur)
                cur = cur.ch[1]
            for a, b in zip(order, order[1:]):
                assert a.has_down and b.has_up and a.down == b.up
                out[(min(a.idx, b.idx), max(a.idx, b.idx))] = a.down
            head = order[0]
            if x.p is not None:
                assert head.has_up
                out[(min(head.idx, x.p.idx), max(head.idx, x.p.idx))] = head.up
            else:
                assert not head.has_up
            assert not order[-1].has_down
        return out

    def check(self) -> None:
        got = self.reconstruct_edges()
        assert got == self.edges, "preferred paths do not reproduce the forest"
        for x in self.nodes:
            assert not x.flip
            agg = x.agg
            self._update(x)
            assert agg == x.agg


def lct_link(t: LinkCutTree, u: int, v: int, w: Value = None) -> None:
    t.link(u, v, w)


def lct_cut(t: LinkCutTree, u: int, v: int) -> None:
    t.cut(u, v)


def lct_connected(t: LinkCutTree, u: int, v: int) -> bool:
    return t.connected(u, v)


def lct_path_query(t: LinkCutTree, u: int, v: int) -> Value:
    return t.path_query(u, v)
