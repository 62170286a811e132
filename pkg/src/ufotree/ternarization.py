"""Degree reduction: serve arbitrary-degree forests with a degree-3 structure.

Each original vertex ``v`` is represented by a path of surrogate vertices.
Consecutive surrogates are joined by fake edges, which carry the aggregate's
bottom value and length 0, and each original edge is carried by one surrogate
of each endpoint.  A lone surrogate carries up to three original edges, the two
ends of a longer path carry two, and interior surrogates carry one.

Every surrogate on a path of two or more carries at least one original edge,
so a forest on ``n`` vertices never needs more than ``2n`` surrogates.
"""

from __future__ import annotations

import dataclasses
import sys
from typing import Iterable, Optional

from .aggregates import SUM, AggregateSpec, Value, lift_value
from .errors import CycleError, DuplicateEdge, MissingEdge
from .forest import edge_length
from .topology import TopologyTree

#: surrogate update records: ("link", a, b, value, length) or ("cut", a, b)
SurrogateOp = tuple

MAX_OPS_PER_UPDATE = 7


class Ternarized:
    """An arbitrary-degree dynamic forest backed by a degree-3 structure."""

    kind = "topology+ternarize"

    def __init__(
        self,
        n: int,
        spec: AggregateSpec = SUM,
        edges: Iterable[tuple] = (),
        *,
        inner=TopologyTree,
        **options,
    ) -> None:
        if n < 0:
            raise ValueError("n must be non-negative")
        self.n = n
        self.spec = spec
        N = 2 * n
        self.owner = [-1] * N
        self.prev = [-1] * N
        self.next = [-1] * N
        self.deg = [0] * N
        self.head = list(range(n))
        self.tail = list(range(n))
        # original edges carried by each surrogate, keyed by the original edge
        self.carried: list[Optional[dict]] = [None] * N
        # original edge key -> {endpoint: surrogate}, plus its value and length
        self.carrier: dict[tuple[int, int], tuple[dict[int, int], Value, float]] = {}
        # surrogates of v with a free degree slot (ordered set)
        self.spare: list[dict[int, None]] = [dict() for _ in range(n)]
        self.last_ops: list[SurrogateOp] = []
        #: clusters touched by the wrapped structure during the last update
        self.last_touched = 0

        edges = [tuple(e) for e in edges]
        adj: list[list[tuple]] = [[] for _ in range(n)]
        for e in edges:
            u, v = e[0], e[1]
            if not (0 <= u < n and 0 <= v < n):
                raise IndexError(f"edge ({u}, {v}) out of range")
            w = e[2] if len(e) > 2 else lift_value(spec, 1)
            key = (u, v) if u < v else (v, u)
            if u == v:
                raise CycleError(f"self-loop at {u}")
            if key in self.carrier:
                raise DuplicateEdge(f"edge {key} listed twice")
            self.carrier[key] = ({}, w, edge_length(spec, w))
            adj[u].append(key)
            adj[v].append(key)

        fake = spec.fake_value
        sur_edges: list[tuple] = []
        nxt_id = n
        for v in range(n):
            self.owner[v] = v
            self.carried[v] = {}
            d = len(adj[v])
            k = max(1, d - 2)
            path = [v]
            for _ in range(k - 1):
                s = nxt_id
                nxt_id += 1
                self.owner[s] = v
                self.carried[s] = {}
                path.append(s)
            for a, b in zip(path, path[1:]):
                self.next[a], self.prev[b] = b, a
                self.deg[a] += 1
                self.deg[b] += 1
                sur_edges.append((a, b, fake, 0))
            self.tail[v] = path[-1]
            if k == 1:
                slots = [v] * d
            else:
                slots = [path[0], path[0], *path[1:-1], path[-1], path[-1]]
            for key, s in zip(adj[v], slots):
                self.carrier[key][0][v] = s
                self.carried[s][key] = None
                self.deg[s] += 1
            for s in path:
                if self.deg[s] < 3:
                    self.spare[v][s] = None
        self.free = list(range(N - 1, nxt_id - 1, -1))
        for key, (ends, w, ln) in self.carrier.items():
            sur_edges.append((ends[key[0]], ends[key[1]], w, ln))

        inner_spec = spec
        if spec.vertex_values is not None:
            vals = {v: x for v, x in spec.vertex_values.items() if 0 <= v < n}
            inner_spec = dataclasses.replace(spec, vertex_values=vals)
        self.inner = inner(N, inner_spec, sur_edges, **options)
        self.marked = bytearray(n)
        self._ops: list[SurrogateOp] = []

    # -- surrogate bookkeeping ---------------------------------------------------

    def _check_vertex(self, v: int) -> None:
        if not 0 <= v < self.n:
            raise IndexError(f"vertex {v} out of range [0, {self.n})")

    def _alloc(self, v: int) -> int:
        s = self.free.pop()
        self.owner[s] = v
        self.carried[s] = {}
        return s

    def _release(self, s: int) -> None:
        self.owner[s] = -1
        self.carried[s] = None
        self.prev[s] = self.next[s] = -1
        self.free.append(s)

    def _set_deg(self, s: int, d: int) -> None:
        self.deg[s] = d
        sp = self.spare[self.owner[s]]
        if d < 3:
            sp[s] = None
        else:
            sp.pop(s, None)

    def _op_link(self, a: int, b: int, w: Value, ln: float) -> None:
        self._ops.append(("link", a, b, w, ln))
        self.inner.link(a, b, w, length=ln)
        self.last_touched += self.inner.stats.total_touched

    def _op_cut(self, a: int, b: int) -> None:
        self._ops.append(("cut", a, b))
        self.inner.cut(a, b)
        self.last_touched += self.inner.stats.total_touched

    def _slot(self, v: int) -> int:
        """A surrogate of v with a free degree slot, growing the path if needed."""
        sp = self.spare[v]
        if sp:
            return next(iter(sp))
        t = self.tail[v]
        key = next(iter(self.carried[t]))
        ends, w, ln = self.carrier[key]
        x = ends[key[0] if key[1] == v else key[1]]
        s = self._alloc(v)
        # cut first so no surrogate ever exceeds degree 3
        self._op_cut(t, x)
        self._op_link(t, s, self.spec.fake_value, 0)
        self._op_link(s, x, w, ln)
        del self.carried[t][key]
        self.carried[s][key] = None
        ends[v] = s
        self.next[t], self.prev[s] = s, t
        self.tail[v] = s
        self._set_deg(s, 2)
        return s

    def _shrink(self, s: int) -> None:
        """Drop s from its path if it carries nothing and is not alone."""
        v = self.owner[s]
        p, q = self.prev[s], self.next[s]
        if self.carried[s] or (p < 0 and q < 0):
            return
        if p >= 0:
            self._op_cut(p, s)
        if q >= 0:
            self._op_cut(s, q)
        if p >= 0 and q >= 0:
            self._op_link(p, q, self.spec.fake_value, 0)
            self.next[p], self.prev[q] = q, p
        elif p >= 0:
            self.next[p] = -1
            self.tail[v] = p
            self._set_deg(p, self.deg[p] - 1)
        else:
            self.prev[q] = -1
            self._move_rep(v, s, q)
            self.head[v] = q
            self._set_deg(q, self.deg[q] - 1)
        self.spare[v].pop(s, None)
        self._release(s)

    def _move_rep(self, v: int, old: int, new: int) -> None:
        inner = self.inner
        val = inner.values[old]
        if val != self.spec.identity:
            inner.set_value(old, self.spec.identity)
            inner.set_value(new, val)
        if inner.marked[old]:
            inner.mark(old, False)
            inner.mark(new, True)

    # -- updates -----------------------------------------------------------------------

    def link(self, u: int, v: int, w: Value = None) -> list[SurrogateOp]:
        self._check_vertex(u)
        self._check_vertex(v)
        if u == v:
            raise CycleError(f"self-loop at {u}")
        key = (u, v) if u < v else (v, u)
        if key in self.carrier:
            raise DuplicateEdge(f"edge ({u}, {v}) already present")
        if self.connected(u, v):
            raise CycleError(f"{u} and {v} are already connected")
        if w is None:
            w = lift_value(self.spec, 1)
        ln = edge_length(self.spec, w)
        self._ops = []
        self.last_touched = 0
        su = self._slot(u)
        sv = self._slot(v)
        self._op_link(su, sv, w, ln)
        self.carrier[key] = ({u: su, v: sv}, w, ln)
        for x, s in ((u, su), (v, sv)):
            self.carried[s][key] = None
            self._set_deg(s, self.deg[s] + 1)
        self.last_ops = self._ops
        return self._ops

    def cut(self, u: int, v: int) -> list[SurrogateOp]:
        self._check_vertex(u)
        self._check_vertex(v)
        key = (u, v) if u < v else (v, u)
        if key not in self.carrier:
            raise MissingEdge(f"edge ({u}, {v}) not present")
        ends, _, _ = self.carrier.pop(key)
        self._ops = []
        self.last_touched = 0
        su, sv = ends[u], ends[v]
        self._op_cut(su, sv)
        for s in (su, sv):
            del self.carried[s][key]
            self._set_deg(s, self.deg[s] - 1)
        self._shrink(su)
        self._shrink(sv)
        self.last_ops = self._ops
        return self._ops

    def mark(self, v: int, on: bool = True) -> None:
        self._check_vertex(v)
        self.marked[v] = 1 if on else 0
        self.inner.mark(self.head[v], on)

    def set_value(self, v: int, value: Value) -> None:
        self._check_vertex(v)
        self.inner.set_value(self.head[v], value)

    # -- queries ------------------------------------------------------------------------

    def surrogate(self, v: int) -> int:
        """The representative surrogate of an original vertex."""
        self._check_vertex(v)
        return self.head[v]

    def surrogates(self, v: int) -> list[int]:
        out = [self.head[v]]
        while self.next[out[-1]] >= 0:
            out.append(self.next[out[-1]])
        return out

    def surrogate_count(self) -> int:
        return 2 * self.n - len(self.free)

    def surrogate_edge(self, u: int, v: int) -> tuple[int, int]:
        ends = self.carrier[(u, v) if u < v else (v, u)][0]
        return ends[u], ends[v]

    def connected(self, u: int, v: int) -> bool:
        return self.inner.connected(self.surrogate(u), self.surrogate(v))

    def path_query(self, u: int, v: int) -> Value:
        return self.inner.path_query(self.surrogate(u), self.surrogate(v))

    def subtree_query(self, v: int, p: int) -> Value:
        self._check_vertex(v)
        self._check_vertex(p)
        key = (v, p) if v < p else (p, v)
        if key not in self.carrier:
            raise MissingEdge(f"edge ({v}, {p}) not present")
        sv, sp = self.surrogate_edge(v, p)
        return self.inner.subtree_query(sv, sp)

    def lca(self, u: int, v: int, r: int) -> int:
        s = self.inner.lca(self.surrogate(u), self.surrogate(v), self.surrogate(r))
        return self.owner[s]

    def diameter(self, v: int):
        return self.inner.diameter(self.surrogate(v))

    def nearest_marked(self, v: int):
        return self.inner.nearest_marked(self.surrogate(v))

    def has_edge(self, u: int, v: int) -> bool:
        return ((u, v) if u < v else (v, u)) in self.carrier

    def degree(self, v: int) -> int:
        return sum(len(self.carried[s]) for s in self.surrogates(v))

    def height(self) -> int:
        return self.inner.height()

    def memory_bytes(self) -> int:
        size = sys.getsizeof
        total = self.inner.memory_bytes()
        for arr in (self.owner, self.prev, self.next, self.deg, self.head, self.tail, self.free):
            total += size(arr)
        total += size(self.carried) + sum(size(c) for c in self.carried if c is not None)
        total += size(self.spare) + sum(size(s) for s in self.spare)
        total += size(self.carrier)
        for ends, _, _ in self.carrier.values():
            total += size(ends)
        return total

    # -- validation ---------------------------------------------------------------------

    def check(self) -> None:
        inner = self.inner
        inner.check()
        assert self.surrogate_count() <= 2 * self.n
        live = [s for s in range(2 * self.n) if self.owner[s] >= 0]
        assert len(live) == self.surrogate_count()
        for s in live:
            assert inner.degree(s) == self.deg[s] <= 3, f"surrogate {s} degree"
            assert (self.deg[s] < 3) == (s in self.spare[self.owner[s]])
        for v in range(self.n):
            path = self.surrogates(v)
            assert path[-1] == self.tail[v]
            assert self.prev[path[0]] < 0
            for a, b in zip(path, path[1:]):
                assert self.prev[b] == a and self.owner[b] == v
                assert inner.has_edge(a, b)
            if len(path) > 1:
                assert all(self.carried[s] for s in path), f"empty surrogate on path of {v}"
        fake_edges = sum(len(self.surrogates(v)) - 1 for v in range(self.n))
        assert len(inner.edges) == fake_edges + len(self.carrier)
        for (a, b), (ends, w, _) in self.carrier.items():
            sa, sb = ends[a], ends[b]
            assert self.owner[sa] == a and self.owner[sb] == b
            assert inner.edges[inner._key(sa, sb)][0][2] == w


def ternarize(
    edges: Iterable[tuple], n: int, spec: AggregateSpec = SUM, **options
) -> Ternarized:
    return Ternarized(n, spec, edges, **options)


def tern_link(m: Ternarized, u: int, v: int, w: Value = None) -> list[SurrogateOp]:
    return m.link(u, v, w)


def tern_cut(m: Ternarized, u: int, v: int) -> list[SurrogateOp]:
    return m.cut(u, v)


def tern_translate_query(m: Ternarized, kind: str, *args: int) -> tuple:
    """Map a query on original vertices to the same query on surrogates."""
    if kind == "subtree":
        return (kind, *m.surrogate_edge(*args))
    if kind not in ("connected", "path", "lca", "diameter", "nearest_marked"):
        raise ValueError(f"unknown query kind {kind!r}")
    return (kind, *(m.surrogate(a) for a in args))
