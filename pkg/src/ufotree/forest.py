"""Brute-force reference forest.

Every query is answered by an explicit traversal of adjacency lists, with no
caching.  The dynamic structures in this package are checked against it.
"""

from __future__ import annotations

import math
from collections import deque
from typing import Iterable

from .aggregates import SUM, AggregateSpec, Value, lift_value
from .errors import CycleError, DuplicateEdge, MissingEdge, NotConnected

INF = math.inf


def edge_length(spec: AggregateSpec, value: Value) -> float:
    """Metric used by diameter and nearest-marked queries.

    Numeric additive aggregates measure paths by their edge values; anything
    else counts edges.
    """
    return value if spec.additive else 1


class OracleForest:
    def __init__(self, n: int, spec: AggregateSpec = SUM) -> None:
        if n < 0:
            raise ValueError("n must be non-negative")
        self.n = n
        self.spec = spec
        # adj[u][v] = (value, length)
        self.adj: list[dict[int, tuple[Value, float]]] = [dict() for _ in range(n)]
        self.marked: set[int] = set()
        self.values: list[Value] = [spec.vertex_value(v) for v in range(n)]

    # -- updates -----------------------------------------------------------

    def _check_vertex(self, v: int) -> None:
        if not 0 <= v < self.n:
            raise IndexError(f"vertex {v} out of range [0, {self.n})")

    def link(self, u: int, v: int, w: Value = None, length: float | None = None) -> None:
        self._check_vertex(u)
        self._check_vertex(v)
        if u == v:
            raise CycleError(f"self-loop at {u}")
        if v in self.adj[u]:
            raise DuplicateEdge(f"edge ({u}, {v}) already present")
        if self.connected(u, v):
            raise CycleError(f"{u} and {v} are already connected")
        if w is None:
            w = lift_value(self.spec, 1)
        if length is None:
            length = edge_length(self.spec, w)
        self.adj[u][v] = (w, length)
        self.adj[v][u] = (w, length)

    def cut(self, u: int, v: int) -> None:
        self._check_vertex(u)
        self._check_vertex(v)
        if v not in self.adj[u]:
            raise MissingEdge(f"edge ({u}, {v}) not present")
        del self.adj[u][v]
        del self.adj[v][u]

    def mark(self, v: int, on: bool = True) -> None:
        self._check_vertex(v)
        if on:
            self.marked.add(v)
        else:
            self.marked.discard(v)

    def set_value(self, v: int, value: Value) -> None:
        self._check_vertex(v)
        self.values[v] = value

    def has_edge(self, u: int, v: int) -> bool:
        return v in self.adj[u]

    def edges(self) -> list[tuple[int, int, Value]]:
        return [(u, v, wl[0]) for u in range(self.n) for v, wl in self.adj[u].items() if u < v]

    def degree(self, v: int) -> int:
        return len(self.adj[v])

    # -- traversals ----------------------------------------------------------

    def _bfs_parents(self, src: int) -> dict[int, int]:
        parent = {src: -1}
        queue = deque([src])
        while queue:
            x = queue.popleft()
            for y in self.adj[x]:
                if y not in parent:
                    parent[y] = x
                    queue.append(y)
        return parent

    def component(self, v: int) -> list[int]:
        return list(self._bfs_parents(v))

    def _distances(self, src: int) -> dict[int, float]:
        dist = {src: 0}
        stack = [src]
        while stack:
            x = stack.pop()
            for y, (_, length) in self.adj[x].items():
                if y not in dist:
                    dist[y] = dist[x] + length
                    stack.append(y)
        return dist

    def _path(self, u: int, v: int) -> list[int]:
        parent = self._bfs_parents(u)
        if v not in parent:
            raise NotConnected(f"{u} and {v} are not connected")
        path = [v]
        while path[-1] != u:
            path.append(parent[path[-1]])
        path.reverse()
        return path

    # -- queries -------------------------------------------------------------

    def connected(self, u: int, v: int) -> bool:
        return v in self._bfs_parents(u)

    def path_query(self, u: int, v: int) -> Value:
        path = self._path(u, v)
        return self.spec.fold(self.adj[a][b][0] for a, b in zip(path, path[1:]))

    def path_length(self, u: int, v: int) -> float:
        path = self._path(u, v)
        return sum(self.adj[a][b][1] for a, b in zip(path, path[1:]))

    def subtree_query(self, v: int, p: int) -> Value:
        if p not in self.adj[v]:
            raise MissingEdge(f"edge ({v}, {p}) not present")
        seen = {v, p}
        acc = self.values[v]
        stack = [v]
        while stack:
            x = stack.pop()
            for y in self.adj[x]:
                if y not in seen:
                    seen.add(y)
                    acc = self.spec.combine(acc, self.values[y])
                    stack.append(y)
        return acc

    def lca(self, u: int, v: int, r: int) -> int:
        parent = self._bfs_parents(r)
        if u not in parent or v not in parent:
            raise NotConnected(f"{u}, {v} and {r} are not all connected")
        ancestors = set()
        x = u
        while x != -1:
            ancestors.add(x)
            x = parent[x]
        x = v
        while x not in ancestors:
            x = parent[x]
        return x

    def diameter(self, v: int) -> float:
        dist = self._distances(v)
        far = max(dist, key=dist.__getitem__)
        return max(self._distances(far).values())

    def nearest_marked(self, v: int) -> float:
        if not self.marked:
            return INF
        dist = self._distances(v)
        return min((d for x, d in dist.items() if x in self.marked), default=INF)

    def is_forest(self) -> bool:
        seen: set[int] = set()
        for s in range(self.n):
            if s in seen:
                continue
            comp = self.component(s)
            seen.update(comp)
            if sum(len(self.adj[x]) for x in comp) != 2 * (len(comp) - 1):
                return False
        return True


def oracle_from_edges(
    n: int, edges: Iterable[tuple], spec: AggregateSpec = SUM
) -> OracleForest:
    f = OracleForest(n, spec)
    for e in edges:
        f.link(*e)
    return f


def oracle_link(f: OracleForest, u: int, v: int, w: Value = None) -> OracleForest:
    f.link(u, v, w)
    return f


def oracle_cut(f: OracleForest, u: int, v: int) -> OracleForest:
    f.cut(u, v)
    return f


_QUERIES = {
    "connected": OracleForest.connected,
    "path": OracleForest.path_query,
    "subtree": OracleForest.subtree_query,
    "lca": OracleForest.lca,
    "diameter": OracleForest.diameter,
    "nearest_marked": OracleForest.nearest_marked,
}


def oracle_query(f: OracleForest, kind: str, *args) -> Value:
    try:
        fn = _QUERIES[kind]
    except KeyError:
        raise ValueError(f"unknown query kind {kind!r}") from None
    return fn(f, *args)
