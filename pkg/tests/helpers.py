"""Shared random-workload driver: applies valid ops to an oracle and to structures."""

from __future__ import annotations

import random
from typing import Optional

from ufotree import MAX, SUM, OracleForest, product
from ufotree.aggregates import lift_value
from ufotree.linkcut import LinkCutTree

SUMMAX = product(SUM, MAX)

PATH_ONLY = (LinkCutTree,)


class Fuzz:
    """Random valid link/cut/mark/value ops mirrored into every structure."""

    def __init__(
        self,
        n: int,
        structures: dict,
        spec=SUMMAX,
        seed: int = 0,
        maxdeg: Optional[int] = None,
        hub: float = 0.0,
        link_bias: float = 0.55,
    ) -> None:
        self.n = n
        self.spec = spec
        self.rng = random.Random(seed)
        self.oracle = OracleForest(n, spec)
        self.structs = structures
        self.maxdeg = maxdeg
        self.hub = hub
        self.link_bias = link_bias

    def _each(self, name: str, *args, full_only: bool = False):
        out = {}
        for key, s in self.structs.items():
            if full_only and isinstance(s, PATH_ONLY):
                continue
            out[key] = getattr(s, name)(*args)
        return out

    def random_value(self):
        return lift_value(self.spec, self.rng.randint(-5, 9))

    def step(self) -> tuple:
        rng, o, n = self.rng, self.oracle, self.n
        r = rng.random()
        edges = o.edges()
        if r < self.link_bias or not edges:
            for _ in range(8):
                u, v = rng.randrange(n), rng.randrange(n)
                if self.hub and rng.random() < self.hub:
                    u = rng.randrange(min(3, n))
                if u == v or o.connected(u, v):
                    continue
                if self.maxdeg and max(o.degree(u), o.degree(v)) >= self.maxdeg:
                    continue
                w = lift_value(self.spec, rng.randint(1, 9))
                o.link(u, v, w)
                self._each("link", u, v, w)
                return ("link", u, v, w)
            return ("noop",)
        if r < 0.9:
            u, v, _ = rng.choice(edges)
            if rng.random() < 0.5:
                u, v = v, u
            o.cut(u, v)
            self._each("cut", u, v)
            return ("cut", u, v)
        x = rng.randrange(n)
        if r < 0.95:
            on = rng.random() < 0.5
            o.mark(x, on)
            self._each("mark", x, on, full_only=True)
            return ("mark", x, on)
        val = self.random_value()
        o.set_value(x, val)
        self._each("set_value", x, val, full_only=True)
        return ("value", x, val)

    def check_queries(self, count: int = 3) -> None:
        """Compare a few random queries of every kind against the oracle."""
        rng, o, n = self.rng, self.oracle, self.n
        for _ in range(count):
            u, v = rng.randrange(n), rng.randrange(n)
            c = o.connected(u, v)
            for key, got in self._each("connected", u, v).items():
                assert got == c, f"{key}: connected({u}, {v})"
            if c:
                want = o.path_query(u, v)
                for key, got in self._each("path_query", u, v).items():
                    assert got == want, f"{key}: path_query({u}, {v}) {got} != {want}"
                r = rng.randrange(n)
                if o.connected(u, r):
                    want = o.lca(u, v, r)
                    for key, got in self._each("lca", u, v, r, full_only=True).items():
                        assert got == want, f"{key}: lca({u}, {v}, {r})"
            want = o.diameter(u)
            for key, got in self._each("diameter", u, full_only=True).items():
                assert got == want, f"{key}: diameter({u})"
            want = o.nearest_marked(u)
            for key, got in self._each("nearest_marked", u, full_only=True).items():
                assert got == want, f"{key}: nearest_marked({u})"
            nbrs = list(o.adj[u])
            if nbrs:
                p = rng.choice(nbrs)
                want = o.subtree_query(u, p)
                for key, got in self._each("subtree_query", u, p, full_only=True).items():
                    assert got == want, f"{key}: subtree_query({u}, {p})"


def oracle_of(n: int, edges, spec=SUM) -> OracleForest:
    f = OracleForest(n, spec)
    for e in edges:
        f.link(*e)
    return f


def random_batch(rng: random.Random, o: OracleForest, k: int, maxdeg=None, hub: bool = False) -> list:
    """A valid batch of up to ``k`` updates: deletes of present edges, then acyclic inserts."""
    n = o.n
    edges = o.edges()
    rng.shuffle(edges)
    dels = edges[: rng.randint(0, min(k, len(edges)))]
    ups = [(u, v, True) for u, v, _ in dels]
    parent = list(range(n))

    def find(a):
        while parent[a] != a:
            parent[a] = parent[parent[a]]
            a = parent[a]
        return a

    # inserts must be acyclic against the forest before the deletes too
    for u, v, _ in o.edges():
        parent[find(u)] = find(v)
    deg = [o.degree(v) for v in range(n)]
    cap = maxdeg or n
    tries = 0
    while len(ups) < k and tries < 20 * k:
        tries += 1
        u, v = rng.randrange(n), rng.randrange(n)
        if hub and rng.random() < 0.7:
            u = rng.randrange(min(3, n))
        if u == v or find(u) == find(v) or deg[u] >= cap or deg[v] >= cap:
            continue
        parent[find(u)] = find(v)
        deg[u] += 1
        deg[v] += 1
        ups.append((u, v, False, rng.randint(1, 9)))
    rng.shuffle(ups)
    return ups


def replay(o: OracleForest, ups) -> None:
    for up in ups:
        if up[2]:
            o.cut(up[0], up[1])
    for up in ups:
        if not up[2]:
            o.link(up[0], up[1], up[3] if len(up) > 3 else None)


def shape(t) -> list:
    """Per level, the set of vertex sets spanned by its clusters."""
    span: dict[int, set] = {}
    levels: dict[int, set] = {}
    for v, leaf in enumerate(t.leaves):
        c, lvl = leaf, 0
        while c is not None:
            span.setdefault(id(c), set()).add(v)
            levels.setdefault(lvl, set()).add(id(c))
            c, lvl = c.parent, lvl + 1
    return [frozenset(frozenset(span[i]) for i in levels[lvl]) for lvl in sorted(levels)]
