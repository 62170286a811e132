"""Tree generators, edge-list ingestion and benchmark drivers.

All randomness goes through ``numpy.random.Generator(PCG64(seed))``, so an
identical (family, n, seed) always produces a byte-identical edge list.
"""

from __future__ import annotations

import math
import re
import statistics
import sys
import time
from dataclasses import dataclass, field
from typing import Callable, Iterable, Optional, Sequence

import numpy as np
from scipy.cluster.hierarchy import DisjointSet
from scipy.sparse import coo_array
from scipy.sparse.csgraph import shortest_path

from .aggregates import SUM
from .errors import BadSpec, ForestError, ParseError
from .forest import OracleForest
from .linkcut import LinkCutTree
from .ternarization import Ternarized
from .topology import TopologyTree
from .ufo import UFOTree

FAMILIES = (
    "path",
    "binary",
    "kary",
    "star",
    "dandelion",
    "random_deg3",
    "random_unbounded",
    "pref_attach",
    "zipf",
)
IMPLS = ("ufo", "topology", "topology+ternarize", "linkcut", "oracle")
CSV_HEADER = (
    "impl", "family", "n", "k", "threads", "seed", "phase",
    "wall_seconds", "peak_bytes", "touched_clusters",
)
SWEEP_HEADER = ("impl", "alpha", "n", "seed", "diameter", "wall_seconds")
MAX_WEIGHT = 1000

Edge = tuple[int, int, int]


class ValidationFailure(ForestError):
    """A structure disagreed with the oracle during a validated run."""


@dataclass
class WorkloadSpec:
    family: str
    n: int
    k: int = 1
    seed: int = 0
    impl: str = "ufo"
    threads: int = 1
    alpha: float = 1.0
    arity: int = 2
    queries: int = 1000
    permute: bool = True
    validate: bool = False
    reps: int = 1
    extra: dict = field(default_factory=dict)

    def check(self) -> None:
        if self.family not in FAMILIES:
            raise BadSpec(f"unknown family {self.family!r}")
        if self.impl not in IMPLS:
            raise BadSpec(f"unknown impl {self.impl!r}")
        if self.n < 1:
            raise BadSpec("n must be at least 1")
        if self.k < 1:
            raise BadSpec("batch size k must be at least 1")
        if self.threads < 1:
            raise BadSpec("threads must be at least 1")
        if self.family == "kary" and self.arity < 1:
            raise BadSpec("kary needs arity >= 1")
        if self.family == "zipf" and not self.alpha >= 0:
            raise BadSpec("zipf needs alpha >= 0")
        if self.k > 1 and self.impl not in ("ufo", "topology"):
            raise BadSpec(f"impl {self.impl!r} has no batch updates; use k=1")
        if self.reps < 1:
            raise BadSpec("reps must be at least 1")

    @property
    def family_label(self) -> str:
        if self.family == "kary":
            return f"kary({self.arity})"
        if self.family == "zipf":
            return f"zipf({self.alpha:g})"
        return self.family


_FAMILY_RE = re.compile(r"^([a-z_0-9]+?)(?:\((.+)\))?$")


def parse_family(text: str) -> tuple[str, dict]:
    """Split ``"kary(4)"`` or ``"zipf(1.5)"`` into a family and its parameter."""
    m = _FAMILY_RE.match(text.strip())
    if not m or m.group(1) not in FAMILIES:
        raise BadSpec(f"unknown family {text!r}")
    fam, arg = m.group(1), m.group(2)
    if arg is None:
        return fam, {}
    try:
        if fam == "kary":
            return fam, {"arity": int(arg)}
        if fam == "zipf":
            return fam, {"alpha": float(arg)}
    except ValueError:
        raise BadSpec(f"bad parameter in {text!r}") from None
    raise BadSpec(f"family {fam!r} takes no parameter")


def make_rng(seed: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(seed))


# -- generators ------------------------------------------------------------------------


def _parents(spec: WorkloadSpec, rng: np.random.Generator) -> np.ndarray:
    """parent[i] for i >= 1 (parent[0] is unused); always parent[i] < i."""
    n = spec.n
    idx = np.arange(n, dtype=np.int64)
    fam = spec.family
    if fam == "path":
        return idx - 1
    if fam == "binary":
        return (idx - 1) // 2
    if fam == "kary":
        return (idx - 1) // spec.arity
    if fam == "star":
        return np.zeros(n, dtype=np.int64)
    if fam == "dandelion":
        m = (n + 1) // 2
        par = idx - 1
        par[m:] = 0
        return par
    if fam == "random_unbounded":
        par = np.zeros(n, dtype=np.int64)
        if n > 1:
            par[1:] = np.floor(rng.random(n - 1) * idx[1:]).astype(np.int64)
        return par
    if fam == "zipf":
        # target t in [0, i) with P(t) proportional to (t + 1) ** -alpha
        par = np.zeros(n, dtype=np.int64)
        if n > 1:
            cum = np.cumsum(np.arange(1, n, dtype=np.float64) ** -spec.alpha)
            u = rng.random(n - 1) * cum[idx[1:] - 1]
            par[1:] = np.minimum(np.searchsorted(cum, u, side="right"), idx[1:] - 1)
        return par
    par = np.zeros(n, dtype=np.int64)
    if fam == "random_deg3":
        open_ = [0]
        deg = [0] * n
        draws = rng.random(n)
        for i in range(1, n):
            j = int(draws[i] * len(open_))
            p = open_[j]
            par[i] = p
            deg[p] += 1
            # the root may take three children, everyone else two
            if deg[p] == (3 if p == 0 else 2):
                open_[j] = open_[-1]
                open_.pop()
            open_.append(i)
        return par
    if fam == "pref_attach":
        # pick a uniform endpoint of an existing edge, i.e. proportional to degree
        ends = [0]
        draws = rng.random(n)
        for i in range(1, n):
            p = ends[int(draws[i] * len(ends))]
            par[i] = p
            ends.append(p)
            ends.append(i)
        return par
    raise BadSpec(f"unknown family {fam!r}")


def generate(spec: WorkloadSpec) -> list[Edge]:
    """A spanning tree of the requested family as ``(u, v, weight)`` triples."""
    spec.check()
    rng = make_rng(spec.seed)
    n = spec.n
    par = _parents(spec, rng)
    weights = rng.integers(1, MAX_WEIGHT + 1, size=n)
    perm = rng.permutation(n) if spec.permute else np.arange(n)
    return [(int(perm[par[i]]), int(perm[i]), int(weights[i])) for i in range(1, n)]


def tree_diameter(n: int, edges: Sequence[tuple]) -> int:
    """Hop diameter of a tree by double sweep."""
    if n <= 1 or not edges:
        return 0
    arr = np.asarray([(e[0], e[1]) for e in edges], dtype=np.int64)
    g = coo_array((np.ones(len(arr)), (arr[:, 0], arr[:, 1])), shape=(n, n)).tocsr()
    d0 = shortest_path(g, directed=False, unweighted=True, indices=int(arr[0, 0]))
    d0[np.isinf(d0)] = -1
    far = int(np.argmax(d0))
    d1 = shortest_path(g, directed=False, unweighted=True, indices=far)
    d1[np.isinf(d1)] = -1
    return int(d1.max())


# -- ingestion ------------------------------------------------------------------------


def parse_edge_list(lines: Iterable[str]) -> tuple[int, list[tuple]]:
    """Parse ``u v`` or ``u v w`` lines; ``#`` starts a comment."""
    edges: list[tuple] = []
    n = 0
    for lineno, raw in enumerate(lines, 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        if len(parts) not in (2, 3):
            raise ParseError(f"line {lineno}: expected 'u v' or 'u v w', got {raw.strip()!r}")
        try:
            u, v = int(parts[0]), int(parts[1])
            w = int(parts[2]) if len(parts) == 3 else None
        except ValueError:
            raise ParseError(f"line {lineno}: non-integer field in {raw.strip()!r}") from None
        if u < 0 or v < 0:
            raise ParseError(f"line {lineno}: negative vertex id")
        edges.append((u, v) if w is None else (u, v, w))
        n = max(n, u + 1, v + 1)
    return n, edges


def read_edge_list(path: str) -> tuple[int, list[tuple]]:
    with open(path) as fh:
        return parse_edge_list(fh)


def write_edge_list(path_or_file, edges: Iterable[tuple]) -> None:
    text = "".join(" ".join(str(x) for x in e) + "\n" for e in edges)
    if hasattr(path_or_file, "write"):
        path_or_file.write(text)
    else:
        with open(path_or_file, "w") as fh:
            fh.write(text)


def spanning_forest(
    n: int,
    edges: Sequence[tuple],
    mode: str = "bfs",
    seed: int = 0,
    order: Optional[Sequence[int]] = None,
) -> list[tuple]:
    """A spanning forest of an arbitrary graph.

    ``bfs`` grows a breadth-first tree from a random root in each component;
    ``ris`` inserts edges in a random order and keeps those joining two
    components.  ``order`` fixes the RIS edge order explicitly.
    """
    rng = make_rng(seed)
    mode = mode.lower()
    if mode == "ris":
        ds = DisjointSet(range(n))
        perm = order if order is not None else rng.permutation(len(edges))
        out = []
        for i in perm:
            e = edges[int(i)]
            if e[0] != e[1] and ds.merge(e[0], e[1]):
                out.append(tuple(e))
        return out
    if mode != "bfs":
        raise BadSpec(f"unknown forest mode {mode!r}")
    adj: list[list[int]] = [[] for _ in range(n)]
    for i, e in enumerate(edges):
        adj[e[0]].append(i)
        adj[e[1]].append(i)
    seen = bytearray(n)
    out = []
    for r in rng.permutation(n):
        r = int(r)
        if seen[r]:
            continue
        seen[r] = 1
        frontier = [r]
        while frontier:
            nxt = []
            for x in frontier:
                for i in adj[x]:
                    e = edges[i]
                    y = e[1] if e[0] == x else e[0]
                    if not seen[y]:
                        seen[y] = 1
                        out.append(tuple(e))
                        nxt.append(y)
            frontier = nxt
    return out


# -- structures -------------------------------------------------------------------------


def make_structure(impl: str, n: int, edges: Sequence[tuple] = (), **options):
    """An empty (or pre-built) structure of the given kind over SUM."""
    if impl == "ufo":
        return UFOTree(n, SUM, edges, **options)
    if impl == "topology":
        return TopologyTree(n, SUM, edges, **options)
    if impl == "topology+ternarize":
        return Ternarized(n, SUM, edges, **options)
    if impl == "linkcut":
        t = LinkCutTree(n, SUM)
        for e in edges:
            t.link(*e)
        return t
    if impl == "oracle":
        t = OracleForest(n, SUM)
        for e in edges:
            t.link(*e)
        return t
    raise BadSpec(f"unknown impl {impl!r}")


def structure_bytes(t) -> int:
    """Live bytes owned by a structure, counted per allocation."""
    if hasattr(t, "memory_bytes"):
        return t.memory_bytes()
    size = sys.getsizeof
    if isinstance(t, LinkCutTree):
        total = size(t.nodes) + size(t.edges)
        for x in t.nodes:
            total += size(x) + size(x.ch)
        return total
    total = size(t.adj) + size(t.values)
    for a in t.adj:
        total += size(a) + sum(size(v) for v in a.values())
    return total


def _touched(t) -> int:
    if isinstance(t, Ternarized):
        return t.last_touched
    stats = getattr(t, "stats", None)
    return stats.total_touched if stats is not None else 0


def _validate_against(t, edges: Sequence[tuple], n: int, samples: int, rng) -> None:
    oracle = OracleForest(n, SUM)
    for e in edges:
        oracle.link(*e)
    pairs = rng.integers(0, n, size=(samples, 2))
    for u, v in pairs.tolist():
        c = oracle.connected(u, v)
        if t.connected(u, v) != c:
            raise ValidationFailure(f"connected({u}, {v}) disagrees with oracle")
        if c and t.path_query(u, v) != oracle.path_query(u, v):
            raise ValidationFailure(f"path_query({u}, {v}) disagrees with oracle")


def _apply(t, spec: WorkloadSpec, ups: list[tuple], delete: bool) -> int:
    """Apply updates one at a time or in batches of k; returns touched clusters."""
    touched = 0
    if spec.k == 1:
        for e in ups:
            if delete:
                t.cut(e[0], e[1])
            else:
                t.link(*e)
            touched += _touched(t)
        return touched
    for i in range(0, len(ups), spec.k):
        group = [(e[0], e[1], delete, *e[2:]) for e in ups[i : i + spec.k]]
        stats = t.batch_update(group, threads=spec.threads)
        touched += stats.total_touched
    return touched


def bench_updates(spec: WorkloadSpec) -> list[tuple]:
    """Insert all edges then delete all edges, both in a random order."""
    spec.check()
    edges = generate(spec)
    if spec.impl == "topology" and edges:
        if np.bincount(np.asarray([e[:2] for e in edges]).ravel()).max() > 3:
            raise BadSpec("topology needs max degree 3; use impl topology+ternarize")
    rows = []
    for rep in range(spec.reps):
        rng = make_rng(spec.seed * 1_000_003 + rep + 1)
        ins = [edges[i] for i in rng.permutation(len(edges))]
        dels = [edges[i] for i in rng.permutation(len(edges))]
        t = make_structure(spec.impl, spec.n)
        t0 = time.perf_counter()
        touched = _apply(t, spec, ins, False)
        t_ins = time.perf_counter() - t0
        peak = structure_bytes(t)
        if spec.validate:
            _validate_against(t, edges, spec.n, max(1000, spec.queries), rng)
        t0 = time.perf_counter()
        touched_del = _apply(t, spec, dels, True)
        t_del = time.perf_counter() - t0
        base = (spec.impl, spec.family_label, spec.n, spec.k, spec.threads, spec.seed)
        rows.append((*base, "insert", round(t_ins, 6), peak, touched))
        rows.append((*base, "delete", round(t_del, 6), peak, touched_del))
    return rows


def bench_queries(spec: WorkloadSpec) -> list[tuple]:
    """Time connectivity and path queries over random vertex pairs of a full tree."""
    spec.check()
    edges = generate(spec)
    t = make_structure(spec.impl, spec.n, edges)
    peak = structure_bytes(t)
    rows = []
    base = (spec.impl, spec.family_label, spec.n, spec.k, spec.threads, spec.seed)
    for rep in range(spec.reps):
        rng = make_rng(spec.seed * 1_000_003 + rep + 1)
        pairs = rng.integers(0, spec.n, size=(spec.queries, 2)).tolist()
        for phase, fn in (("connected", t.connected), ("path", t.path_query)):
            t0 = time.perf_counter()
            for u, v in pairs:
                fn(u, v)
            rows.append((*base, phase, round(time.perf_counter() - t0, 6), peak, 0))
        if spec.validate:
            _validate_against(t, edges, spec.n, max(1000, spec.queries), rng)
    return rows


def diameter_sweep(
    alphas: Sequence[float],
    n: int,
    seeds: Sequence[int],
    impl: str = "ufo",
) -> list[tuple]:
    """Total sequential update time on zipf trees of decreasing diameter."""
    rows = []
    for a in alphas:
        for s in seeds:
            spec = WorkloadSpec("zipf", n, seed=s, impl=impl, alpha=a)
            diam = tree_diameter(n, generate(spec))
            r = bench_updates(spec)
            wall = sum(row[7] for row in r)
            rows.append((impl, a, n, s, diam, round(wall, 6)))
    return rows


def memory_row(spec: WorkloadSpec) -> tuple:
    """Structure bytes after building the full tree."""
    spec.check()
    edges = generate(spec)
    t = make_structure(spec.impl, spec.n, edges)
    base = (spec.impl, spec.family_label, spec.n, spec.k, spec.threads, spec.seed)
    return (*base, "build", 0.0, structure_bytes(t), _touched(t))


def median_by(rows: Sequence[tuple], key: Callable[[tuple], tuple], value: int) -> dict:
    groups: dict[tuple, list] = {}
    for r in rows:
        groups.setdefault(key(r), []).append(r[value])
    return {k: statistics.median(v) for k, v in groups.items()}


def log_ratio_fit(points: Sequence[tuple[int, int, float]]) -> list[float]:
    """Per-point constants ``c = work / (k * log2(1 + n/k))``."""
    return [w / (k * math.log2(1 + n / k)) for n, k, w in points]
