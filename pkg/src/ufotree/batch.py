"""Batch updates for topology trees and UFO trees.

A batch of k edge insertions and deletions is applied level by level:

1. deletions are removed at every level up front; insertions are placed at
   level 0 only and lifted one level per round ("pending" edges);
2. at level i the parents of changed clusters form the deletion candidates
   ``D[i+1]``.  Topology trees free all of them.  UFO trees free those of low
   degree and low fanout, and otherwise detach changed low-degree children;
3. parentless clusters at level i are matched: high-degree clusters absorb
   their degree-1 neighbours, then chains of degree-1/2 clusters are matched
   by alternating along each chain.

Decisions in step 2 only read the hierarchy, so they may be computed on a
thread pool; they are committed in a fixed order, which makes the result
independent of the thread count.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from typing import Iterable, Optional, Sequence

from ._core import Cluster, ContractionForest, UpdateStats
from .errors import CycleError, DegreeError, DuplicateEdge, MissingEdge

Update = tuple  # (u, v, delete_flag[, weight[, length]])

#: below this many candidates the thread pool is not worth its overhead
PARALLEL_CUTOFF = 256


def _normalize(updates: Iterable[Sequence]) -> list[tuple[int, int, bool, object, object]]:
    out = []
    for up in updates:
        u, v, d = up[0], up[1], up[2]
        w = up[3] if len(up) > 3 else None
        ln = up[4] if len(up) > 4 else None
        out.append((int(u), int(v), bool(d), w, ln))
    return out


def validate_batch(tree: ContractionForest, ups: list[tuple]) -> None:
    """Reject an invalid batch before touching the structure."""
    seen = set()
    deg_delta: dict[int, int] = {}
    for u, v, d, *_ in ups:
        tree._check_vertex(u)
        tree._check_vertex(v)
        if u == v:
            raise CycleError(f"batch rejected: self-loop at {u}")
        key = tree._key(u, v)
        if key in seen:
            raise DuplicateEdge(f"batch rejected: edge {key} updated twice")
        seen.add(key)
        present = key in tree.edges
        if d and not present:
            raise MissingEdge(f"batch rejected: edge {key} not present")
        if not d and present:
            raise DuplicateEdge(f"batch rejected: edge {key} already present")
        step = -1 if d else 1
        deg_delta[u] = deg_delta.get(u, 0) + step
        deg_delta[v] = deg_delta.get(v, 0) + step
    if tree.max_degree is not None:
        for x, dd in deg_delta.items():
            if tree.degree(x) + dd > tree.max_degree:
                raise DegreeError(f"batch rejected: vertex {x} would exceed degree {tree.max_degree}")
    # inserts must stay acyclic over the current components
    uf: dict[int, int] = {}

    def find(a: int) -> int:
        root = a
        while uf.get(root, root) != root:
            root = uf[root]
        while uf.get(a, a) != root:
            uf[a], a = root, uf[a]
        return root

    for u, v, d, *_ in ups:
        if d:
            continue
        a, b = find(tree.top(u).uid), find(tree.top(v).uid)
        if a == b:
            raise CycleError(f"batch rejected: inserting ({u}, {v}) closes a cycle")
        uf[a] = b


class _Batch:
    def __init__(self, tree: ContractionForest, threads: int) -> None:
        self.t = tree
        self.threads = max(1, int(threads))
        self.ufo = tree.kind == "ufo"
        self.D: list[dict[Cluster, list]] = []
        self.pending: list[list[tuple[Cluster, Cluster]]] = []
        self.pool: Optional[ThreadPoolExecutor] = None

    def _dset(self, level: int) -> dict[Cluster, list]:
        while len(self.D) <= level:
            self.D.append({})
        return self.D[level]

    def _mark_d(self, P: Cluster, child: Optional[Cluster] = None, center_lost: bool = False) -> None:
        entry = self._dset(P.level).setdefault(P, [[], False])
        if child is not None:
            entry[0].append(child)
        if center_lost:
            entry[1] = True

    def _pend(self, level: int) -> list:
        while len(self.pending) <= level:
            self.pending.append([])
        return self.pending[level]

    # -- step 2: deletion candidates ---------------------------------------------

    def _decide(self, item: tuple[Cluster, list]) -> tuple[Cluster, bool, list[Cluster]]:
        c, (changed, center_lost) = item
        if not c.alive:
            return c, False, []
        if not self.ufo:
            return c, True, []
        if len(c.nbrs) < 3 and len(c.children) < 3:
            return c, True, []
        detach = []
        high = []
        for x in dict.fromkeys(changed):
            if x.alive and x.parent is c:
                (detach if len(x.nbrs) <= 2 else high).append(x)
        # a leaf that gained several edges in this batch cannot stay beside the center
        for x in high:
            if not self._is_center(c, x, detach):
                detach.append(x)
        remaining = len(c.children) - len(detach)
        if center_lost and remaining >= 2:
            return c, True, detach
        return c, not self.t._valid_after(c, detach), detach

    @staticmethod
    def _is_center(P: Cluster, x: Cluster, gone: list[Cluster]) -> bool:
        """Whether high-degree child x can remain in P once ``gone`` leave."""
        rest = len(P.children) - len(gone)
        if rest == 1:
            return True
        if rest == 2:
            z = next(c for c in P.children if c is not x and c not in gone)
            return len(z.nbrs) == 1 and z in x.nbrs
        sibs = 0
        for d in x.nbrs:
            if d.parent is P and d not in gone:
                sibs += 1
                if sibs == 2:
                    return True
        return False

    def _sibs(self, c: Cluster) -> int:
        P = c.parent
        return sum(1 for d in c.nbrs if d.parent is P)

    def _free(self, c: Cluster) -> None:
        P = c.parent
        if P is not None:
            self._mark_d(P, center_lost=self._sibs(c) >= 2)
        self.t._free(c)

    def _process_d(self, level: int) -> None:
        t = self.t
        items = list(self._dset(level).items())
        if not items:
            return
        if self.pool is not None and len(items) >= PARALLEL_CUTOFF:
            chunk = max(1, len(items) // (4 * self.threads))
            decisions = list(self.pool.map(self._decide, items, chunksize=chunk))
        else:
            decisions = [self._decide(it) for it in items]
        for c, kill, detach in decisions:
            if not c.alive:
                continue
            if kill:
                if self.ufo and t._is_high_residue(c, detach):
                    t.stats.high_frees += 1
                self._free(c)
                continue
            for x in detach:
                if x.alive and x.parent is c:
                    t._clear_parent(x)
                    t._note_root(x)
            t._note_root(c)

    # -- step 3: matching -------------------------------------------------------------

    def _join(self, x: Cluster, Q: Cluster) -> None:
        self.t._set_parent(x, Q)
        self.t._note_root(Q)

    def _absorb(self, roots: list[Cluster], level: int) -> None:
        t = self.t
        for x in roots:
            if x.parent is not None or len(x.nbrs) < 3:
                continue
            P = t._new_cluster(level + 1)
            t._set_parent(x, P)
            for y in list(x.nbrs):
                if len(y.nbrs) != 1 or y.parent is P:
                    continue
                if y.parent is not None:
                    self._free(y.parent)
                t._set_parent(y, P)
        for x in roots:
            if x.parent is None and len(x.nbrs) == 1:
                y = next(iter(x.nbrs))
                if len(y.nbrs) >= 3 and y.parent is not None:
                    self._join(x, y.parent)

    def _topo_pairs3(self, roots: list[Cluster], level: int) -> None:
        t = self.t
        for x in roots:
            if x.parent is not None or len(x.nbrs) != 3:
                continue
            for y in x.nbrs:
                if len(y.nbrs) != 1:
                    continue
                Q = y.parent
                if Q is None:
                    P = t._new_cluster(level + 1)
                    t._set_parent(x, P)
                    t._set_parent(y, P)
                    break
                if len(Q.children) == 1:
                    if Q.parent is not None:
                        self._mark_d(Q.parent, Q)
                    self._join(x, Q)
                    break
        for x in roots:
            if x.parent is None and len(x.nbrs) == 1:
                y = next(iter(x.nbrs))
                Q = y.parent
                if len(y.nbrs) == 3 and Q is not None and len(Q.children) == 1:
                    if Q.parent is not None:
                        self._mark_d(Q.parent, Q)
                    self._join(x, Q)

    def _chains(self, roots: list[Cluster], level: int) -> None:
        """Alternate matching along chains of degree-1/2 clusters."""
        t = self.t
        elig: dict[Cluster, list[Cluster]] = {}
        for x in roots:
            if x.parent is None and 1 <= len(x.nbrs) <= 2:
                elig[x] = []
        for x in list(elig):
            for y in x.nbrs:
                if y in elig and y.parent is None:
                    elig[x].append(y)
                elif (
                    y.parent is not None
                    and len(y.nbrs) <= 2
                    and len(y.parent.children) == 1
                ):
                    elig[x].append(y)
                    elig.setdefault(y, []).append(x)
        seen: set[Cluster] = set()
        for s in elig:
            if s in seen or len(elig[s]) > 1:
                continue
            # walk to the far endpoint so each chain starts at its smaller uid
            seq = [s]
            seen.add(s)
            prev, cur = None, s
            while True:
                nxt = [z for z in elig[cur] if z is not prev]
                if not nxt:
                    break
                prev, cur = cur, nxt[0]
                seq.append(cur)
                seen.add(cur)
            if seq[-1].uid < seq[0].uid:
                seq.reverse()
            for a, b in zip(seq[0::2], seq[1::2]):
                if a.parent is None and b.parent is None:
                    P = t._new_cluster(level + 1)
                    t._set_parent(a, P)
                    t._set_parent(b, P)
                else:
                    root, other = (a, b) if a.parent is None else (b, a)
                    Q = other.parent
                    if Q.parent is not None:
                        self._mark_d(Q.parent, Q)
                    self._join(root, Q)

    def _match(self, level: int) -> None:
        t = self.t
        lst = t._rootlist[level] if level < len(t._rootlist) else []
        roots = [x for x in lst if x.alive and x.parent is None]
        if self.ufo:
            self._absorb(roots, level)
        else:
            self._topo_pairs3(roots, level)
        self._chains(roots, level)
        for x in roots:
            if x.parent is None and x.nbrs:
                t._set_parent(x, t._new_cluster(level + 1))

    # -- step 4: lift pending insertions ----------------------------------------------

    def _lift(self, level: int) -> None:
        t = self.t
        if level >= len(self.pending):
            return
        nxt = None
        for A, B in self.pending[level]:
            if not (A.alive and B.alive) or B not in A.nbrs:
                continue
            PA, PB = A.parent, B.parent
            if PA is None or PB is None or PA is PB or PB in PA.nbrs:
                continue
            t._link_once(PA, PB, A.nbrs[B], B.nbrs[A])
            t._note_root(PA)
            t._note_root(PB)
            if nxt is None:
                nxt = self._pend(level + 1)
            nxt.append((PA, PB))
        self.pending[level] = []

    # -- driver ---------------------------------------------------------------------------

    def run(self, ups: list[tuple]) -> UpdateStats:
        t = self.t
        t._begin()
        for u, v, d, w, ln in ups:
            lu, lv = t.leaves[u], t.leaves[v]
            t._note_root(lu)
            t._note_root(lv)
            if d:
                del t.edges[t._key(u, v)]
                t._unlink_at(lu, lv)
            else:
                euv, evu = t._make_edge(u, v, w, ln)
                t.edges[t._key(u, v)] = (euv, evu) if u < v else (evu, euv)
                t._link_once(lu, lv, euv, evu)
                self._pend(0).append((lu, lv))
        if self.threads > 1:
            self.pool = ThreadPoolExecutor(max_workers=self.threads)
        stats = t.stats
        try:
            level = 0
            while level < max(len(t._rootlist), len(self.D) - 1, len(self.pending)):
                lst = t._rootlist[level] if level < len(t._rootlist) else []
                for x in lst:
                    if x.alive and x.parent is not None:
                        self._mark_d(x.parent, x)
                UpdateStats._bump(stats.dsets, level + 1, len(self._dset(level + 1)))
                self._process_d(level + 1)
                live = [x for x in lst if x.alive and x.parent is None]
                UpdateStats._bump(stats.roots, level, len(live))
                UpdateStats._bump(stats.root_degree_sum, level, sum(len(x.nbrs) for x in live))
                for x in live:
                    stats.max_root_degree = max(stats.max_root_degree, len(x.nbrs))
                self._match(level)
                self._lift(level)
                level += 1
        finally:
            if self.pool is not None:
                self.pool.shutdown()
        t._finish()
        return stats


def batch_update(tree: ContractionForest, updates: Iterable[Sequence], threads: int = 1) -> UpdateStats:
    """Apply a batch of ``(u, v, delete_flag[, weight[, length]])`` updates atomically."""
    ups = _normalize(updates)
    validate_batch(tree, ups)
    if not ups:
        return UpdateStats()
    return _Batch(tree, threads).run(ups)


def topo_batch_update(t, updates, threads: int = 1) -> UpdateStats:
    return batch_update(t, updates, threads)


def ufo_batch_update(t, updates, threads: int = 1) -> UpdateStats:
    return batch_update(t, updates, threads)


def work_meter(stats: UpdateStats) -> dict:
    """Touched-cluster counts of one update or batch, per level and in total."""
    return {
        "touched_clusters_per_level": list(stats.touched),
        "total_touched": stats.total_touched,
        "created": stats.created,
        "deleted_per_level": list(stats.deletions),
        "roots_per_level": list(stats.roots),
    }
