"""Weight-biased child sets.

A rank tree stores weighted items at its leaves so that an item of weight
``w`` sits at depth at most ``log2(W / w) + 2`` in a tree of total weight
``W``.  Leaves get rank ``floor(log2 w)``; equal-rank roots are paired like a
binary counter, and the surviving roots (distinct ranks) are chained into a
spine in increasing rank order.  Every node carries the monoid aggregate of
its leaves.
"""

from __future__ import annotations

from typing import Any, Callable, Generic, Optional, TypeVar

T = TypeVar("T")


class RankNode:
    __slots__ = ("rank", "agg", "left", "right", "parent", "item", "spine")

    def __init__(self, rank: int, agg: Any, item: Any = None) -> None:
        self.rank = rank
        self.agg = agg
        self.left: Optional[RankNode] = None
        self.right: Optional[RankNode] = None
        self.parent: Optional[RankNode] = None
        self.item = item
        self.spine = False

    @property
    def is_leaf(self) -> bool:
        return self.left is None


class RankTree(Generic[T]):
    """Multiset of items under an associative, commutative ``combine``."""

    __slots__ = ("combine", "identity", "roots", "top", "size", "weight")

    def __init__(self, combine: Callable[[Any, Any], Any], identity: Any) -> None:
        self.combine = combine
        self.identity = identity
        self.roots: dict[int, RankNode] = {}
        self.top: Optional[RankNode] = None
        self.size = 0
        self.weight = 0

    def __len__(self) -> int:
        return self.size

    def _pair(self, a: RankNode, b: RankNode, rank: int, spine: bool) -> RankNode:
        node = RankNode(rank, self.combine(a.agg, b.agg))
        node.left, node.right = a, b
        a.parent = b.parent = node
        node.spine = spine
        return node

    def _carry(self, node: RankNode) -> None:
        r = node.rank
        while r in self.roots:
            other = self.roots.pop(r)
            node = self._pair(other, node, r + 1, False)
            r += 1
        node.parent = None
        self.roots[r] = node

    def _rebuild_spine(self) -> None:
        if self.top is not None and self.top.spine:
            # unlink the previous spine; its nodes are discarded
            stack = [self.top]
            while stack:
                s = stack.pop()
                for c in (s.left, s.right):
                    if c.spine:
                        stack.append(c)
                    elif c.parent is s:
                        c.parent = None
        acc: Optional[RankNode] = None
        for r in sorted(self.roots):
            node = self.roots[r]
            node.parent = None
            acc = node if acc is None else self._pair(acc, node, r, True)
        self.top = acc

    def insert(self, item: T, value: Any, weight: int) -> RankNode:
        rank = max(int(weight), 1).bit_length() - 1
        leaf = RankNode(rank, value, item)
        self._carry(leaf)
        self._rebuild_spine()
        self.size += 1
        self.weight += weight
        return leaf

    def delete(self, leaf: RankNode, weight: int) -> None:
        # dismantle the path from the leaf to its pairing root
        freed = []
        x = leaf
        while x.parent is not None and not x.parent.spine:
            p = x.parent
            freed.append(p.right if p.left is x else p.left)
            x = p
        if self.roots.get(x.rank) is x:
            del self.roots[x.rank]
        else:  # pragma: no cover - structural corruption
            raise AssertionError("rank tree root table out of sync")
        x.parent = None
        leaf.parent = None
        for s in freed:
            s.parent = None
            self._carry(s)
        self._rebuild_spine()
        self.size -= 1
        self.weight -= weight

    def total(self) -> Any:
        return self.identity if self.top is None else self.top.agg

    def fold_excluding(self, leaf: RankNode) -> Any:
        acc = self.identity
        x = leaf
        while x.parent is not None:
            p = x.parent
            acc = self.combine(acc, (p.right if p.left is x else p.left).agg)
            x = p
        return acc

    def depth(self, leaf: RankNode) -> int:
        d = 0
        while leaf.parent is not None:
            leaf = leaf.parent
            d += 1
        return d

    def leaves(self) -> list[RankNode]:
        out = []
        stack = [self.top] if self.top is not None else []
        while stack:
            x = stack.pop()
            if x.is_leaf:
                out.append(x)
            else:
                stack.append(x.right)
                stack.append(x.left)
        return out

    def node_count(self) -> int:
        count = 0
        stack = [self.top] if self.top is not None else []
        while stack:
            x = stack.pop()
            count += 1
            if not x.is_leaf:
                stack.append(x.left)
                stack.append(x.right)
        return count

    def check(self) -> None:
        """Assert that every internal aggregate equals the fold over its span."""

        def walk(x: RankNode) -> Any:
            if x.is_leaf:
                return x.agg
            assert x.left.parent is x and x.right.parent is x
            expect = self.combine(walk(x.left), walk(x.right))
            assert x.agg == expect, (x.agg, expect)
            return x.agg

        if self.top is not None:
            assert self.top.parent is None
            walk(self.top)
        assert len(self.leaves()) == self.size
