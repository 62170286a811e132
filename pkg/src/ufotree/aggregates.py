"""Aggregate definitions for path and subtree queries.

An :class:`AggregateSpec` bundles an associative and commutative combining
function with its identity and, optionally, an inverse.  Path queries combine
edge values; subtree queries combine vertex values.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Any, Callable, Mapping, Optional

Value = Any


@dataclass(frozen=True)
class AggregateSpec:
    combine: Callable[[Value, Value], Value]
    identity: Value
    inverse: Optional[Callable[[Value, Value], Value]] = None
    vertex_values: Optional[Mapping[int, Value]] = field(default=None, compare=False)
    name: str = "custom"
    #: Value a ternarization fake edge carries.  Defaults to the identity.
    bottom: Value = None
    #: True when values are numbers combined by addition, so they can double as lengths.
    additive: bool = False

    @property
    def invertible(self) -> bool:
        return self.inverse is not None

    @property
    def fake_value(self) -> Value:
        return self.identity if self.bottom is None else self.bottom

    def vertex_value(self, v: int) -> Value:
        if self.vertex_values is None:
            return self.identity
        return self.vertex_values.get(v, self.identity)

    def fold(self, values) -> Value:
        acc = self.identity
        for x in values:
            acc = self.combine(acc, x)
        return acc

    def with_vertex_values(self, values: Mapping[int, Value]) -> "AggregateSpec":
        return AggregateSpec(
            self.combine, self.identity, self.inverse, values, self.name, self.bottom, self.additive
        )


def _add(a, b):
    return a + b


def _sub(a, b):
    return a - b


SUM = AggregateSpec(_add, 0, _sub, name="sum", additive=True)
MAX = AggregateSpec(max, -math.inf, None, name="max")
MIN = AggregateSpec(min, math.inf, None, name="min")


def product(*specs: AggregateSpec) -> AggregateSpec:
    """Componentwise aggregate over tuples, e.g. ``product(SUM, MAX)``.

    The product is invertible only when every factor is.
    """
    combines = tuple(s.combine for s in specs)
    identity = tuple(s.identity for s in specs)
    inverse = None
    if all(s.invertible for s in specs):
        inverses = tuple(s.inverse for s in specs)

        def inverse(a, b):
            return tuple(f(x, y) for f, x, y in zip(inverses, a, b))

    def combine(a, b):
        return tuple(f(x, y) for f, x, y in zip(combines, a, b))

    name = "x".join(s.name for s in specs)
    return AggregateSpec(combine, identity, inverse, name=name)


def lift_value(spec: AggregateSpec, raw: Value) -> Value:
    """Map a raw numeric weight into the value domain of ``spec``.

    Product specs receive the same weight in every component.
    """
    if isinstance(spec.identity, tuple):
        return tuple(raw for _ in spec.identity)
    return raw
