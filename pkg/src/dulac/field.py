"""Planar vector fields ``x' = P(x, y), y' = Q(x, y)``."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import Mapping

from .expr import ExtExpr, as_fraction, compile_functions


def smoothness_label(k: float) -> str:
    return "Cinf" if k == math.inf else f"C{int(k)}"


@dataclass(frozen=True)
class VectorField:
    P: ExtExpr
    Q: ExtExpr
    params: tuple = ()  # ((name, Fraction), ...) already substituted
    name: str = ""

    def __post_init__(self):
        object.__setattr__(self, "P", ExtExpr.coerce(self.P))
        object.__setattr__(self, "Q", ExtExpr.coerce(self.Q))

    @property
    def smoothness(self) -> float:
        return min(self.P.smoothness(), self.Q.smoothness())

    @property
    def smoothness_class(self) -> str:
        return smoothness_label(self.smoothness)

    def require(self, k: int, what: str = "operation"):
        if self.smoothness < k:
            raise ValueError(f"{what} needs a C{k} field; this one is {self.smoothness_class}")

    def free_params(self) -> set[str]:
        return self.P.params() | self.Q.params()

    def is_polynomial(self) -> bool:
        return self.P.is_polynomial() and self.Q.is_polynomial()

    def has_abs(self) -> bool:
        return self.P.has_abs() or self.Q.has_abs()

    def subs(self, bindings: Mapping[str, object]) -> "VectorField":
        vals = tuple(sorted((k, as_fraction(v)) for k, v in bindings.items()))
        return VectorField(self.P.subs(bindings), self.Q.subs(bindings), self.params + vals, self.name)

    def branch(self, sign: int) -> "VectorField":
        return VectorField(self.P.branch(sign), self.Q.branch(sign), self.params, self.name)

    def divergence(self) -> ExtExpr:
        return self.P.diff("x") + self.Q.diff("y")

    def orbital_derivative(self, f: ExtExpr) -> ExtExpr:
        f = ExtExpr.coerce(f)
        return f.diff("x") * self.P + f.diff("y") * self.Q

    @cached_property
    def rhs(self):
        """Float callable ``(x, y) -> (P, Q)``."""
        return compile_functions([self.P, self.Q])

    @cached_property
    def rhs_vectorized(self):
        return compile_functions([self.P, self.Q], vectorized=True)

    def param_dict(self) -> dict:
        return {k: v for k, v in self.params}
