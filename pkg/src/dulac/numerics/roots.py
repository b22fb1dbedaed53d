"""Real roots: exact isolation for polynomials, bracketing for functions."""

from __future__ import annotations

import functools
import math
import sys
from fractions import Fraction
from typing import Callable

from scipy import optimize

from .. import upoly
from ..expr import ExtExpr, Poly, parse

P6 = "4*b^6 - 12*b^5 - 4*b^4 + 28*b^3 + 56*b^2 - 72*b - 229"


class BracketError(ValueError):
    pass


def _dense(p) -> list[Fraction]:
    if isinstance(p, str):
        p = parse(p)
    if isinstance(p, ExtExpr):
        p = p.as_poly()
    if isinstance(p, Poly):
        vs = p.variables()
        if len(vs) > 1:
            raise ValueError(f"{p} is not univariate")
        return p.univariate(vs.pop()) if vs else upoly.trim([p.constant_value()] if p else [])
    return upoly.trim(p)  # dense list, lowest degree first


def isolate_real_roots(p) -> list[tuple[Fraction, Fraction]]:
    """Disjoint rational intervals, one real root each (Sturm and bisection)."""
    return upoly.isolate_real_roots(_dense(p))


def refine(p, interval, width=Fraction(1, 10**10)) -> tuple[Fraction, Fraction]:
    return upoly.refine_root(_dense(p), interval, Fraction(width))


def real_roots(p, width=Fraction(1, 10**10)) -> list[tuple[Fraction, Fraction]]:
    return upoly.real_roots(_dense(p), Fraction(width))


def midpoint(iv) -> float:
    return float((iv[0] + iv[1]) / 2)


def find_root(f: Callable[[float], float], bracket, tol: float = 1e-12) -> float:
    """Brent's method on ``bracket``; the endpoints must differ in sign."""
    a, b = float(bracket[0]), float(bracket[1])
    fa, fb = f(a), f(b)
    if fa == 0:
        return a
    if fb == 0:
        return b
    if math.isnan(fa) or math.isnan(fb) or (fa > 0) == (fb > 0):
        raise BracketError(f"no sign change on [{a}, {b}]: f={fa:.3g}, {fb:.3g}")
    return optimize.brentq(f, a, b, xtol=tol, rtol=4 * sys.float_info.epsilon, maxiter=500)


@functools.lru_cache(maxsize=None)
def p6_roots(width=Fraction(1, 10**12)) -> tuple[tuple[Fraction, Fraction], ...]:
    """Isolating intervals of the two real roots of the sextic defining b_."""
    return tuple(real_roots(P6, width))


def b_lower(width=Fraction(1, 10**12)) -> float:
    """The negative real root of the sextic, about -1.44."""
    return midpoint(min(p6_roots(Fraction(width))))


def b_upper(width=Fraction(1, 10**12)) -> float:
    return midpoint(max(p6_roots(Fraction(width))))


@functools.lru_cache(maxsize=None)
def b_star(quad_tol: float = 1e-10, tol: float = 1e-10) -> float:
    """Zero of ``Z`` on ``[0.5, 0.9]``."""
    from .quadrature import z_integral
    return find_root(lambda b: z_integral(b, quad_tol), (0.5, 0.9), tol)
