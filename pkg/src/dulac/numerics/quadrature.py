"""Melnikov line integrals over level curves and the Z(b) integral."""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

from scipy import integrate, optimize

from .. import upoly
from ..expr import ExtExpr, as_fraction, parse


class DomainError(ValueError):
    pass


@dataclass(frozen=True)
class MelnikovProblem:
    """Perturbed Hamiltonian ``x' = H_y + eps R``, ``y' = -H_x + eps S``.

    Ovals are the level sets ``H = h`` for ``h`` in ``(h0, h1)``; they must be
    star-shaped around ``center``.  ``h0`` defaults to ``H(center)``.
    """

    H: ExtExpr
    R: ExtExpr
    S: ExtExpr
    center: tuple = (0.0, 0.0)
    h_range: tuple | None = None

    def __post_init__(self):
        for name in ("H", "R", "S"):
            v = getattr(self, name)
            object.__setattr__(self, name, parse(v) if isinstance(v, str) else ExtExpr.coerce(v))

    @property
    def levels(self) -> tuple[float, float]:
        if self.h_range is not None:
            return float(self.h_range[0]), float(self.h_range[1])
        return float(self.H.evaluate(*self.center)), math.inf

    def unperturbed(self):
        from ..field import VectorField
        return VectorField(self.H.diff("y"), -self.H.diff("x"))


def vil_problem(m: int) -> MelnikovProblem:
    """``H = x^2 + y^2`` perturbed by ``R = -|y|^m (x^3 - x)``, ``S = 0``."""
    R = -(ExtExpr.abs_y(m) * parse("x^3 - x"))
    return MelnikovProblem(parse("x^2 + y^2"), R, ExtExpr.coerce(0))


def _is_round(H: ExtExpr, center) -> bool:
    return tuple(center) == (0.0, 0.0) and H == parse("x^2 + y^2")


def _radius_fn(p: MelnikovProblem, h: float):
    H = p.H.lambdify()
    cx, cy = p.center
    h0 = H(cx, cy)

    def rho(th: float) -> float:
        c, s = math.cos(th), math.sin(th)
        g = lambda r: H(cx + r * c, cy + r * s) - h  # noqa: E731
        hi = 1.0
        while (g(hi) - 0.0) * (h0 - h) > 0:
            hi *= 2.0
            if hi > 1e8:
                raise DomainError(f"level {h} is not a closed curve around {p.center}")
        return optimize.brentq(g, 0.0, hi, xtol=1e-15, rtol=1e-15)
    return rho


def melnikov(p: MelnikovProblem, h: float, tol: float = 1e-10) -> float:
    """``M(h) = oint_{H=h} S dx - R dy`` taken counterclockwise."""
    h0, h1 = p.levels
    if not h0 < h < h1:
        raise DomainError(f"h={h} outside the oval range ({h0}, {h1})")
    if p.R.is_identically_zero() and p.S.is_identically_zero():
        return 0.0
    R, S = p.R.lambdify(), p.S.lambdify()
    cx, cy = p.center
    if _is_round(p.H, p.center):
        r = math.sqrt(h)

        def integrand(th):
            c, s = math.cos(th), math.sin(th)
            x, y = r * c, r * s
            return S(x, y) * (-r * s) - R(x, y) * (r * c)
    else:
        rho = _radius_fn(p, h)
        Hx, Hy = p.H.diff("x").lambdify(), p.H.diff("y").lambdify()

        def integrand(th):
            c, s = math.cos(th), math.sin(th)
            r = rho(th)
            x, y = cx + r * c, cy + r * s
            hx, hy = Hx(x, y), Hy(x, y)
            dr = -r * (-hx * s + hy * c) / (hx * c + hy * s)
            dx, dy = dr * c - r * s, dr * s + r * c
            return S(x, y) * dx - R(x, y) * dy

    # split at the axes: |y|^m terms are only finitely smooth there
    total = 0.0
    for k in range(4):
        val, _ = integrate.quad(integrand, k * math.pi / 2, (k + 1) * math.pi / 2, epsabs=tol / 4, epsrel=0,
                                limit=200)
        total += val
    return total


def melnikov_closed_form(m: int, r: float) -> float:
    """``(sqrt(pi)/2) G((m+1)/2) / G((m+6)/2) r^(m+2) (3r^2 - (m+4))``."""
    if m < 0 or r <= 0:
        raise ValueError("need m >= 0 and r > 0")
    g = math.exp(math.lgamma((m + 1) / 2) - math.lgamma((m + 6) / 2))
    return math.sqrt(math.pi) / 2 * g * r ** (m + 2) * (3 * r * r - (m + 4))


def melnikov_zero(m: int) -> float:
    return math.sqrt((m + 4) / 3)


def z_denominator(b) -> list[Fraction]:
    """``x^8 - (2b+1)x^6 + (b+2)b x^4 - b^2 x^2 + 1`` as exact coefficients."""
    b = as_fraction(b)
    return [Fraction(1), 0, -b * b, 0, (b + 2) * b, 0, -(2 * b + 1), 0, Fraction(1)]


def z_domain_ok(b) -> bool:
    """True when the denominator has no root on ``[0, 1]`` (exact Sturm count)."""
    d = upoly.trim(z_denominator(b))
    return upoly.evaluate(d, 0) != 0 and upoly.count_roots(d, Fraction(0), Fraction(1)) == 0


def z_integral(b: float, quad_tol: float = 1e-8) -> float:
    """``Z(b)`` after the substitution ``x = sin t`` on ``[0, pi/2]``."""
    if not z_domain_ok(b):
        raise DomainError(f"denominator of Z vanishes on [0, 1] at b={b}")
    b = float(b)

    def f(t):
        x = math.sin(t)
        x2 = x * x
        den = (((x2 - (2 * b + 1)) * x2 + (b + 2) * b) * x2 - b * b) * x2 + 1
        c = math.cos(t)
        return 8 * (b - 3 * x2) * c * c / den

    val, _ = integrate.quad(f, 0.0, math.pi / 2, epsabs=quad_tol, epsrel=0, limit=400)
    return val

