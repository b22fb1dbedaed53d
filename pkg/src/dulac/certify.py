"""Sign certificates for extended expressions.

``certify_sign`` runs a fixed, ordered portfolio of exact strategies and
records every step in the verdict trace.  Only the final sampling fallback
uses floating point, and it can never return a certificate: it yields
``Indefinite`` (with two witness points) or ``Unknown``.
"""

from __future__ import annotations

import enum
import itertools
import math
import random
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence, Union

import numpy as np

from . import upoly
from .expr import STATE_VARS, ExtExpr, Poly, as_fraction

Box = tuple  # (xmin, xmax, ymin, ymax)
Region = Union[str, Box]

DEFAULT_SAMPLE_BOX = (-10, 10, -10, 10)


class Sign(str, enum.Enum):
    NONNEGATIVE = "NonNegative"
    NONPOSITIVE = "NonPositive"
    ZERO = "IdenticallyZero"
    INDEFINITE = "Indefinite"
    UNKNOWN = "Unknown"


class ParametricInputError(ValueError):
    """Expression still contains unbound parameters."""


@dataclass(frozen=True)
class SignVerdict:
    sign: Sign
    vanishing_set: str  # "null-measure" | "positive-measure" | "unknown"
    trace: tuple[str, ...] = ()
    witnesses: tuple | None = None  # ((x+, y+), (x-, y-)) for Indefinite

    @property
    def definite(self) -> bool:
        return self.sign in (Sign.NONNEGATIVE, Sign.NONPOSITIVE)

    @property
    def certified(self) -> bool:
        return self.definite and self.vanishing_set == "null-measure"

    @property
    def sign_value(self) -> int:
        return {Sign.NONNEGATIVE: 1, Sign.NONPOSITIVE: -1}.get(self.sign, 0)

    def to_dict(self) -> dict:
        return {
            "sign": self.sign.value,
            "vanishing_set": self.vanishing_set,
            "trace": list(self.trace),
            "witnesses": None
            if self.witnesses is None
            else [[_num(v) for v in p] for p in self.witnesses],
        }


def _num(v):
    if isinstance(v, Fraction):
        return int(v) if v.denominator == 1 else str(v)
    return float(v)


@dataclass(frozen=True)
class TrinomialQuery:
    """``z**m + b*z + c`` on ``z >= 0``."""

    m: int
    b: object
    c: object

    def __post_init__(self):
        if self.m < 2:
            raise ValueError("trinomial degree m must be >= 2")


@dataclass(frozen=True)
class ParametricVerdict:
    """``sign(e) = sign(param_factor) * verdict.sign`` for every parameter value."""

    param_factor: Poly
    verdict: SignVerdict


# --------------------------------------------------------------------------
# closed-form criteria
# --------------------------------------------------------------------------


def trinomial_nonneg(q: TrinomialQuery) -> bool:
    """Exact test of ``z^m + b z + c >= 0`` for all ``z >= 0``.

    For ``b < 0`` the minimum sits at ``z0 = (-b/m)^(1/(m-1))`` and the
    condition reduces to ``(-b)^m (m-1)^(m-1) <= m^m c^(m-1)``, compared in
    exact rational arithmetic.
    """
    m = q.m
    b, c = as_fraction(q.b), as_fraction(q.c)
    if c < 0:
        raise ValueError("trinomial query requires c >= 0")
    if b >= 0:
        return True
    return (-b) ** m * (m - 1) ** (m - 1) <= Fraction(m) ** m * c ** (m - 1)


def lambda_threshold_squared(m: int) -> Fraction:
    """Exact square of the no-cycle threshold, ``(9/2) (3/m)^m``."""
    if m < 2:
        raise ValueError("threshold defined for m >= 2")
    return Fraction(9, 2) * Fraction(3, m) ** m


def lambda_threshold(m: int) -> float:
    """``3/sqrt(2) * (3/m)^(m/2)``: no limit cycles for ``|lambda|`` at or above it."""
    if m < 2:
        raise ValueError("threshold defined for m >= 2")
    return 3 / math.sqrt(2) * (3 / m) ** (m / 2)


def _dense(p) -> list[Fraction]:
    if isinstance(p, ExtExpr):
        p = p.as_poly()
    if isinstance(p, Poly):
        vs = p.variables()
        if len(vs) > 1:
            raise ValueError(f"{p} is not univariate")
        return p.univariate(vs.pop()) if vs else ([p.constant_value()] if p else [])
    return upoly.trim(p)


def descartes_positive_roots(p) -> int:
    """Sign changes in the coefficient sequence (upper bound on positive roots)."""
    return upoly.positive_roots_upper_bound(_dense(p))


def _domain_bounds(domain) -> tuple:
    if domain in ("R", "plane", None):
        return -math.inf, math.inf
    if domain in ("halfline", "[0,inf)", "nonneg"):
        return Fraction(0), math.inf
    lo, hi = domain
    return (lo if lo in (-math.inf,) else as_fraction(lo), hi if hi in (math.inf,) else as_fraction(hi))


def sturm_nonneg(p, domain="R") -> bool:
    """Exact decision of ``p >= 0`` on ``R``, ``[0, inf)`` or a closed interval."""
    lo, hi = _domain_bounds(domain)
    return upoly.nonneg_on(_dense(p), lo, hi)


# --------------------------------------------------------------------------
# strategy portfolio
# --------------------------------------------------------------------------


def _var_domain(var: str, region: Region):
    if isinstance(region, tuple):
        lo, hi = (region[0], region[1]) if var == "x" else (region[2], region[3])
        return as_fraction(lo), as_fraction(hi)
    if region == "halfplane" and var == "y":
        return Fraction(0), math.inf
    return -math.inf, math.inf


def _trinomial_shape(coeffs: list[Fraction]):
    """Match ``a v^(2m) + b v^2 + c`` (m >= 2); return (m, a, b, c) or None."""
    support = [k for k, c in enumerate(coeffs) if c]
    if not support or any(k % 2 for k in support):
        return None
    top = support[-1]
    if top < 4 or not set(support) <= {0, 2, top}:
        return None
    return top // 2, coeffs[top], coeffs[2], coeffs[0]


def _univariate_sign(p: Poly, var: str, region: Region, trace: list[str]):
    """Sign class of a univariate factor: +1, -1, 0 (changes sign) or None."""
    coeffs = p.univariate(var)
    lo, hi = _var_domain(var, region)
    shape = _trinomial_shape(coeffs) if not isinstance(region, tuple) else None
    if shape is not None:
        m, a, b, c = shape
        s = 1 if a > 0 else -1
        bb, cc = b / a, c / a
        if cc < 0:
            trace.append(f"trinomial z^{m}{bb:+}z{cc:+} with z={var}^2: negative at z=0")
            return 0
        ok = trinomial_nonneg(TrinomialQuery(m, bb, cc))
        trace.append(
            f"trinomial z^{m} + ({bb})z + ({cc}) with z={var}^2: "
            f"{'>= 0' if ok else 'negative somewhere'} on z>=0 (closed-form criterion)"
        )
        return s if ok else 0
    if upoly.nonneg_on(coeffs, lo, hi):
        trace.append(f"Sturm: {p} >= 0 for {var} in {_fmt_dom(lo, hi)}")
        return 1
    if upoly.nonneg_on(upoly.neg(coeffs), lo, hi):
        trace.append(f"Sturm: {p} <= 0 for {var} in {_fmt_dom(lo, hi)}")
        return -1
    trace.append(f"Sturm: {p} changes sign for {var} in {_fmt_dom(lo, hi)}")
    return 0


def _fmt_dom(lo, hi) -> str:
    f = lambda v: "-inf" if v == -math.inf else ("inf" if v == math.inf else str(v))  # noqa: E731
    return f"[{f(lo)}, {f(hi)}]"


def _quadratic_sign(p: Poly, var: str, region: Region, trace: list[str]):
    """Factor of degree <= 2 in ``var``: leading coefficient + discriminant test."""
    other = "x" if var == "y" else "y"
    cs = p.coeffs_in(var)
    alpha, beta, gamma = cs.get(2, Poly()), cs.get(1, Poly()), cs.get(0, Poly())
    plane = region == "plane"
    if not alpha:
        if beta and plane:
            trace.append(f"linear in {var} with nonzero slope {beta}: changes sign")
            return 0
        return None
    a = alpha.univariate(other) if alpha.variables() else [alpha.constant_value()]
    disc = beta * beta - alpha * gamma * 4
    d = disc.univariate(other) if disc.variables() else ([disc.constant_value()] if disc else [])
    if upoly.nonneg_on(a):
        s = 1
    elif upoly.nonneg_on(upoly.neg(a)):
        s = -1
    else:
        if plane:
            trace.append(f"quadratic in {var}: leading coefficient {alpha} changes sign")
            return 0
        return None
    if upoly.nonneg_on(upoly.neg(d)):
        trace.append(
            f"quadratic in {var}: leading coefficient {alpha} {'>=' if s > 0 else '<='} 0 "
            f"and discriminant {disc} <= 0 (Sturm)"
        )
        return s
    if plane:
        trace.append(f"quadratic in {var}: discriminant {disc} positive somewhere, real roots in {var}")
        return 0
    return None


def _separable_sign(p: Poly, region: Region, trace: list[str]):
    """``a(x) + b(y)`` with both parts of the same sign."""
    ax, by, const = Poly(), Poly(), Fraction(0)
    for m, c in p.terms.items():
        vs = {v for v, _ in m}
        if not vs:
            const += c
        elif vs == {"x"}:
            ax = ax + Poly({m: c})
        elif vs == {"y"}:
            by = by + Poly({m: c})
        else:
            return None
    if not ax or not by:
        return None
    ax = ax + const
    sub: list[str] = []
    sa = _univariate_sign(ax, "x", region, sub)
    sb = _univariate_sign(by, "y", region, sub)
    if sa and sa == sb:
        trace.append(f"separable sum a(x) + b(y), a = {ax}, b = {by}, same sign")
        trace.extend("  " + t for t in sub)
        return sa
    return None


def _even_monomial_sign(p: Poly, trace: list[str]):
    """Every monomial an even power and every coefficient of one sign."""
    if not all(e % 2 == 0 for m in p.terms for _, e in m):
        return None
    signs = {c > 0 for c in p.terms.values()}
    if len(signs) != 1:
        return None
    s = 1 if signs.pop() else -1
    trace.append(f"even monomials, coefficients of one sign: {p} {'>=' if s > 0 else '<='} 0")
    return s


def _factor_sign(f: Poly, region: Region, trace: list[str]):
    s = _even_monomial_sign(f, trace)
    if s is not None:
        return s
    vs = f.variables()
    if len(vs) == 1:
        return _univariate_sign(f, vs.pop(), region, trace)
    for var in ("y", "x"):
        if f.degree(var) <= 2:
            s = _quadratic_sign(f, var, region, trace)
            if s is not None:
                return s
    return _separable_sign(f, region, trace)


def _factor_list(c: Poly) -> tuple[Fraction, list[tuple[Poly, int]]]:
    import sympy

    gens = [sympy.Symbol(v) for v in sorted(c.variables())]
    coeff, factors = sympy.factor_list(c.to_sympy(), *gens)
    out = [(Poly.from_sympy(f), int(k)) for f, k in factors]
    r = sympy.Rational(coeff)
    const = Fraction(int(r.p), int(r.q))
    # normalise so that each factor has a positive leading coefficient
    fixed = []
    for f, k in out:
        if f.leading_term()[1] < 0:
            f = -f
            if k % 2:
                const = -const
        fixed.append((f, k))
    return const, fixed


def factor(c: Poly) -> tuple[Fraction, list[tuple[Poly, int]]]:
    """Irreducible factorisation over Q (backed by sympy)."""
    if not c:
        raise ValueError("cannot factor the zero polynomial")
    if c.is_constant():
        return c.constant_value(), []
    return _factor_list(c)


def _null_zero_set(e: ExtExpr) -> bool:
    if not e.has_abs():
        return not e.is_zero()
    return not e.branch(1).is_zero() and not e.branch(-1).is_zero()


def _strip_positive(e: ExtExpr, trace: list[str]):
    """Single-key expressions ``c * |y|^a * exp(q)``: return ``(c, has_abs)``."""
    (a, q), c = next(iter(e.grouped.items()))
    if q:
        trace.append(f"strip exp({q}) > 0")
    if a:
        trace.append("strip |y| (> 0 off the null set y = 0)")
    return c, bool(a)


def _candidate_points(region: Region, need_y_nonzero: bool, seed: int):
    vals = [Fraction(0)]
    for k in (1, 2, 3):
        vals += [Fraction(k), Fraction(-k)]
    vals += [Fraction(s, d) for d in (2, 4, 10) for s in (1, -1, 3, -3)]
    if isinstance(region, tuple):
        xmin, xmax, ymin, ymax = (as_fraction(v) for v in region)
    else:
        xmin, xmax, ymin, ymax = (Fraction(v) for v in DEFAULT_SAMPLE_BOX)
        if region == "halfplane":
            ymin = Fraction(0)
    for px, py in itertools.product(vals, vals):
        if xmin <= px <= xmax and ymin <= py <= ymax and not (need_y_nonzero and py == 0):
            yield px, py
    rng = random.Random(seed)
    for _ in range(20000):
        px = Fraction(round(rng.uniform(float(xmin), float(xmax)) * 10**6), 10**6)
        py = Fraction(round(rng.uniform(float(ymin), float(ymax)) * 10**6), 10**6)
        if not (xmin <= px <= xmax and ymin <= py <= ymax):
            continue
        if not (need_y_nonzero and py == 0):
            yield px, py


def _exact_witnesses(c: Poly, region: Region, has_abs: bool, seed: int, want=(1, -1)):
    # float screening first; only promising points are evaluated exactly
    pts = list(_candidate_points(region, has_abs, seed))
    xs = np.array([float(p[0]) for p in pts])
    ys = np.array([float(p[1]) for p in pts])
    with np.errstate(all="ignore"):
        fv = np.asarray(ExtExpr.coerce(c).evaluate(xs, ys), dtype=float) * np.ones_like(xs)
    found: dict[int, tuple] = {}
    for s in want:
        idx = np.nonzero(fv > 0 if s > 0 else fv < 0)[0]
        for i in idx[:200]:
            v = c.evaluate({"x": pts[i][0], "y": pts[i][1]})
            if (v > 0) - (v < 0) == s:
                found[s] = pts[i]
                break
    return found


def _sampling_fallback(e: ExtExpr, region: Region, seed: int, trace: list[str]) -> SignVerdict:
    box = region if isinstance(region, tuple) else DEFAULT_SAMPLE_BOX
    xmin, xmax, ymin, ymax = (float(v) for v in box)
    if region == "halfplane":
        ymin = max(ymin, 0.0)
    rng = np.random.default_rng(seed)
    g = np.linspace(0, 1, 201)
    gx, gy = np.meshgrid(xmin + (xmax - xmin) * g, ymin + (ymax - ymin) * g)
    xs = np.concatenate([gx.ravel(), rng.uniform(xmin, xmax, 40000)])
    ys = np.concatenate([gy.ravel(), rng.uniform(ymin, ymax, 40000)])
    vals = np.asarray(e.evaluate(xs, ys), dtype=float) * np.ones_like(xs)
    scale = np.nanmax(np.abs(vals)) if vals.size else 0.0
    margin = 1e-9 * max(scale, 1e-300)
    pos, negs = np.nonzero(vals > margin)[0], np.nonzero(vals < -margin)[0]
    trace.append(f"sampling fallback on [{xmin},{xmax}]x[{ymin},{ymax}] ({xs.size} points)")
    vanishing = "null-measure" if _null_zero_set(e) else "positive-measure"
    if pos.size and negs.size:
        i, j = pos[0], negs[0]
        trace.append("sampled both strict signs")
        return SignVerdict(Sign.INDEFINITE, vanishing, tuple(trace), ((xs[i], ys[i]), (xs[j], ys[j])))
    trace.append(
        "no strict sign change sampled; "
        + ("min >= 0" if not negs.size else "max <= 0")
        + " observed but not certified"
    )
    return SignVerdict(Sign.UNKNOWN, vanishing, tuple(trace))


def certify_sign(e, region: Region = "plane", seed: int = 0) -> SignVerdict:
    """Decide the sign of ``e`` on ``region`` with an auditable trace.

    ``region`` is ``"plane"``, ``"halfplane"`` (``y >= 0``) or a box
    ``(xmin, xmax, ymin, ymax)``.
    """
    e = ExtExpr.coerce(e)
    if e.params():
        raise ParametricInputError(
            f"unbound parameters {sorted(e.params())}; substitute values or use certify_sign_parametric"
        )
    trace: list[str] = []
    if e.is_zero():
        return SignVerdict(Sign.ZERO, "positive-measure", ("expression is identically zero",))
    if len(e.grouped) > 1:
        trace.append("several |y|/exp groups: no exact strategy applies")
        return _sampling_fallback(e, region, seed, trace)

    c, has_abs = _strip_positive(e, trace)
    const, factors = factor(c)
    if factors:
        trace.append("factor over Q: " + " * ".join(f"({f})^{k}" if k > 1 else f"({f})" for f, k in factors))
    s = (const > 0) - (const < 0)
    trace.append(f"constant factor {const}")
    undecided = []
    indefinite = False
    for f, k in factors:
        if k % 2 == 0:
            trace.append(f"square factor ({f})^{k} >= 0")
            continue
        fs = _factor_sign(f, region, trace)
        if fs is None:
            trace.append(f"no exact strategy for factor {f}")
            undecided.append(f)
        elif fs == 0:
            indefinite = True
        else:
            s *= fs
    vanishing = "null-measure" if _null_zero_set(e) else "positive-measure"

    if indefinite and not undecided:
        w = _exact_witnesses(c, region, has_abs, seed)
        if len(w) == 2:
            trace.append(f"witnesses: +{tuple(map(str, w[1]))}, -{tuple(map(str, w[-1]))}")
            return SignVerdict(Sign.INDEFINITE, vanishing, tuple(trace), (w[1], w[-1]))
        trace.append("sign change proven but no witness pair found by search")
        return SignVerdict(Sign.UNKNOWN, vanishing, tuple(trace))
    if undecided or indefinite:
        w = _exact_witnesses(c, region, has_abs, seed)
        if len(w) == 2:
            trace.append(f"witnesses: +{tuple(map(str, w[1]))}, -{tuple(map(str, w[-1]))}")
            return SignVerdict(Sign.INDEFINITE, vanishing, tuple(trace), (w[1], w[-1]))
        return _sampling_fallback(e, region, seed, trace)
    sign = Sign.NONNEGATIVE if s > 0 else Sign.NONPOSITIVE
    trace.append(f"product of certified factor signs: {sign.value}")
    return SignVerdict(sign, vanishing, tuple(trace))


def certify_sign_parametric(e, region: Region = "plane") -> ParametricVerdict:
    """Split off factors that depend on parameters only and certify the rest.

    Mixed state/parameter factors are left to ``certify_sign`` after
    substitution; here they make the state verdict ``Unknown``.
    """
    e = ExtExpr.coerce(e)
    if len(e.grouped) != 1:
        return ParametricVerdict(Poly.const(1), SignVerdict(Sign.UNKNOWN, "unknown", ("not a single group",)))
    (a, q), c = next(iter(e.grouped.items()))
    if q.params():
        return ParametricVerdict(Poly.const(1), SignVerdict(Sign.UNKNOWN, "unknown", ("parametric exp argument",)))
    const, factors = factor(c)
    pf = Poly.const(const)
    state = Poly.const(1)
    for f, k in factors:
        if f.variables() <= set(STATE_VARS):
            state = state * f**k
        elif f.variables().isdisjoint(STATE_VARS):
            pf = pf * f**k
        else:
            return ParametricVerdict(
                Poly.const(1),
                SignVerdict(Sign.UNKNOWN, "unknown", (f"factor {f} mixes state and parameters",)),
            )
    rest = ExtExpr({(a, q): state})
    return ParametricVerdict(pf, certify_sign(rest, region))


def soundness_sample(e: ExtExpr, n: int = 100_000, box=DEFAULT_SAMPLE_BOX, seed: int = 0) -> tuple:
    """Float values and magnitude scales of ``e`` at random points of ``box``."""
    rng = np.random.default_rng(seed)
    xs = rng.uniform(box[0], box[1], n)
    ys = rng.uniform(box[2], box[3], n)
    vals = np.asarray(e.evaluate(xs, ys), dtype=float) * np.ones(n)
    mag = ExtExpr({k: Poly({m: abs(c) for m, c in v.terms.items()}) for k, v in e.grouped.items()})
    scale = np.asarray(mag.evaluate(np.abs(xs), np.abs(ys)), dtype=float) * np.ones(n)
    return vals, scale
