"""Topology of ``{V = 0}``: bounded components, invariant ovals, equilibria.

The exact path factors ``V`` over Q and handles every irreducible factor
that is linear in one variable, or quadratic in one variable with a
constant leading coefficient.  In the quadratic case ``a y^2 + b(x) y +
c(x)`` the curve is the union of the two branches over ``{D(x) >= 0}``
with ``D = b^2 - 4 a c``, and each maximal bounded interval of that set
gives one bounded component (a single point gives an isolated point).
Everything else goes to a marching-squares labelling on a grid.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

import mpmath
import numpy as np
from scipy import ndimage, optimize

from . import upoly
from .certify import factor
from .expr import ExtExpr, Poly
from .field import VectorField

EXACT_DISCRIMINANT = "exact-discriminant"
EXACT_FACTOR = "exact-factor"
HEURISTIC = "heuristic-grid"


class TopologyError(ValueError):
    pass


class MissingBoxError(TopologyError):
    pass


class DegenerateError(ValueError):
    """Equilibrium set is not isolated."""


@dataclass(frozen=True)
class Component:
    kind: str  # "oval" | "isolated-point" | "arc-cluster"
    box: tuple  # (xmin, xmax, ymin, ymax)
    point: tuple  # representative point on the component
    factor: str = ""

    def to_dict(self) -> dict:
        return {"kind": self.kind, "box": [float(v) for v in self.box], "point": [float(v) for v in self.point]}


@dataclass(frozen=True)
class CurveTopology:
    bounded_components: tuple
    unbounded_count: int | None
    method: str
    trace: tuple = ()

    @property
    def count(self) -> int:
        return len(self.bounded_components)

    @property
    def exact(self) -> bool:
        return self.method != HEURISTIC

    def to_dict(self) -> dict:
        return {
            "L": self.count,
            "method": self.method,
            "unbounded": self.unbounded_count,
            "components": [c.to_dict() for c in self.bounded_components],
            "trace": list(self.trace),
        }


# ---------------------------------------------------------------------------
# helpers on bivariate polynomials


def _swap(p: Poly) -> Poly:
    return p.subs({"x": Poly.var("_t")}).subs({"y": Poly.var("x")}).subs({"_t": Poly.var("y")})


def _uni(p: Poly, var: str) -> list:
    return p.univariate(var) if p else []


def _resultant(f: Poly, g: Poly, var: str) -> Poly:
    import sympy

    r = sympy.resultant(f.to_sympy(), g.to_sympy(), sympy.Symbol(var))
    return Poly.from_sympy(sympy.expand(r))


def _to_mpf(c: Fraction):
    return mpmath.mpf(c.numerator) / c.denominator


def _poly_at_x(p: Poly, x0) -> list:
    """Coefficients in ``y`` (high degree first) of ``p(x0, y)`` as mpf."""
    cs = p.coeffs_in("y")
    deg = max(cs)
    out = []
    for k in range(deg, -1, -1):
        c = cs.get(k)
        if c is None:
            out.append(mpmath.mpf(0))
            continue
        v = mpmath.mpf(0)
        for m, a in c.terms.items():
            t = _to_mpf(a)
            for _, e in m:
                t *= x0**e
            v += t
        out.append(v)
    while len(out) > 1 and out[0] == 0:
        out.pop(0)
    return out


def _eval_mp(p: Poly, x0, y0):
    v = mpmath.mpf(0)
    for m, a in p.terms.items():
        t = _to_mpf(a)
        for var, e in m:
            t *= (x0 if var == "x" else y0) ** e
        v += t
    return v


def _abs_scale(p: Poly, x0, y0):
    return sum(abs(_to_mpf(a)) * abs(x0) ** dict(m).get("x", 0) * abs(y0) ** dict(m).get("y", 0) for m, a in p.terms.items())


def real_common_zeros(f: Poly, g: Poly, box=None) -> list[tuple[float, float]]:
    """Real points with ``f = g = 0`` (``f``, ``g`` without common factor).

    The x-coordinates come from exact root isolation of the resultant;
    the matching ``y`` values are found at 50 digits.
    """
    if f.degree("y") <= 0 and g.degree("y") <= 0:
        return []
    if f.degree("y") <= 0:
        f, g = g, f
    R = _resultant(f, g, "y")
    if not R:
        raise DegenerateError("polynomials share a common factor")
    if R.is_constant():
        return []
    pts = []
    with mpmath.workdps(50):
        for iv in upoly.isolate_real_roots(_uni(R, "x")):
            lo, hi = upoly.refine_root(_uni(R, "x"), iv, Fraction(1, 10**40))
            x0 = (_to_mpf(lo) + _to_mpf(hi)) / 2
            coeffs = _poly_at_x(f, x0)
            if len(coeffs) <= 1:
                continue
            try:
                ys = mpmath.polyroots(coeffs, maxsteps=400, extraprec=200)
            except mpmath.libmp.NoConvergence:
                continue
            for yv in ys:
                if abs(mpmath.im(yv)) > mpmath.mpf(10) ** -20:
                    continue
                y0 = mpmath.re(yv)
                if abs(_eval_mp(g, x0, y0)) <= mpmath.mpf(10) ** -25 * (1 + _abs_scale(g, x0, y0)):
                    p = (float(x0), float(y0))
                    if box is None or (box[0] <= p[0] <= box[1] and box[2] <= p[1] <= box[3]):
                        pts.append(p)
    return pts


# ---------------------------------------------------------------------------
# exact per-factor counting


def _runs(delta: list) -> list[tuple]:
    """Maximal connected pieces of ``{delta >= 0}`` as ``(lo, hi, bounded)``.

    ``lo``/``hi`` are root isolating intervals or ``None`` for infinity.
    """
    d = upoly.trim(delta)
    roots = upoly.isolate_real_roots(d)
    gaps = upoly.gap_points(d)
    signs = [upoly.sign_at(d, g) for g in gaps]
    # elements alternate: gap0, root1, gap1, ..., rootk, gapk
    elems = []
    for i, g in enumerate(gaps):
        elems.append(("gap", i, signs[i] > 0))
        if i < len(roots):
            elems.append(("root", i, True))
    out = []
    cur = None
    for kind, i, inc in elems:
        if inc:
            if cur is None:
                cur = [(kind, i), (kind, i)]
            else:
                cur[1] = (kind, i)
        elif cur is not None:
            out.append(cur)
            cur = None
    if cur is not None:
        out.append(cur)
    res = []
    for start, end in out:
        bounded = not (start == ("gap", 0) or end == ("gap", len(gaps) - 1))
        res.append((start, end, bounded, roots))
    return res


def _root_float(d, iv) -> float:
    lo, hi = upoly.refine_root(d, iv, Fraction(1, 10**15))
    return float((lo + hi) / 2)


def _quadratic_components(f: Poly, swapped: bool, trace: list) -> tuple[list, int]:
    cs = f.coeffs_in("y")
    a = cs.get(2, Poly()).constant_value()
    b = cs.get(1, Poly())
    c = cs.get(0, Poly())
    delta = _uni(b * b - c * (4 * a), "x")
    bounded = []
    unbounded = 0
    bf = _uni(b, "x") if b else []
    for start, end, is_bounded, roots in _runs(delta):
        if not is_bounded:
            unbounded += 1
            continue
        x0 = _root_float(delta, roots[start[1]])
        x1 = _root_float(delta, roots[end[1]])
        xs = np.linspace(x0, x1, 201)
        bv = np.array([float(upoly.evaluate(bf, Fraction(t))) if bf else 0.0 for t in xs])
        dv = np.array([max(float(upoly.evaluate(delta, Fraction(t))), 0.0) for t in xs])
        ylo = (-bv - np.sqrt(dv)) / (2 * float(a))
        yhi = (-bv + np.sqrt(dv)) / (2 * float(a))
        ys = np.concatenate([ylo, yhi])
        kind = "isolated-point" if start == end and start[0] == "root" else "oval"
        pt = (x0 if kind == "isolated-point" else xs[100], ylo[0] if kind == "isolated-point" else ylo[100])
        box = (x0, x1, float(ys.min()), float(ys.max()))
        if swapped:
            pt = (pt[1], pt[0])
            box = (box[2], box[3], box[0], box[1])
        bounded.append(Component(kind, box, pt, str(f if not swapped else _swap(f))))
    trace.append(
        f"factor {_swap(f) if swapped else f}: quadratic in {'x' if swapped else 'y'}, "
        f"discriminant {Poly.from_univariate(delta, 'x' if not swapped else 'y')} -> "
        f"{len(bounded)} bounded, {unbounded} unbounded"
    )
    return bounded, unbounded


def _factor_components(f: Poly, trace: list):
    """``(bounded, unbounded, method)`` or ``None`` if no exact rule applies."""
    vs = f.variables()
    if len(vs) == 1:
        v = next(iter(vs))
        n = len(upoly.isolate_real_roots(_uni(f, v)))
        trace.append(f"factor {f}: univariate in {v}, {n} straight lines")
        return [], n, EXACT_FACTOR
    for var, swapped in (("y", False), ("x", True)):
        g = _swap(f) if swapped else f
        if g.degree("y") == 1:
            a = g.coeffs_in("y").get(1, Poly())
            n = len(upoly.isolate_real_roots(_uni(a, "x"))) + 1 if not a.is_constant() else 1
            trace.append(f"factor {f}: linear in {var}, graph over {n} interval(s), no bounded component")
            return [], n, EXACT_FACTOR
    for var, swapped in (("y", False), ("x", True)):
        g = _swap(f) if swapped else f
        if g.degree("y") == 2 and g.coeffs_in("y")[2].is_constant():
            bounded, unb = _quadratic_components(g, swapped, trace)
            return bounded, unb, EXACT_DISCRIMINANT
    return _radial_components(f, trace)


def _radial_components(f: Poly, trace: list):
    """Factors ``h(x^2 + y^2)``: one circle per positive root of ``h``."""
    g = _uni(f.subs({"y": 0}), "x")
    if any(c for c in g[1::2]):
        return None
    h = g[0::2]
    rho = Poly.var("x") ** 2 + Poly.var("y") ** 2
    back = Poly()
    for k, c in enumerate(h):
        back = back + rho ** k * c
    if back != f:
        return None
    comps = []
    if not h[0]:
        comps.append(Component("isolated-point", (0.0, 0.0, 0.0, 0.0), (0.0, 0.0), str(f)))
    h = upoly.trim(h)
    while not h[0]:
        h = h[1:]
    for iv in upoly.isolate_real_roots(h):
        while iv[0] <= 0 <= iv[1]:  # 0 is not a root of h, so bisection separates it
            iv = upoly.refine_root(h, iv, (iv[1] - iv[0]) / 4)
        if iv[0] > 0:
            r = math.sqrt(_root_float(h, iv))
            comps.append(Component("oval", (-r, r, -r, r), (r, 0.0), str(f)))
    trace.append(f"factor {f}: polynomial in x^2 + y^2 with {len(comps)} nonnegative root(s), one circle each")
    return comps, 0, EXACT_FACTOR


def _exact_polynomial(p: Poly, trace: list):
    if p.is_constant():
        if not p:
            raise TopologyError("V is identically zero: not an admissible candidate")
        trace.append("nonzero constant: empty zero set")
        return [], 0, EXACT_FACTOR
    _, factors = factor(p)
    factors = [f for f, _ in factors]
    bounded, unbounded, methods = [], 0, set()
    for f in factors:
        r = _factor_components(f, trace)
        if r is None:
            trace.append(f"factor {f}: no exact rule (degree {f.degree('x')} in x, {f.degree('y')} in y)")
            return None
        bounded += r[0]
        unbounded += r[1]
        methods.add(r[2])
    for i in range(len(factors)):
        for j in range(i + 1, len(factors)):
            pts = real_common_zeros(factors[i], factors[j])
            if pts:
                trace.append(f"factors {factors[i]} and {factors[j]} meet at {pts[:3]}; components merge")
                return None
    if len(factors) > 1:
        trace.append("factor curves pairwise disjoint (resultant root isolation)")
    method = EXACT_DISCRIMINANT if EXACT_DISCRIMINANT in methods else EXACT_FACTOR
    return bounded, unbounded, method


def _polynomial_part(V: ExtExpr, trace: list):
    """Strip a positive ``exp`` factor; return the remaining ExtExpr."""
    keys = list(V.grouped)
    qs = {q for _, q in keys}
    if len(qs) == 1:
        q = next(iter(qs))
        if q:
            trace.append(f"strip exp({q}) > 0")
            return ExtExpr({(a, Poly()): c for (a, _), c in V.grouped.items()})
        return V
    return None


# ---------------------------------------------------------------------------
# heuristic grid path


def _grid_components(V: ExtExpr, box, resolution: int, trace: list):
    xmin, xmax, ymin, ymax = (float(v) for v in box)
    n = int(resolution)
    xs = np.linspace(xmin, xmax, n + 1)
    ys = np.linspace(ymin, ymax, n + 1)
    gx, gy = np.meshgrid(xs, ys, indexing="xy")
    f = V.lambdify(vectorized=True)
    vals = np.asarray(f(gx, gy), dtype=float) * np.ones_like(gx)
    s = np.sign(vals)
    c00, c01, c10, c11 = s[:-1, :-1], s[:-1, 1:], s[1:, :-1], s[1:, 1:]
    cmin = np.minimum(np.minimum(c00, c01), np.minimum(c10, c11))
    cmax = np.maximum(np.maximum(c00, c01), np.maximum(c10, c11))
    active = (cmin < 0) & (cmax > 0) | (cmin == 0) | (cmax == 0)
    labels, nlab = ndimage.label(active, structure=np.ones((3, 3)))
    border = set(np.unique(np.concatenate([labels[0], labels[-1], labels[:, 0], labels[:, -1]]))) - {0}
    bounded = []
    slices = ndimage.find_objects(labels)
    for k in range(1, nlab + 1):
        if k in border:
            continue
        sl = slices[k - 1]
        j0, j1 = sl[0].start, sl[0].stop
        i0, i1 = sl[1].start, sl[1].stop
        bb = (xs[i0], xs[i1], ys[j0], ys[j1])
        size = (i1 - i0) * (j1 - j0)
        kind = "oval" if size > 4 else "isolated-point"
        idx = np.argwhere(labels == k)[0]
        bounded.append(Component(kind, bb, (float(xs[idx[1]]), float(ys[idx[0]]))))
    unbounded = len(border)

    # isolated zeros where V keeps its sign: local minima of |V| away from the curve
    av = np.abs(vals)
    scale = float(np.max(av)) if av.size else 1.0
    mins = (av == ndimage.minimum_filter(av, size=3, mode="nearest")) & (av < 1e-2 * scale)
    near_curve = ndimage.binary_dilation(np.pad(active, ((0, 1), (0, 1))), iterations=2)
    cands = np.argwhere(mins & ~near_curve)
    h = max((xmax - xmin), (ymax - ymin)) / n
    fpt = lambda p: float(f(p[0], p[1]))  # noqa: E731
    found = []
    for j, i in cands[:200]:
        p0 = np.array([xs[i], ys[j]])
        res = optimize.minimize(lambda p: fpt(p) ** 2, p0, method="Nelder-Mead",
                                options={"xatol": 1e-12, "fatol": 1e-30, "maxiter": 4000})
        p = res.x
        if np.max(np.abs(p - p0)) > 3 * h:
            continue
        loc = np.max(np.abs(vals[max(j - 2, 0): j + 3, max(i - 2, 0): i + 3]))
        if abs(fpt(p)) <= 1e-10 * max(loc, 1e-300):
            if not (xmin < p[0] < xmax and ymin < p[1] < ymax):
                continue
            if all(np.hypot(*(p - q)) > 2 * h for q in found):
                found.append(p)
    for p in found:
        bounded.append(Component("isolated-point", (p[0], p[0], p[1], p[1]), (float(p[0]), float(p[1]))))
    trace.append(
        f"marching squares on [{xmin},{xmax}]x[{ymin},{ymax}] at {n}x{n}: "
        f"{len(bounded) - len(found)} interior clusters, {len(found)} isolated minima, {unbounded} touching the box"
    )
    return bounded, unbounded


def count_bounded_components(V, box=None, resolution: int = 512, force_heuristic: bool = False) -> CurveTopology:
    """Bounded connected components of ``{V = 0}``.

    ``box`` is needed only when the exact path does not apply (or when
    ``force_heuristic`` is set).
    """
    V = ExtExpr.coerce(V)
    if V.params():
        raise TopologyError(f"unbound parameters {sorted(V.params())}")
    if V.is_zero():
        raise TopologyError("V is identically zero: not an admissible candidate")
    trace: list[str] = []
    if not force_heuristic:
        W = _polynomial_part(V, trace)
        res = None
        if W is not None and W.is_polynomial():
            res = _exact_polynomial(W.as_poly(), trace)
        elif W is not None:
            res = _exact_abs(W, trace)
        if res is not None:
            b, u, method = res
            return CurveTopology(tuple(b), u, method, tuple(trace))
    if box is None:
        raise MissingBoxError("no exact rule applies to V; pass a box for the grid heuristic")
    b, u = _grid_components(V, box, resolution, trace)
    return CurveTopology(tuple(b), u, HEURISTIC, tuple(trace))


def _exact_abs(W: ExtExpr, trace: list):
    """``|y|`` expressions whose zero set avoids ``y = 0``: count per half-plane."""
    on_axis = W.branch(1).as_poly().subs({"y": 0})
    if not on_axis:
        return None
    if not on_axis.is_constant() and upoly.isolate_real_roots(_uni(on_axis, "x")):
        trace.append("zero set meets y = 0; half-planes cannot be treated separately")
        return None
    trace.append("V(x, 0) has no real zero: half-planes y > 0 and y < 0 treated separately")
    bounded, unbounded, methods = [], 0, set()
    for sgn in (1, -1):
        r = _exact_polynomial(W.branch(sgn).as_poly(), trace)
        if r is None:
            return None
        bounded += [c for c in r[0] if c.point[1] * sgn > 0]
        unbounded += r[1]  # upper bound: pieces in the other half-plane included
        methods.add(r[2])
    method = EXACT_DISCRIMINANT if EXACT_DISCRIMINANT in methods else EXACT_FACTOR
    return bounded, None, method


# ---------------------------------------------------------------------------
# invariant ovals


@dataclass(frozen=True)
class OvalInfo:
    curve: str
    invariant: bool
    cofactor: str | None
    equilibria_on_curve: tuple
    periodic_orbits: int


@dataclass(frozen=True)
class InvariantOvalReport:
    ovals: tuple
    N: int
    trace: tuple = ()

    def to_dict(self) -> dict:
        return {
            "N": self.N,
            "ovals": [
                {"curve": o.curve, "invariant": o.invariant, "cofactor": o.cofactor,
                 "equilibria_on_curve": [list(p) for p in o.equilibria_on_curve],
                 "periodic_orbits": o.periodic_orbits}
                for o in self.ovals
            ],
            "trace": list(self.trace),
        }


def invariance_cofactor(X: VectorField, C: Poly) -> Poly | None:
    """``k`` with ``grad C . X = k C``, or ``None`` when C is not invariant."""
    import sympy

    dC = X.orbital_derivative(ExtExpr.coerce(C))
    if not dC.is_polynomial():
        return None
    q, r = sympy.div(dC.as_poly().to_sympy(), C.to_sympy(), sympy.Symbol("x"), sympy.Symbol("y"))
    if sympy.expand(r) != 0:
        return None
    return Poly.from_sympy(sympy.expand(q))


def invariant_ovals(X: VectorField, V, topo: CurveTopology | None = None) -> InvariantOvalReport:
    """Algebraic ovals inside ``{V = 0}`` that are invariant and free of equilibria."""
    V = ExtExpr.coerce(V)
    trace: list[str] = []
    W = _polynomial_part(V, trace)
    if W is None or not W.is_polynomial() or not X.is_polynomial():
        trace.append("V or X is not polynomial: no algebraic oval can be a periodic orbit of the split fields")
        return InvariantOvalReport((), 0, tuple(trace))
    _, factors = factor(W.as_poly()) if not W.as_poly().is_constant() else (None, [])
    P, Q = X.P.as_poly(), X.Q.as_poly()
    out, N = [], 0
    for f, _ in factors:
        sub: list[str] = []
        r = _factor_components(f, sub)
        ovals = [c for c in (r[0] if r else []) if c.kind == "oval"]
        if r is None:
            try:
                ovals = [c for c in count_bounded_components(ExtExpr.coerce(f), box=_default_box(f)).bounded_components
                         if c.kind == "oval"]
            except TopologyError:
                ovals = []
        if not ovals:
            continue
        k = invariance_cofactor(X, f)
        if k is None:
            trace.append(f"{f}: grad C . X not divisible by C, not invariant")
            out.append(OvalInfo(str(f), False, None, (), 0))
            continue
        eq = _equilibria_on(f, P, Q)
        free = [o for o in ovals if not any(_on_component(p, o) for p in eq)]
        n = len(free)
        N += n
        trace.append(f"{f}: invariant with cofactor {k}; {len(eq)} equilibria on it; {n} periodic orbit(s)")
        out.append(OvalInfo(str(f), True, str(k), tuple(eq), n))
    return InvariantOvalReport(tuple(out), N, tuple(trace))


def _on_component(p, comp: Component, tol=1e-9) -> bool:
    x0, x1, y0, y1 = comp.box
    return x0 - tol <= p[0] <= x1 + tol and y0 - tol <= p[1] <= y1 + tol


def _equilibria_on(C: Poly, P: Poly, Q: Poly) -> list:
    pts = []
    for g in (P, Q):
        if not g:
            continue
        for p in real_common_zeros(C, g):
            other = Q if g is P else P
            val = other.evaluate({"x": p[0], "y": p[1]})
            sc = sum(abs(float(c)) * abs(p[0]) ** dict(m).get("x", 0) * abs(p[1]) ** dict(m).get("y", 0)
                     for m, c in other.terms.items())
            if abs(float(val)) <= 1e-9 * (1 + sc) and all(math.dist(p, q) > 1e-7 for q in pts):
                pts.append(p)
        break
    return pts


def _default_box(f: Poly, pad: float = 2.0) -> tuple:
    bx = float(upoly.root_bound(_uni(f.subs({"y": 0}), "x"))) if f.subs({"y": 0}).degree("x") > 0 else 1.0
    by = float(upoly.root_bound(_uni(f.subs({"x": 0}), "y"))) if f.subs({"x": 0}).degree("y") > 0 else 1.0
    R = max(bx, by) + pad
    return (-R, R, -R, R)


# ---------------------------------------------------------------------------
# equilibria


@dataclass(frozen=True)
class Equilibrium:
    point: tuple
    kind: str  # saddle | node | focus | weak focus | degenerate
    stability: str  # stable | unstable | neutral
    trace_J: float
    det_J: float

    def to_dict(self) -> dict:
        return {"point": list(self.point), "kind": self.kind, "stability": self.stability,
                "trace": self.trace_J, "det": self.det_J}


def classify(J: np.ndarray, tol: float = 1e-10) -> tuple[str, str]:
    tr, det = float(np.trace(J)), float(np.linalg.det(J))
    scale = max(1.0, float(np.max(np.abs(J))))
    if abs(det) <= tol * scale**2:
        return "degenerate", "neutral"
    if det < 0:
        return "saddle", "unstable"
    stab = "neutral" if abs(tr) <= tol * scale else ("stable" if tr < 0 else "unstable")
    if abs(tr) <= tol * scale:
        return "weak focus", stab
    return ("focus" if tr * tr < 4 * det else "node"), stab


def _poly_equilibria(P: Poly, Q: Poly, box) -> list[tuple[float, float]]:
    if not P or not Q:
        raise DegenerateError("a component of the field vanishes identically")
    import sympy

    g = sympy.gcd(P.to_sympy(), Q.to_sympy())
    if sympy.Poly(g, sympy.Symbol("x"), sympy.Symbol("y")).total_degree() > 0:
        G = Poly.from_sympy(g)
        # a common factor with real points means a curve of equilibria
        test = count_bounded_components(ExtExpr.coerce(G), box=box, resolution=128)
        if test.count or (test.unbounded_count or 0):
            raise DegenerateError(f"P and Q share the factor {G}: equilibria are not isolated")
    pts = real_common_zeros(P, Q, box=box)
    out = []
    for p in pts:
        if all(math.dist(p, q) > 1e-8 for q in out):
            out.append(p)
    return out


def equilibria(X: VectorField, box=(-10, 10, -10, 10)) -> list[Equilibrium]:
    """Isolated equilibria in ``box`` with their linear type."""
    if X.free_params():
        raise ValueError(f"unbound parameters {sorted(X.free_params())}")
    pts = []
    if X.is_polynomial():
        pts = _poly_equilibria(X.P.as_poly(), X.Q.as_poly(), box)
    else:
        if any(q for _, q in list(X.P.grouped) + list(X.Q.grouped)):
            raise ValueError("equilibria of fields with exp factors are not supported")
        for sgn in (1, -1):
            Y = X.branch(sgn)
            for p in _poly_equilibria(Y.P.as_poly(), Y.Q.as_poly(), box):
                if p[1] * sgn >= -1e-12 and all(math.dist(p, q) > 1e-8 for q in pts):
                    pts.append(p)
    jac = [[X.P.diff("x"), X.P.diff("y")], [X.Q.diff("x"), X.Q.diff("y")]]
    fns = [[e.lambdify() for e in row] for row in jac]
    out = []
    for p in sorted(pts):
        J = np.array([[f(*p) for f in row] for row in fns], dtype=float)
        kind, stab = classify(J)
        out.append(Equilibrium((p[0], p[1]), kind, stab, float(np.trace(J)), float(np.linalg.det(J))))
    return out
