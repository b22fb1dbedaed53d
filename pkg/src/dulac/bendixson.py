"""Dulac machinery: M_s, curvature functions, D, and bound certificates."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

from .certify import Sign, SignVerdict, certify_sign, factor
from .expr import ExtExpr, Poly, as_fraction, parse
from .field import VectorField


@dataclass(frozen=True)
class DulacCandidate:
    V: ExtExpr
    s: Fraction
    note: str = ""

    def __post_init__(self):
        object.__setattr__(self, "V", ExtExpr.coerce(self.V))
        object.__setattr__(self, "s", as_fraction(self.s))
        if self.s <= 0:
            raise ValueError("Dulac exponent s must be positive")


def compute_Ms(X: VectorField, c: DulacCandidate) -> ExtExpr:
    """``V_x P + V_y Q - s (P_x + Q_y) V``."""
    X.require(1, "M_s")
    V = c.V
    return V.diff("x") * X.P + V.diff("y") * X.Q - X.divergence() * V * c.s


def curvature_K(X: VectorField) -> ExtExpr:
    """``Q^2 P_y - P^2 Q_x + P Q (P_x - Q_y)``."""
    P, Q = X.P, X.Q
    return Q * Q * P.diff("y") - P * P * Q.diff("x") + P * Q * (P.diff("x") - Q.diff("y"))


def curvature_Kperp(X: VectorField) -> ExtExpr:
    """``Q^2 P_x + P^2 Q_y - P Q (P_y + Q_x)``."""
    P, Q = X.P, X.Q
    return Q * Q * P.diff("x") + P * P * Q.diff("y") - P * Q * (P.diff("y") + Q.diff("x"))


def compute_D(X: VectorField) -> ExtExpr:
    X.require(2, "D")
    P, Q = X.P, X.Q
    Px, Py, Qx, Qy = P.diff("x"), P.diff("y"), Q.diff("x"), Q.diff("y")
    Pxx, Pxy, Pyy = Px.diff("x"), Px.diff("y"), Py.diff("y")
    Qxx, Qxy, Qyy = Qx.diff("x"), Qx.diff("y"), Qy.diff("y")
    return (
        P * P * Q * (Pxx - Qxy * 2)
        + P * Q * Q * (Pxy * 2 - Qyy)
        + Q * Q * Q * Pyy
        - P * P * P * Qxx
    )


def rigid_H(F) -> ExtExpr:
    """Hessian determinant ``F_xx F_yy - F_xy^2``."""
    F = ExtExpr.coerce(F)
    Fx, Fy = F.diff("x"), F.diff("y")
    return Fx.diff("x") * Fy.diff("y") - Fx.diff("y") * Fx.diff("y")


def lienard_H(F, G, m: int) -> ExtExpr:
    """``(m - 1) F G' + 2 F' G``."""
    F, G = ExtExpr.coerce(F), ExtExpr.coerce(G)
    return F * G.diff("x") * (m - 1) + F.diff("x") * G * 2


def rigid_quadratic_parts(F) -> tuple[ExtExpr, ExtExpr, ExtExpr]:
    """Coefficients of ``D / (x^2 + y^2) = A F^2 + B F + C`` for rigid fields."""
    F = ExtExpr.coerce(F)
    x, y = ExtExpr.var("x"), ExtExpr.var("y")
    Fxx, Fxy, Fyy = F.diff("x").diff("x"), F.diff("x").diff("y"), F.diff("y").diff("y")
    A = x * x * Fxx + x * y * Fxy * 2 + y * y * Fyy
    B = ((x * x - y * y) * Fxy + x * y * (Fyy - Fxx)) * 2
    C = x * x * Fyy - x * y * Fxy * 2 + y * y * Fxx
    return A, B, C


def rigid_field(F) -> VectorField:
    F = ExtExpr.coerce(F)
    x, y = ExtExpr.var("x"), ExtExpr.var("y")
    return VectorField(-y + x * F, x + y * F)


def rigid_function(X: VectorField) -> ExtExpr | None:
    """Recover ``F`` when ``X = (-y + x F, x + y F)`` with polynomial ``F``."""
    if not X.is_polynomial():
        return None
    x, y = Poly.var("x"), Poly.var("y")
    num = x * X.P.as_poly() + y * X.Q.as_poly()
    r2 = x * x + y * y
    import sympy

    q, r = sympy.div(num.to_sympy(), r2.to_sympy(), sympy.Symbol("x"), sympy.Symbol("y"))
    if r != 0:
        return None
    F = Poly.from_sympy(q)
    if ExtExpr.coerce(-y + x * F) == X.P and ExtExpr.coerce(x + y * F) == X.Q:
        return ExtExpr.coerce(F)
    return None


# ---------------------------------------------------------------------------
# exact identity suite


def _lieg_field(F, G, m: int) -> VectorField:
    y = ExtExpr.var("y")
    w = ExtExpr.abs_y(m) if m else ExtExpr.coerce(1)
    return VectorField(y - w * F, -ExtExpr.coerce(G).diff("x") / 2)


def _lieg_V(F, G, m: int) -> ExtExpr:
    y = ExtExpr.var("y")
    w = ExtExpr.abs_y(m) if m else ExtExpr.coerce(1)
    return ExtExpr.coerce(G) + y * y - y * w * F


def _id_vdp():
    X = VectorField(parse("y"), parse("-x - lam*(x^2-1)*y"))
    return compute_Ms(X, DulacCandidate(parse("x^2+y^2-1"), 2)) - parse("2*lam*(x^2-1)^2")


def _id_thm31():
    x, y = ExtExpr.var("x"), ExtExpr.var("y")
    W = parse("2*x^2")
    B = parse("x^3 - b*x")  # x * int_0^x W(t)/t dt - b x
    X = VectorField(y - (x * x - 1) * B, -x * (1 + y * B))
    C = x * x + y * y - 1
    M = compute_Ms(X, DulacCandidate((1 - x * x - y * y) * (x * x + y * y + B * y), 1))
    d1 = M - x * C * C * (B - x * B.diff("x"))
    d2 = M + x * x * C * C * W
    return d1 * d1 + d2 * d2


def _id_wilc_13():
    X = VectorField(parse("y-(x^2-1)*(x^3-b*x)"), parse("-x*(1+y*(x^3-b*x))"))
    M = compute_Ms(X, DulacCandidate(parse("x^2+y^2-1"), Fraction(1, 3)))
    return M - parse("(1/3)*(x^2+y^2-1)*((2*b-3)*x^2+b)")


def _id_lieg():
    F = parse("f1*x + f2*x^2 + f3*x^3")
    G = parse("x^2 + g3*x^3 + g4*x^4")
    total = ExtExpr()
    for m in (0, 2, 3, 4):
        X = _lieg_field(F, G, m)
        M = compute_Ms(X, DulacCandidate(_lieg_V(F, G, m), 1))
        w = ExtExpr.abs_y(m) if m else ExtExpr.coerce(1)
        d = M - w * lienard_H(F, G, m) / 2
        total = total + d * d
    return total


def _id_massera():
    F = parse("lam*(x^3/3 - x)")
    x, y = ExtExpr.var("x"), ExtExpr.var("y")
    X = VectorField(y - F, -x)
    K = curvature_K(X)
    d1 = K - (x * x + y * y + F * F - 2 * y * F + x * (y - F) * F.diff("x"))
    d2 = compute_Ms(X, DulacCandidate(K, 1)) - (y - F) ** 2 * x * F.diff("x").diff("x")
    return d1 * d1 + d2 * d2


def _id_D_lienard():
    F = parse("f2*x^2 + f3*x^3 + f4*x^4")
    X = VectorField(parse("y") - F, parse("-x"))
    d = compute_D(X) - compute_Ms(X, DulacCandidate(curvature_K(X), 1))
    e = compute_D(X) - (parse("y") - F) ** 2 * parse("x") * F.diff("x").diff("x")
    return d * d + e * e


_RIGID_F = "a + b*x + c*y + d*x^2 + e*x*y + h*y^2 + k*x^3 + l*y^3"


def _id_D_rigid():
    F = parse(_RIGID_F)
    X = rigid_field(F)
    x, y = ExtExpr.var("x"), ExtExpr.var("y")
    A, B, C = rigid_quadratic_parts(F)
    D = compute_D(X)
    d1 = D - compute_Ms(X, DulacCandidate(curvature_K(X), 1))
    d2 = D - (x * x + y * y) * (A * F * F + B * F + C)
    Vr = (x * x + y * y) * (x * F * F.diff("x") + y * F * F.diff("y") + x * F.diff("y") - y * F.diff("x") - 1 - F * F)
    d3 = curvature_K(X) - Vr
    return d1 * d1 + d2 * d2 + d3 * d3


def _id_rigid_discriminant():
    # Hessian entries as free symbols p = F_xx, q = F_xy, r = F_yy
    x, y = ExtExpr.var("x"), ExtExpr.var("y")
    p, q, r = (ExtExpr.coerce(Poly.var(s)) for s in ("p", "q", "r"))
    A = x * x * p + x * y * q * 2 + y * y * r
    B = ((x * x - y * y) * q + x * y * (r - p)) * 2
    C = x * x * r - x * y * q * 2 + y * y * p
    return B * B - A * C * 4 + (x * x + y * y) ** 2 * (p * r - q * q) * 4


def _id_H_families():
    x = ExtExpr.var("x")
    c = ExtExpr.coerce(Poly.var("c"))
    A = parse("x^3/3 - x^2/2 + a1*x")
    B = parse("1 + b1*x + x^2")
    Ap, Bp = A.diff("x"), B.diff("x")
    total = ExtExpr()
    for p, q in ((1, 0), (2, 1)):  # family (i)
        F, G = A**p * Ap * B, c * A**q * Ap**2 * B**2
        d = lienard_H(F, G, 0) - c * (2 * p - q) * A ** (p + q - 1) * Ap**4 * B**3
        total = total + d * d
    p, q = 1, 1  # family (ii)
    F, G = A ** (2 * p) * Ap * B ** (q + 1), c * A ** (4 * p) * Ap**2 * B**q
    d = lienard_H(F, G, 0) - c * (q + 2) * A ** (6 * p) * B ** (2 * q) * Ap**3 * Bp
    total = total + d * d
    # family (iii), k = 1, Z = x^2: F = (1/2) x^{-1} int_0^x t^3 t^2 dt = x^5/12
    d = lienard_H(parse("x^5/12"), parse("x^2"), 2) - x**4 * x**2
    total = total + d * d
    # family (iv)
    F = parse("a*(x^3/3 - x)")
    G = parse("x^2 - (a^2/8 + 6*b)*x^4 + (a^2/48 + b)*x^6")
    d = lienard_H(F, G, 0) - parse("a*(16 - 3*a^2 - 144*b)/12") * x**4
    total = total + d * d
    # van der Pol subfamily: F = C B, G = C^2 gives H = 2 C^3 B'
    Cf = parse("x + c2*x^2")
    d = lienard_H(Cf * B, Cf * Cf, 0) - 2 * Cf**3 * Bp
    return total + d * d


WILC2_A = "-225 + 225*x^2 + 25*b^2*x^6 - 30*b*x^8 + 9*x^10 + (150*b*x^3 - 90*x^5)*y + 225*y^2"
# the y-free part and linear y-term as printed; the leading term is 225 y^2
WILC2_B = (
    "225*x^2 - 75*b^2*x^4 + 5*b*(24+5*b)*x^6 - 15*(3+2*b)*x^8 + 9*x^10"
    " + (-225*b*x + 25*(9+6*b)*x^3 - 90*x^5)*y + 225*y^2"
)
WILC2_P = "y - b*x + x^3 + (4*b/3)*x^3 - (6/5)*x^5"
WILC2_Q = "-x + b^2*x^3 - b*(2+b)*x^5 + (1+2*b)*x^7 - x^9"


def _id_wilc2():
    X = VectorField(parse(WILC2_P), parse(WILC2_Q))
    A, B = parse(WILC2_A), parse(WILC2_B)
    return compute_Ms(X, DulacCandidate(A * B, 1)) - 2 * ExtExpr.var("x") ** 4 * A * A


def _id_rigid_H_quadratic():
    return rigid_H(parse("a + b*x + c*y + d*x^2 + e*x*y + h*y^2")) - parse("4*d*h - e^2")


def _id_rigid_H_fg():
    f = parse("f0 + f1*x + f2*x^2 + f3*x^3 + f4*x^4")
    g = ExtExpr.coerce(parse("g2*x^2 + g3*x^3 + g4*x^4").as_poly().subs({"x": Poly.var("y")}))
    return rigid_H(f + g) - f.diff("x").diff("x") * g.diff("y").diff("y")


IDENTITIES = {
    "vdp_M2": _id_vdp,
    "thm31_M1": _id_thm31,
    "wilc_M13": _id_wilc_13,
    "lieg_M1": _id_lieg,
    "massera_M1": _id_massera,
    "D_eq_M1_lienard": _id_D_lienard,
    "D_eq_M1_rigid": _id_D_rigid,
    "rigid_discriminant": _id_rigid_discriminant,
    "H_families": _id_H_families,
    "wilc2_M1": _id_wilc2,
    "rigid_H_quadratic": _id_rigid_H_quadratic,
    "rigid_H_fg": _id_rigid_H_fg,
}


def identity_suite() -> dict[str, bool]:
    """Each entry is the exact difference of two sides; ``True`` iff it vanishes."""
    return {name: fn().is_zero() for name, fn in IDENTITIES.items()}


# ---------------------------------------------------------------------------
# certificates

ROUTE_DIRECT = "direct"
ROUTE_COFACTOR = "invariant-cofactor"


def rigid_sign(X: VectorField, Ms: ExtExpr, seed: int = 0) -> SignVerdict | None:
    """Sign of ``M_1 = D`` for a rigid field via the Hessian of ``F``.

    ``D = (x^2+y^2)(A F^2 + B F + C)`` with ``B^2 - 4AC = -4(x^2+y^2)^2 H``.
    When ``H >= 0`` the Hessian is semidefinite, so ``A`` has the sign of
    ``F_xx + F_yy`` and the quadratic in ``F`` never crosses zero.
    """
    F = rigid_function(X)
    if F is None or X.smoothness < 2 or Ms != compute_D(X):
        return None
    trace = [f"rigid field with F = {F}; M_s equals D"]
    H = rigid_H(F)
    hv = certify_sign(H, seed=seed)
    trace.append(f"H = F_xx F_yy - F_xy^2 = {H}: {hv.sign.value} ({hv.vanishing_set})")
    if not (hv.sign == Sign.NONNEGATIVE and hv.vanishing_set == "null-measure"):
        return None
    tr = F.diff("x").diff("x") + F.diff("y").diff("y")
    tv = certify_sign(tr, seed=seed)
    trace.append(f"trace F_xx + F_yy = {tr}: {tv.sign.value}")
    if not tv.definite:
        return None
    sign = tv.sign
    trace.append(f"discriminant -4(x^2+y^2)^2 H <= 0, so D has the sign of the trace: {sign.value}")
    return SignVerdict(sign, "null-measure", tuple(trace))


def invariant_cofactor_of(Ms: ExtExpr, V: ExtExpr) -> ExtExpr | None:
    """``k = M_s / V`` when both are polynomial and ``V`` divides ``M_s``."""
    if not (Ms.is_polynomial() and V.is_polynomial()) or V.is_zero():
        return None
    import sympy

    x, y = sympy.symbols("x y")
    q, r = sympy.div(Ms.as_poly().to_sympy(), V.as_poly().to_sympy(), x, y)
    if sympy.expand(r) != 0:
        return None
    return ExtExpr.coerce(Poly.from_sympy(sympy.expand(q)))


@dataclass(frozen=True)
class Region:
    box: tuple
    stability_sign: int  # +1 repeller, -1 attractor, 0 undetermined
    probe: tuple  # point where the sign of V was read

    def to_dict(self) -> dict:
        return {"box": [float(v) for v in self.box], "stability_sign": self.stability_sign}


@dataclass
class DulacCertificate:
    X: VectorField
    candidate: DulacCandidate
    Ms: ExtExpr
    verdict: SignVerdict
    topology: object  # CurveTopology or None when it could not be computed
    ovals: object  # InvariantOvalReport
    route: str = ROUTE_DIRECT
    cofactor: ExtExpr | None = None
    cofactor_verdict: SignVerdict | None = None
    family: str | None = None
    params: dict = field(default_factory=dict)
    regions: list = field(default_factory=list)
    notes: list = field(default_factory=list)

    @property
    def L(self) -> int | None:
        return None if self.topology is None else self.topology.count

    @property
    def N(self) -> int:
        return self.ovals.N if self.ovals is not None else 0

    @property
    def bound(self) -> int | None:
        return None if self.L is None else self.N + self.L

    @property
    def effective_verdict(self) -> SignVerdict:
        return self.cofactor_verdict if self.route == ROUTE_COFACTOR else self.verdict

    @property
    def certified(self) -> bool:
        return self.effective_verdict.certified and self.topology is not None and self.topology.exact

    @property
    def sigma(self) -> int:
        """Constant sign of ``M_s`` (direct route) or of ``M_s / V`` (cofactor route)."""
        return self.effective_verdict.sign_value

    def stability_at(self, point) -> int:
        """Sign of ``-V M_s`` at ``point``: +1 repelling, -1 attracting, 0 on ``V = 0``."""
        if not self.effective_verdict.definite:
            return 0
        if self.route == ROUTE_COFACTOR:
            return -self.sigma
        v = float(self.candidate.V.evaluate(*map(float, point)))
        if v == 0 or math.isnan(v):
            return 0
        return -self.sigma * (1 if v > 0 else -1)

    def on_curve(self, point, rel: float = 1e-6) -> bool:
        """True when ``point`` lies on ``{V = 0}`` up to a relative tolerance."""
        V = self.candidate.V
        x, y = map(float, point)
        h = 1e-6 * max(1.0, abs(x), abs(y))
        v = abs(float(V.evaluate(x, y)))
        g = max(abs(float(V.evaluate(x + h, y)) - v), abs(float(V.evaluate(x, y + h)) - v)) / h
        return v <= rel * max(1.0, g * max(1.0, abs(x), abs(y)))

    def to_dict(self) -> dict:
        v = self.effective_verdict
        out = {
            "family": self.family,
            "params": {k: str(val) for k, val in self.params.items()},
            "V": str(self.candidate.V),
            "s": str(self.candidate.s),
            "Ms": str(self.Ms),
            "verdict": {"sign": self.verdict.sign.value, "trace": list(self.verdict.trace)},
            "L": self.L,
            "N": self.N,
            "bound": self.bound if self.certified else None,
            "regions": [r.to_dict() for r in self.regions],
            "certified": self.certified,
            "route": self.route,
        }
        if self.route == ROUTE_COFACTOR:
            out["cofactor"] = {"k": str(self.cofactor), "sign": v.sign.value, "trace": list(v.trace)}
        if self.topology is not None:
            out["topology"] = {"method": self.topology.method, "trace": list(self.topology.trace)}
        if self.notes:
            out["notes"] = list(self.notes)
        return out


def _probe_outside(V: ExtExpr, comp) -> tuple:
    # first point right of the component where V is clearly nonzero
    x0, x1, y0, y1 = comp.box
    ym = 0.5 * (y0 + y1)
    span = max(x1 - x0, y1 - y0, 1e-3)
    for k in range(1, 40):
        p = (x1 + span * 1e-3 * 1.5 ** k, ym)
        if abs(float(V.evaluate(*p))) > 1e-12:
            return p
    return (x1 + span, ym)


def certificate(X: VectorField, candidate: DulacCandidate, box=None, family: str | None = None,
                params: dict | None = None, seed: int = 0) -> DulacCertificate:
    """Compose ``M_s``, its sign, ``L(V)`` and ``N`` into a bound on the number of limit cycles.

    When ``M_s`` changes sign but ``V`` divides it, the cofactor ``k = M_s/V``
    is certified instead: ``|V|^(-1/s)`` is then a Dulac function on every
    component of ``{V != 0}`` and the stability sign is ``-sign(k)``.
    """
    from .topology import TopologyError, count_bounded_components, invariant_ovals

    Ms = compute_Ms(X, candidate)
    verdict = certify_sign(Ms, seed=seed)
    cert = DulacCertificate(X, candidate, Ms, verdict, None, None, family=family, params=dict(params or {}))
    if not verdict.certified:
        rv = rigid_sign(X, Ms, seed)
        if rv is not None:
            verdict = cert.verdict = rv
    if not verdict.certified:
        k = invariant_cofactor_of(Ms, candidate.V)
        if k is not None and not k.is_zero():
            kv = certify_sign(k, seed=seed)
            cert.cofactor, cert.cofactor_verdict = k, kv
            if kv.certified:
                cert.route = ROUTE_COFACTOR
                cert.notes.append(f"M_s = V * ({k}); cofactor has constant sign {kv.sign.value}")
    try:
        cert.topology = count_bounded_components(candidate.V, box=box)
    except TopologyError as exc:
        cert.notes.append(f"topology: {exc}")
    cert.ovals = invariant_ovals(X, candidate.V, cert.topology)
    if cert.topology is not None:
        for comp in cert.topology.bounded_components:
            p = _probe_outside(candidate.V, comp)
            cert.regions.append(Region(tuple(comp.box), cert.stability_at(p), p))
    if not cert.certified:
        cert.notes.append("uncertified: no bound is claimed")
    return cert


def best_certificate(X: VectorField, candidates, **kw) -> DulacCertificate | None:
    """Certified report with the smallest bound, else the first report."""
    certs = [certificate(X, c, **kw) for c in candidates]
    ok = [c for c in certs if c.certified]
    if ok:
        return min(ok, key=lambda c: c.bound)
    return certs[0] if certs else None
