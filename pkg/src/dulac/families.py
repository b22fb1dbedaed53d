"""Registry of concrete systems with their Dulac candidates and predicted bounds."""

from __future__ import annotations

import functools
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable

from .bendixson import WILC2_A, WILC2_B, WILC2_P, WILC2_Q, DulacCandidate, curvature_K
from .expr import ExtExpr, as_fraction, parse
from .field import VectorField
from .numerics.cycles import Section


class UnknownFamilyError(KeyError):
    pass


class ParameterDomainError(ValueError):
    pass


@dataclass(frozen=True)
class Param:
    name: str
    default: object
    doc: str = ""
    check: Callable[[Fraction], str | None] | None = None  # returns an error message or None
    integer: bool = False


@dataclass(frozen=True)
class Prediction:
    bound: int | None  # predicted maximal number of limit cycles (None: no claim)
    statement: str
    cycles: tuple = ()  # expected (location, stability) pairs when known
    extra: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {"bound": self.bound, "statement": self.statement, "cycles": [list(c) for c in self.cycles],
                **{k: v for k, v in self.extra.items()}}


@dataclass(frozen=True)
class FamilyInstance:
    name: str
    params: dict
    field: VectorField
    candidates: tuple
    prediction: Prediction
    section: Section
    r_range: tuple
    box: tuple  # plotting / cycle-containment box (xmin, xmax, ymin, ymax)


@dataclass(frozen=True)
class FamilySpec:
    name: str
    summary: str
    params: tuple
    build: Callable[[dict], VectorField]
    candidates: Callable[[dict], list]
    predict: Callable[[dict], Prediction]
    section: Callable[[dict], Section] = lambda p: Section()
    r_range: Callable[[dict], tuple] = lambda p: (0.05, 4.0)
    box: tuple = (-4.0, 4.0, -4.0, 4.0)

    def bind(self, given: dict | None = None) -> dict:
        given = dict(given or {})
        names = {p.name for p in self.params}
        unknown = set(given) - names
        if unknown:
            raise ParameterDomainError(f"{self.name}: unknown parameter(s) {sorted(unknown)}; expected {sorted(names)}")
        out = {}
        for p in self.params:
            v = as_fraction(given.get(p.name, p.default))
            if p.integer and v.denominator != 1:
                raise ParameterDomainError(f"{self.name}: {p.name} must be an integer, got {v}")
            if p.check is not None:
                msg = p.check(v)
                if msg:
                    raise ParameterDomainError(f"{self.name}: {msg}")
            out[p.name] = v
        return out

    def get(self, params: dict | None = None) -> FamilyInstance:
        p = self.bind(params)
        X = self.build(p)
        X = VectorField(X.P, X.Q, tuple(sorted(p.items())), self.name)
        return FamilyInstance(self.name, p, X, tuple(self.candidates(p)), self.predict(p), self.section(p),
                              self.r_range(p), self.box)

    def schema(self) -> dict:
        return {
            "name": self.name,
            "summary": self.summary,
            "params": [{"name": p.name, "default": str(p.default), "doc": p.doc, "integer": p.integer}
                       for p in self.params],
        }


def _q(v) -> str:
    return f"({as_fraction(v)})"


def _field(P: str, Q: str) -> VectorField:
    return VectorField(parse(P), parse(Q))


# ---------------------------------------------------------------------------
# generalized Lienard systems  x' = y - |y|^m F(x),  y' = -G'(x)/2


def lieg_field(F, G, m: int) -> VectorField:
    F, G = ExtExpr.coerce(F), ExtExpr.coerce(G)
    w = ExtExpr.abs_y(m) if m else ExtExpr.coerce(1)
    return VectorField(ExtExpr.var("y") - w * F, -G.diff("x") / 2)


def lieg_candidate(F, G, m: int) -> DulacCandidate:
    """``V = G + y^2 - y |y|^m F`` with ``s = 1``."""
    F, G = ExtExpr.coerce(F), ExtExpr.coerce(G)
    y = ExtExpr.var("y")
    w = ExtExpr.abs_y(m) if m else ExtExpr.coerce(1)
    return DulacCandidate(G + y * y - y * w * F, 1, "V = G + y^2 - y|y|^m F, s = 1")


def family_iv_wilson(a, b) -> VectorField:
    """``F = a(x^3/3 - x)``, ``G = x^2 - (a^2/8 + 6b) x^4 + (a^2/48 + b) x^6``, ``m = 0``."""
    F, G = _iv_FG(a, b)
    return lieg_field(F, G, 0)


def _iv_FG(a, b):
    a, b = _q(a), _q(b)
    F = parse(f"{a}*(x^3/3 - x)")
    G = parse(f"x^2 - ({a}^2/8 + 6*{b})*x^4 + ({a}^2/48 + {b})*x^6")
    return F, G


def wilson_cycle_curve(a) -> ExtExpr:
    """Algebraic limit cycle of the ``b = 0`` member of family (iv)."""
    a = _q(a)
    return parse(f"y^2 - ({a}/6)*x^3*y + (1/144)*({a}^2*x^6 + 144*x^2 - 576)")


# ---------------------------------------------------------------------------
# wilc family and its scenario table


def wil_B(b, c=2, k: int = 1) -> ExtExpr:
    """``B = x int_0^x W(t)/t dt - b x`` for ``W = c x^(2k)``."""
    c, b = as_fraction(c), as_fraction(b)
    return parse(f"({c / (2 * k)})*x^{2 * k + 1} - {_q(b)}*x")


def wil_field(B) -> VectorField:
    B = ExtExpr.coerce(B)
    x, y = ExtExpr.var("x"), ExtExpr.var("y")
    return VectorField(y - (x * x - 1) * B, -x * (1 + y * B))


def wil_candidate(B) -> DulacCandidate:
    B = ExtExpr.coerce(B)
    x, y = ExtExpr.var("x"), ExtExpr.var("y")
    return DulacCandidate((1 - x * x - y * y) * (x * x + y * y + B * y), 1,
                          "V = (1 - x^2 - y^2)(x^2 + y^2 + B y), s = 1")


CIRCLE = parse("x^2 + y^2 - 1")


@functools.lru_cache(maxsize=None)
def wilc_constants() -> dict:
    """``b_``, ``b*`` and ``1 - b_`` (root isolation and quadrature, computed once)."""
    from .numerics.roots import b_lower, b_star
    lo = b_lower()
    return {"b_lower": lo, "b_star": b_star(), "b_upper": 1 - lo}


@dataclass(frozen=True)
class Scenario:
    case: str
    count: int
    cycles: tuple  # (where, stability)
    circle_is_cycle: bool

    def to_dict(self) -> dict:
        return {"case": self.case, "count": self.count, "cycles": [list(c) for c in self.cycles],
                "circle_is_cycle": self.circle_is_cycle}


def scenario_table_wilc(b, star_tol: float = 1e-9) -> Scenario:
    """Predicted cycle configuration of the wilc family at ``b``."""
    b = float(b)
    k = wilc_constants()
    lo, star, hi = k["b_lower"], k["b_star"], k["b_upper"]
    if b <= lo:
        return Scenario("i", 0, (), False)
    if b <= 0:
        return Scenario("ii", 1, (("circle", "attractor"),), True)
    if abs(b - star) <= star_tol:
        return Scenario("iv", 1, (("circle", "near-degenerate"),), True)
    if b < star:
        return Scenario("iii", 2, (("inside", "repeller"), ("circle", "attractor")), True)
    if b < hi:
        return Scenario("v", 2, (("circle", "repeller"), ("outside", "attractor")), True)
    return Scenario("vi", 1, (("outside", "attractor"),), False)


def case_boundaries() -> list[float]:
    k = wilc_constants()
    return [k["b_lower"], 0.0, k["b_star"], k["b_upper"]]


# ---------------------------------------------------------------------------
# vil family


def vil_candidate(m: int, lam) -> DulacCandidate:
    """``V = exp(lam^2 y^(2m) / (9m)) (3 + lam x y |y|^(m-2))``, ``s = 1/3``."""
    lam = as_fraction(lam)
    x, y = ExtExpr.var("x"), ExtExpr.var("y")
    E = ExtExpr.exp(parse(f"({lam * lam / (9 * m)})*y^{2 * m}").as_poly())
    return DulacCandidate(E * (3 + lam * x * y * ExtExpr.abs_y(m - 2)), Fraction(1, 3),
                          "V = exp(lam^2 y^(2m)/(9m)) (3 + lam x y |y|^(m-2)), s = 1/3")


def vil_threshold(m: int) -> float:
    from .certify import lambda_threshold
    return lambda_threshold(m)


def _check_m_vil(v):
    if v == 1:
        return "m = 1 is excluded: the field is not C^1"
    if v < 2:
        return f"m must be an integer >= 2, got {v}"
    return None


def _vil_predict(p):
    m, lam = int(p["m"]), p["lambda"]
    thr = vil_threshold(m)
    zero = math.sqrt((m + 4) / 3)
    if lam == 0:
        return Prediction(None, "lambda = 0 is a linear center", extra={"threshold": thr})
    if abs(float(lam)) >= thr:
        return Prediction(0, f"no limit cycle for |lambda| >= {thr:.6g}", extra={"threshold": thr})
    return Prediction(None, f"for small |lambda| one cycle near r = {zero:.6g}; none for |lambda| >= {thr:.6g}",
                      extra={"threshold": thr, "melnikov_zero": zero})


# ---------------------------------------------------------------------------
# rigid systems


def rigid_field(F) -> VectorField:
    F = ExtExpr.coerce(F)
    x, y = ExtExpr.var("x"), ExtExpr.var("y")
    return VectorField(-y + x * F, x + y * F)


def rigid_candidate(F) -> DulacCandidate:
    """``V = (x^2+y^2)(x F F_x + y F F_y + x F_y - y F_x - 1 - F^2)``, ``s = 1``."""
    F = ExtExpr.coerce(F)
    x, y = ExtExpr.var("x"), ExtExpr.var("y")
    Fx, Fy = F.diff("x"), F.diff("y")
    V = (x * x + y * y) * (x * F * Fx + y * F * Fy + x * Fy - y * Fx - 1 - F * F)
    return DulacCandidate(V, 1, "V = K (curvature numerator), s = 1")


def _rigid_cubic_F(p) -> ExtExpr:
    return parse("{a} + {b}*x + {c}*y + {d}*x^2 + {e}*x*y + {h}*y^2".format(**{k: _q(v) for k, v in p.items()}))


def _rigid_fg_F(p) -> ExtExpr:
    f = "{f0} + {f1}*x + {f2}*x^2 + {f3}*x^3 + {f4}*x^4".format(**{k: _q(p[k]) for k in ("f0", "f1", "f2", "f3", "f4")})
    g = "{g1}*y + {g2}*y^2 + {g4}*y^4".format(**{k: _q(p[k]) for k in ("g1", "g2", "g4")})
    return parse(f"{f} + {g}")


# ---------------------------------------------------------------------------
# registry

def _nonneg(name):
    return lambda v: None if v >= 0 else f"{name} must be >= 0"


def _wil_params_check_k(v):
    return None if v >= 1 else "k must be an integer >= 1"


def _p(name, default, doc="", check=None, integer=False):
    return Param(name, as_fraction(default), doc, check, integer)


def _eq13a_FG(p):
    a, b = _q(p["a"]), _q(p["b"])
    F = parse(f"{b}*x^3*(x-{a})*(2*x-3*{a})")
    G = parse(f"x^2*(x-{a})^2")
    return F, G


def _five_FG(p):
    c = _q(p["c"])
    return parse(f"{c}*x^3*(1-x)*(2-x)^3"), parse("x^2*(1-x)^2*(2-x)^2")


def _massera_F(p):
    return parse("{a1}*x + {a3}*x^3 + {a5}*x^5".format(**{k: _q(v) for k, v in p.items()}))


def _massera_K(p) -> DulacCandidate:
    F = _massera_F(p)
    X = VectorField(parse("y") - F, parse("-x"))
    return DulacCandidate(curvature_K(X), 1, "V = K (curvature numerator), s = 1")


def _rigid_cubic_predict(p):
    disc = 4 * p["d"] * p["h"] - p["e"] ** 2
    if disc > 0:
        return Prediction(1, "at most one limit cycle since 4dh - e^2 > 0", extra={"4dh-e^2": str(disc)})
    return Prediction(None, "no claim: 4dh - e^2 <= 0", extra={"4dh-e^2": str(disc)})


def _rigid_fg_predict(p):
    f2, f3, f4, g2, g4 = (p[k] for k in ("f2", "f3", "f4", "g2", "g4"))
    if f4 > 0:
        f_ok = f2 >= 0 and f3 >= 0 and 3 * f3 * f3 <= 8 * f2 * f4  # f'' = 2 f2 + 6 f3 x + 12 f4 x^2 >= 0
    else:
        f_ok = f3 == 0 and f2 > 0
    g_ok = g2 >= 0 and g4 >= 0 and (g2 or g4)
    if f_ok and g_ok:
        return Prediction(2, "at most two limit cycles (f'' >= 0, g'' >= 0)")
    return Prediction(None, "no claim: convexity hypotheses on f, g not met")


def _wilc_predict(p):
    sc = scenario_table_wilc(p["b"])
    return Prediction(sc.count, f"case ({sc.case}): at most two limit cycles counting multiplicity",
                      sc.cycles, {"case": sc.case, "circle_is_cycle": sc.circle_is_cycle})


FAMILIES: dict[str, FamilySpec] = {}


def register(spec: FamilySpec) -> FamilySpec:
    FAMILIES[spec.name] = spec
    return spec


register(FamilySpec(
    "vdp", "van der Pol: x' = y, y' = -x - lambda (x^2 - 1) y",
    (_p("lambda", 1, "damping"),),
    lambda p: _field("y", f"-x - {_q(p['lambda'])}*(x^2-1)*y"),
    lambda p: [DulacCandidate(CIRCLE, 2, "V = x^2 + y^2 - 1, s = 2")],
    lambda p: Prediction(1 if p["lambda"] != 0 else None, "at most one limit cycle, hyperbolic"),
    r_range=lambda p: (0.1, 4.0),
))

register(FamilySpec(
    "vdp-lienard", "van der Pol in Lienard form: x' = y - lambda (x^3/3 - x), y' = -x",
    (_p("lambda", 1, "damping"),),
    lambda p: _field(f"y - {_q(p['lambda'])}*(x^3/3 - x)", "-x"),
    lambda p: [
        DulacCandidate(parse(f"x^2 + y^2 - y*x*{_q(p['lambda'])}*(x^2/3 - 1)"), 1,
                       "V = C^2 + y^2 - y C B with C = x, B = lambda (x^2/3 - 1), s = 1"),
        DulacCandidate(curvature_K(_field(f"y - {_q(p['lambda'])}*(x^3/3 - x)", "-x")), 1,
                       "V = K (curvature numerator), s = 1"),
    ],
    lambda p: Prediction(1 if p["lambda"] != 0 else None, "at most one limit cycle, hyperbolic"),
    r_range=lambda p: (0.1, 4.0),
))

register(FamilySpec(
    "wilson-ext", "x' = y - (x^2-1) B, y' = -x (1 + y B) with B = x int_0^x W(t)/t dt - b x, W = c x^(2k)",
    (_p("b", 0, "linear coefficient of B"), _p("c", 2, "W = c x^(2k)"),
     _p("k", 1, "W = c x^(2k)", _wil_params_check_k, True)),
    lambda p: wil_field(wil_B(p["b"], p["c"], int(p["k"]))),
    lambda p: [wil_candidate(wil_B(p["b"], p["c"], int(p["k"])))],
    lambda p: Prediction(None, "at most L + N limit cycles; stability by the sign of V W off {V = 0}"),
    r_range=lambda p: (0.05, 3.0),
))

register(FamilySpec(
    "wilc", "x' = y - (x^2-1)(x^3 - b x), y' = -x (1 + y (x^3 - b x))",
    (_p("b", Fraction(1, 2), "parameter of B = x^3 - b x"),),
    lambda p: wil_field(wil_B(p["b"])),
    lambda p: [wil_candidate(wil_B(p["b"])), DulacCandidate(CIRCLE, Fraction(1, 3), "V = x^2 + y^2 - 1, s = 1/3")],
    _wilc_predict,
    r_range=lambda p: (0.05, 3.0),
))

register(FamilySpec(
    "wilc-lienard", "classical Lienard form of the wilc family (ninth degree)",
    (_p("b", Fraction(1, 2)),),
    lambda p: VectorField(parse(WILC2_P).subs(p), parse(WILC2_Q).subs(p)),
    lambda p: [DulacCandidate(parse(WILC2_A).subs(p) * parse(WILC2_B).subs(p), 1, "V = A B, s = 1")],
    lambda p: Prediction(None, "M_1 = 2 x^4 A^2 >= 0"),
    r_range=lambda p: (0.05, 3.0),
))

register(FamilySpec(
    "lienard-iv", "x' = y - a (x^3/3 - x), y' = -G'/2 with G = x^2 - (a^2/8 + 6b) x^4 + (a^2/48 + b) x^6",
    (_p("a", 1), _p("b", 0)),
    lambda p: family_iv_wilson(p["a"], p["b"]),
    lambda p: [lieg_candidate(*_iv_FG(p["a"], p["b"]), 0)],
    lambda p: Prediction(None, "H = a (16 - 3a^2 - 144b)/12 x^4; algebraic cycle at b = 0 when |a| < 2",
                         extra={"H_coefficient": str(p["a"] * (16 - 3 * p["a"] ** 2 - 144 * p["b"]) / 12)}),
    r_range=lambda p: (0.05, 4.0),
))

register(FamilySpec(
    "eq1-3", "x' = y + (1/3) x^3 (x-1)(2x-3), y' = -x (x-1)(2x-1)",
    (),
    lambda p: _field("y + (1/3)*x^3*(x-1)*(2*x-3)", "-x*(x-1)*(2*x-1)"),
    lambda p: [lieg_candidate(parse("-(1/3)*x^3*(x-1)*(2*x-3)"), parse("x^2*(x-1)^2"), 0)],
    lambda p: Prediction(1, "at most one limit cycle, surrounding the three equilibria; "
                            "the sign of -V M_1 says every cycle off {V = 0} repels",
                         (("around all equilibria", "repeller"),)),
    section=lambda p: Section((1.0, 0.0), 0.0),
    r_range=lambda p: (0.02, 3.0),
    box=(-1.0, 2.0, -2.0, 2.0),
))

register(FamilySpec(
    "eq1-3a", "x' = y - b x^3 (x-a)(2x-3a), y' = -x (x-a)(2x-a)",
    (_p("a", 1), _p("b", Fraction(-1, 3))),
    lambda p: lieg_field(*_eq13a_FG(p), 0),
    lambda p: [lieg_candidate(*_eq13a_FG(p), 0)],
    lambda p: Prediction(1 if p["a"] != 0 and p["b"] != 0 else None, "at most one limit cycle"),
    section=lambda p: Section((float(p["a"]), 0.0), 0.0),
    r_range=lambda p: (0.02, 3.0),
))

register(FamilySpec(
    "lienard-five", "x' = y - c x^3 (1-x)(2-x)^3, y' = -G'/2 with G = x^2 (1-x)^2 (2-x)^2",
    (_p("c", 1, "|c| < 2", lambda v: None if abs(v) < 2 else "|c| must be < 2"),),
    lambda p: lieg_field(*_five_FG(p), 0),
    lambda p: [lieg_candidate(*_five_FG(p), 0)],
    lambda p: Prediction(5 if p["c"] != 0 else None, "H = 8 c x^4 (1-x)^4 (2-x)^4; at most as many cycles as zeros of G'"),
    section=lambda p: Section((1.0, 0.0), 0.0),
    r_range=lambda p: (0.02, 3.0),
))

register(FamilySpec(
    "vil", "x' = y - lambda |y|^m (x^3 - x), y' = -x",
    (_p("m", 2, "integer >= 2", _check_m_vil, True), _p("lambda", 1)),
    lambda p: VectorField(parse("y") - ExtExpr.abs_y(int(p["m"])) * parse(f"{_q(p['lambda'])}*(x^3 - x)"), parse("-x")),
    lambda p: [vil_candidate(int(p["m"]), p["lambda"])],
    _vil_predict,
    r_range=lambda p: (0.05, 4.0),
))

register(FamilySpec(
    "massera", "x' = y - F(x), y' = -x with F = a1 x + a3 x^3 + a5 x^5",
    (_p("a1", -1), _p("a3", Fraction(1, 3)), _p("a5", 0)),
    lambda p: VectorField(parse("y") - _massera_F(p), parse("-x")),
    lambda p: [_massera_K(p)],
    lambda p: Prediction(1 if (p["a3"] * p["a5"] >= 0 and (p["a3"] or p["a5"])) else None,
                         "at most one limit cycle when x F''(x) keeps its sign"),
    r_range=lambda p: (0.1, 4.0),
))

register(FamilySpec(
    "rigid-cubic", "x' = -y + x F, y' = x + y F with F = a + b x + c y + d x^2 + e x y + h y^2",
    (_p("a", Fraction(1, 2)), _p("b", 0), _p("c", 0), _p("d", -1), _p("e", 0), _p("h", -1)),
    lambda p: rigid_field(_rigid_cubic_F(p)),
    lambda p: [rigid_candidate(_rigid_cubic_F(p))],
    _rigid_cubic_predict,
    r_range=lambda p: (0.05, 3.0),
))

register(FamilySpec(
    "rigid-fg", "x' = -y + x F, y' = x + y F with F = f(x) + g(y)",
    (_p("f0", -1), _p("f1", 0), _p("f2", 1), _p("f3", 0), _p("f4", 0), _p("g1", 0), _p("g2", 1), _p("g4", 0)),
    lambda p: rigid_field(_rigid_fg_F(p)),
    lambda p: [rigid_candidate(_rigid_fg_F(p))],
    _rigid_fg_predict,
    r_range=lambda p: (0.05, 3.0),
))

register(FamilySpec(
    "linear-center", "x' = y, y' = -x",
    (),
    lambda p: _field("y", "-x"),
    lambda p: [DulacCandidate(parse("x^2 + y^2"), 1, "V = x^2 + y^2, s = 1 (M_s vanishes identically)")],
    lambda p: Prediction(None, "continuum of periodic orbits: no isolated cycle"),
    r_range=lambda p: (0.05, 4.0),
))


def get(name: str, params: dict | None = None) -> FamilyInstance:
    try:
        spec = FAMILIES[name]
    except KeyError:
        raise UnknownFamilyError(f"unknown family {name!r}; known: {', '.join(sorted(FAMILIES))}") from None
    return spec.get(params)


def names() -> list[str]:
    return list(FAMILIES)
