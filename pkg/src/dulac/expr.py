"""Exact symbolic layer.

``Poly`` is a sparse multivariate polynomial with rational coefficients in
the state variables ``x``, ``y`` and any number of named parameters.
``ExtExpr`` extends it with a factor ``|y|`` and ``exp(q)`` factors::

    sum_k  c_k(x, y, params) * |y|**a_k * exp(q_k(x, y, params))

Canonical form keeps ``a_k`` in ``{0, 1}``: ``|y|**m`` is stored as
``y**(m - 1) * |y|`` for odd ``m`` and as the polynomial ``y**m`` for even
``m``, so structural equality coincides with equality of functions.
"""

from __future__ import annotations

import ast
import keyword
import math
import re
from fractions import Fraction
from numbers import Rational
from types import MappingProxyType
from typing import Iterable, Iterator, Mapping, NamedTuple, Union

import numpy as np

STATE_VARS = ("x", "y")

Monomial = tuple  # tuple[tuple[str, int], ...], sorted by symbol name
Scalar = Union[int, Fraction]


class NonSmoothError(ValueError):
    """Differentiation of a term that is not differentiable on y = 0."""


class ParseError(ValueError):
    pass


def as_fraction(value) -> Fraction:
    """Exact rational from int, Fraction, decimal string or float."""
    if isinstance(value, Fraction):
        return value
    if isinstance(value, (int, Rational)):
        return Fraction(value)
    if isinstance(value, str):
        return Fraction(value.strip())
    if isinstance(value, (float, np.floating)):
        # shortest repr, so 3.5 -> 7/2 and 0.1 -> 1/10
        value = float(value)
        if not math.isfinite(value):
            raise ValueError(f"cannot convert {value!r} to a rational")
        return Fraction(repr(value))
    if isinstance(value, np.integer):
        return Fraction(int(value))
    raise TypeError(f"cannot convert {value!r} to a rational")


def _mono_mul(a: Monomial, b: Monomial) -> Monomial:
    if not a:
        return b
    if not b:
        return a
    d = dict(a)
    for v, e in b:
        d[v] = d.get(v, 0) + e
    return tuple(sorted(d.items()))


def _sym_order(name: str):
    return (STATE_VARS.index(name), "") if name in STATE_VARS else (2, name)


class Poly:
    """Immutable sparse polynomial over Q."""

    __slots__ = ("_terms", "_hash")

    def __init__(self, terms: Mapping[Monomial, Scalar] | None = None):
        clean = {}
        if terms:
            for m, c in terms.items():
                if c:
                    clean[m] = Fraction(c)
        self._terms = clean
        self._hash = None

    # -- construction ------------------------------------------------------
    @classmethod
    def const(cls, c) -> "Poly":
        return cls({(): as_fraction(c)})

    @classmethod
    def var(cls, name: str, power: int = 1) -> "Poly":
        if power == 0:
            return cls.const(1)
        return cls({((name, power),): Fraction(1)})

    @classmethod
    def from_univariate(cls, coeffs: Iterable[Scalar], var: str = "x") -> "Poly":
        """Dense coefficient list, lowest degree first."""
        return cls({((var, k),) if k else (): c for k, c in enumerate(coeffs)})

    @staticmethod
    def coerce(other) -> "Poly":
        if isinstance(other, Poly):
            return other
        return Poly.const(other)

    # -- inspection --------------------------------------------------------
    @property
    def terms(self) -> Mapping[Monomial, Fraction]:
        return MappingProxyType(self._terms)

    def is_zero(self) -> bool:
        return not self._terms

    def is_constant(self) -> bool:
        return all(not m for m in self._terms)

    def constant_value(self) -> Fraction:
        if not self.is_constant():
            raise ValueError(f"{self} is not constant")
        return self._terms.get((), Fraction(0))

    def variables(self) -> set[str]:
        return {v for m in self._terms for v, _ in m}

    def params(self) -> set[str]:
        return self.variables() - set(STATE_VARS)

    def degree(self, var: str | None = None) -> int:
        if not self._terms:
            return -1
        if var is None:
            return max(sum(e for _, e in m) for m in self._terms)
        return max(dict(m).get(var, 0) for m in self._terms)

    def valuation(self, var: str) -> int:
        """Smallest exponent of ``var`` over all monomials."""
        if not self._terms:
            return 0
        return min(dict(m).get(var, 0) for m in self._terms)

    def coeffs_in(self, var: str) -> dict[int, "Poly"]:
        """Collect by powers of ``var``: ``{k: coefficient of var**k}``."""
        out: dict[int, dict] = {}
        for m, c in self._terms.items():
            k = 0
            rest = []
            for v, e in m:
                if v == var:
                    k = e
                else:
                    rest.append((v, e))
            out.setdefault(k, {})[tuple(rest)] = c
        return {k: Poly(t) for k, t in out.items()}

    def univariate(self, var: str) -> list[Fraction]:
        """Dense coefficients in ``var``; raises if other symbols occur."""
        if self.variables() - {var}:
            raise ValueError(f"{self} is not univariate in {var}")
        if not self._terms:
            return []
        coeffs = [Fraction(0)] * (self.degree(var) + 1)
        for m, c in self._terms.items():
            coeffs[m[0][1] if m else 0] = c
        return coeffs

    def leading_term(self) -> tuple[Monomial, Fraction]:
        m = max(self._terms, key=lambda mm: (sum(e for _, e in mm), mm))
        return m, self._terms[m]

    # -- arithmetic --------------------------------------------------------
    def __add__(self, other):
        other = Poly.coerce(other)
        out = dict(self._terms)
        for m, c in other._terms.items():
            out[m] = out.get(m, 0) + c
        return Poly(out)

    __radd__ = __add__

    def __neg__(self):
        return Poly({m: -c for m, c in self._terms.items()})

    def __sub__(self, other):
        return self + (-Poly.coerce(other))

    def __rsub__(self, other):
        return Poly.coerce(other) - self

    def __mul__(self, other):
        if not isinstance(other, Poly):
            c = as_fraction(other)
            return Poly({m: v * c for m, v in self._terms.items()})
        out: dict = {}
        for m1, c1 in self._terms.items():
            for m2, c2 in other._terms.items():
                m = _mono_mul(m1, m2)
                out[m] = out.get(m, 0) + c1 * c2
        return Poly(out)

    __rmul__ = __mul__

    def __truediv__(self, other):
        c = as_fraction(other)
        return self * (1 / c)

    def __pow__(self, n: int):
        if n < 0:
            raise ValueError("negative powers are not polynomials")
        result, base = Poly.const(1), self
        while n:
            if n & 1:
                result = result * base
            base = base * base
            n >>= 1
        return result

    def diff(self, var: str) -> "Poly":
        out: dict = {}
        for m, c in self._terms.items():
            d = dict(m)
            e = d.get(var, 0)
            if not e:
                continue
            if e == 1:
                del d[var]
            else:
                d[var] = e - 1
            key = tuple(sorted(d.items()))
            out[key] = out.get(key, 0) + c * e
        return Poly(out)

    def subs(self, bindings: Mapping[str, object]) -> "Poly":
        """Substitute rationals or polynomials for symbols."""
        if not bindings:
            return self
        values = {k: (v if isinstance(v, Poly) else as_fraction(v)) for k, v in bindings.items()}
        out = Poly()
        acc: dict = {}
        for m, c in self._terms.items():
            factor: object = c
            rest = []
            for v, e in m:
                if v in values:
                    val = values[v]
                    factor = factor * (val ** e)
                else:
                    rest.append((v, e))
            if isinstance(factor, Poly):
                out = out + factor * Poly({tuple(rest): 1})
            else:
                key = tuple(rest)
                acc[key] = acc.get(key, 0) + factor
        return out + Poly(acc)

    def shift_down(self, var: str, k: int = 1) -> "Poly":
        """Exact division by ``var**k``; raises if not divisible."""
        if self.valuation(var) < k and self._terms:
            raise ValueError(f"{self} is not divisible by {var}^{k}")
        out = {}
        for m, c in self._terms.items():
            d = dict(m)
            d[var] -= k
            if not d[var]:
                del d[var]
            out[tuple(sorted(d.items()))] = c
        return Poly(out)

    def evaluate(self, values: Mapping[str, object]):
        """Evaluate at a point; exact when all values are rational."""
        total = 0
        for m, c in self._terms.items():
            t = c
            for v, e in m:
                t = t * values[v] ** e
            total = total + t
        return total

    # -- comparison --------------------------------------------------------
    def __eq__(self, other):
        if isinstance(other, Poly):
            return self._terms == other._terms
        if isinstance(other, (int, Fraction)):
            return self._terms == ({(): Fraction(other)} if other else {})
        return NotImplemented

    def __hash__(self):
        if self._hash is None:
            self._hash = hash(frozenset(self._terms.items()))
        return self._hash

    def __bool__(self):
        return bool(self._terms)

    # -- conversion --------------------------------------------------------
    def to_sympy(self):
        import sympy

        expr = sympy.Integer(0)
        for m, c in self._terms.items():
            t = sympy.Rational(c.numerator, c.denominator)
            for v, e in m:
                t = t * sympy.Symbol(v) ** e
            expr += t
        return expr

    @classmethod
    def from_sympy(cls, expr) -> "Poly":
        import sympy

        expr = sympy.expand(expr)
        syms = sorted(expr.free_symbols, key=lambda s: s.name)
        if not syms:
            r = sympy.Rational(expr)
            return cls.const(Fraction(int(r.p), int(r.q)))
        poly = sympy.Poly(expr, *syms)
        out = {}
        for exps, c in poly.terms():
            r = sympy.Rational(c)
            key = tuple((s.name, e) for s, e in zip(syms, exps) if e)
            out[key] = Fraction(int(r.p), int(r.q))
        return cls(out)

    def code(self) -> str:
        """Python source evaluating the polynomial (symbols as names)."""
        if not self._terms:
            return "0.0"
        parts = []
        for m, c in sorted(self._terms.items(), key=lambda t: _mono_sort_key(t[0])):
            factors = [repr(float(c))]
            for v, e in m:
                factors.append(v if e == 1 else f"{v}**{e}")
            parts.append("*".join(factors))
        return "(" + " + ".join(parts) + ")"

    def __str__(self):
        if not self._terms:
            return "0"
        out = []
        for m, c in sorted(self._terms.items(), key=lambda t: _mono_sort_key(t[0]), reverse=True):
            body = "*".join(v if e == 1 else f"{v}^{e}" for v, e in sorted(m, key=lambda t: _sym_order(t[0])))
            sign = "-" if c < 0 else "+"
            a = abs(c)
            if not body:
                txt = str(a)
            elif a == 1:
                txt = body
            else:
                txt = f"{a}*{body}"
            out.append((sign, txt))
        s = ("-" if out[0][0] == "-" else "") + out[0][1]
        for sign, txt in out[1:]:
            s += f" {sign} {txt}"
        return s

    def __repr__(self):
        return f"Poly({str(self)!r})"


def _mono_sort_key(m: Monomial):
    return (sum(e for _, e in m), tuple((_sym_order(v), e) for v, e in m))


X = Poly.var("x")
Y = Poly.var("y")


class ExtTerm(NamedTuple):
    coeff: Poly
    abs_exp: int
    exp_arg: Poly


class ExtExpr:
    """Immutable sum of ``coeff * |y|**abs_exp * exp(exp_arg)`` terms."""

    __slots__ = ("_terms", "_hash")

    def __init__(self, terms: Mapping[tuple[int, Poly], Poly] | None = None):
        clean: dict = {}
        if terms:
            for (a, q), c in terms.items():
                c = Poly.coerce(c)
                if a >= 2:
                    c = c * Poly.var("y", a - a % 2)
                    a = a % 2
                key = (a, q)
                clean[key] = clean.get(key, Poly()) + c
        self._terms = {k: v for k, v in clean.items() if v}
        self._hash = None

    # -- construction ------------------------------------------------------
    @classmethod
    def coerce(cls, value) -> "ExtExpr":
        if isinstance(value, ExtExpr):
            return value
        return cls({(0, Poly()): Poly.coerce(value)})

    @classmethod
    def abs_y(cls, m: int = 1) -> "ExtExpr":
        if m < 0:
            raise ValueError("negative power of |y|")
        return cls({(m, Poly()): Poly.const(1)})

    @classmethod
    def exp(cls, arg) -> "ExtExpr":
        return cls({(0, Poly.coerce(arg)): Poly.const(1)})

    @classmethod
    def var(cls, name: str) -> "ExtExpr":
        return cls.coerce(Poly.var(name))

    # -- inspection --------------------------------------------------------
    def terms(self) -> Iterator[ExtTerm]:
        for (a, q), c in sorted(self._terms.items(), key=lambda t: (t[0][0], str(t[0][1]))):
            yield ExtTerm(c, a, q)

    @property
    def grouped(self) -> Mapping[tuple[int, Poly], Poly]:
        return MappingProxyType(self._terms)

    def is_identically_zero(self) -> bool:
        return not self._terms

    is_zero = is_identically_zero

    def is_polynomial(self) -> bool:
        return all(a == 0 and not q for a, q in self._terms)

    def has_abs(self) -> bool:
        return any(a for a, _ in self._terms)

    def as_poly(self) -> Poly:
        if not self._terms:
            return Poly()
        if not self.is_polynomial():
            raise ValueError(f"{self} is not a polynomial")
        return self._terms[(0, Poly())]

    def variables(self) -> set[str]:
        out: set[str] = set()
        for (a, q), c in self._terms.items():
            out |= c.variables() | q.variables()
            if a:
                out.add("y")
        return out

    def params(self) -> set[str]:
        return self.variables() - set(STATE_VARS)

    def smoothness(self) -> float:
        """Differentiability class: ``c * |y|`` with ``y**k | c`` is C^k."""
        k = math.inf
        for (a, _), c in self._terms.items():
            if a:
                k = min(k, c.valuation("y"))
        return k

    # -- arithmetic --------------------------------------------------------
    def __add__(self, other):
        other = ExtExpr.coerce(other)
        out = dict(self._terms)
        for k, c in other._terms.items():
            out[k] = out.get(k, Poly()) + c
        return ExtExpr(out)

    __radd__ = __add__

    def __neg__(self):
        return ExtExpr({k: -c for k, c in self._terms.items()})

    def __sub__(self, other):
        return self + (-ExtExpr.coerce(other))

    def __rsub__(self, other):
        return ExtExpr.coerce(other) - self

    def __mul__(self, other):
        other = ExtExpr.coerce(other)
        out: dict = {}
        for (a1, q1), c1 in self._terms.items():
            for (a2, q2), c2 in other._terms.items():
                key = (a1 + a2, q1 + q2)
                out[key] = out.get(key, Poly()) + c1 * c2
        return ExtExpr(out)

    __rmul__ = __mul__

    def __truediv__(self, other):
        c = as_fraction(other)
        return ExtExpr({k: v / c for k, v in self._terms.items()})

    def __pow__(self, n: int):
        if n < 0:
            raise ValueError("negative power")
        result, base = ExtExpr.coerce(1), self
        while n:
            if n & 1:
                result = result * base
            base = base * base
            n >>= 1
        return result

    def diff(self, var: str) -> "ExtExpr":
        out: dict = {}

        def put(key, value):
            out[key] = out.get(key, Poly()) + value

        for (a, q), c in self._terms.items():
            put((a, q), c.diff(var))
            dq = q.diff(var)
            if dq:
                put((a, q), c * dq)
            if a and var == "y":
                # d|y|/dy = sign(y) = |y|/y, defined only if y divides the coefficient
                if c.valuation("y") < 1:
                    raise NonSmoothError(f"term ({c})*|y| is not differentiable in y at y=0")
                put((1, q), c.shift_down("y"))
        return ExtExpr(out)

    def subs(self, bindings: Mapping[str, object]) -> "ExtExpr":
        if not bindings:
            return self
        out: dict = {}
        for (a, q), c in self._terms.items():
            key = (a, q.subs(bindings))
            out[key] = out.get(key, Poly()) + c.subs(bindings)
        return ExtExpr(out)

    substitute_params = subs

    def branch(self, sign: int) -> "ExtExpr":
        """Replace ``|y|`` by ``sign * y`` (the restriction to one half-plane)."""
        out: dict = {}
        for (a, q), c in self._terms.items():
            if a:
                c = c * Poly.var("y") * sign
            key = (0, q)
            out[key] = out.get(key, Poly()) + c
        return ExtExpr(out)

    # -- comparison --------------------------------------------------------
    def __eq__(self, other):
        if isinstance(other, (ExtExpr, Poly, int, Fraction)):
            return self._terms == ExtExpr.coerce(other)._terms
        return NotImplemented

    def __hash__(self):
        if self._hash is None:
            self._hash = hash(frozenset(self._terms.items()))
        return self._hash

    def __bool__(self):
        return bool(self._terms)

    # -- evaluation --------------------------------------------------------
    def code(self) -> str:
        if not self._terms:
            return "0.0"
        parts = []
        for t in self.terms():
            s = t.coeff.code()
            if t.abs_exp:
                s += "*abs(y)"
            if t.exp_arg:
                s += f"*exp({t.exp_arg.code()})"
            parts.append(s)
        return " + ".join(parts)

    def lambdify(self, vectorized: bool = False):
        """Float callable ``f(x, y)``; parameters must be bound already."""
        return compile_functions([self], vectorized=vectorized, single=True)

    def evaluate(self, x, y):
        """Float (or array) evaluation at ``(x, y)``."""
        vec = isinstance(x, np.ndarray) or isinstance(y, np.ndarray)
        return self.lambdify(vectorized=vec)(x, y)

    def __str__(self):
        if not self._terms:
            return "0"
        parts = []
        for t in self.terms():
            s = f"({t.coeff})"
            if t.abs_exp:
                s += "*abs_y^1"
            if t.exp_arg:
                s += f"*exp({t.exp_arg})"
            parts.append(s)
        return " + ".join(parts)

    def __repr__(self):
        return f"ExtExpr({str(self)!r})"


def compile_functions(exprs: Iterable[ExtExpr], vectorized: bool = False, single: bool = False):
    """Compile expressions into one Python function of ``(x, y)``."""
    exprs = [ExtExpr.coerce(e) for e in exprs]
    free = set().union(*(e.params() for e in exprs)) if exprs else set()
    if free:
        raise ValueError(f"unbound parameters {sorted(free)}; substitute them first")
    body = ", ".join(e.code() for e in exprs)
    if single:
        src = f"def _f(x, y):\n    return {body}\n"
    else:
        src = f"def _f(x, y):\n    return ({body},)\n"
    ns = {"exp": np.exp if vectorized else math.exp, "abs": abs}
    exec(src, ns)  # noqa: S102 - source is generated from exact coefficients only
    fn = ns["_f"]
    fn.source = src
    return fn


# --------------------------------------------------------------------------
# text parser
# --------------------------------------------------------------------------

_KW_MARK = "__kw"
_KEYWORD = re.compile(r"\b(?:%s)\b" % "|".join(keyword.kwlist))
_ALLOWED_BINOPS = (ast.Add, ast.Sub, ast.Mult, ast.Div, ast.Pow)


def parse(text: str) -> ExtExpr:
    """Parse ``2*x^2 - 1/3*b*y + abs_y^3*exp(-x^2)`` style input."""
    # Python keywords such as ``lambda`` are fine symbol names here
    src = _KEYWORD.sub(lambda m: m.group(0) + _KW_MARK, text.replace("^", "**"))
    try:
        tree = ast.parse(src, mode="eval")
    except SyntaxError as exc:
        raise ParseError(f"cannot parse {text!r}: {exc.msg}") from None
    return _walk(tree.body, text)


def _walk(node, text) -> ExtExpr:
    if isinstance(node, ast.Constant):
        if isinstance(node.value, bool) or not isinstance(node.value, (int, float)):
            raise ParseError(f"unsupported literal {node.value!r} in {text!r}")
        return ExtExpr.coerce(as_fraction(node.value))
    if isinstance(node, ast.Name):
        if node.id == "abs_y":
            return ExtExpr.abs_y(1)
        return ExtExpr.var(node.id.removesuffix(_KW_MARK))
    if isinstance(node, ast.UnaryOp) and isinstance(node.op, (ast.USub, ast.UAdd)):
        v = _walk(node.operand, text)
        return -v if isinstance(node.op, ast.USub) else v
    if isinstance(node, ast.BinOp) and isinstance(node.op, _ALLOWED_BINOPS):
        if isinstance(node.op, ast.Pow):
            n = _const_value(node.right, text)
            if n.denominator != 1 or n < 0:
                raise ParseError(f"exponents must be nonnegative integers in {text!r}")
            if isinstance(node.left, ast.Name) and node.left.id == "abs_y":
                return ExtExpr.abs_y(int(n))
            return _walk(node.left, text) ** int(n)
        left = _walk(node.left, text)
        if isinstance(node.op, ast.Div):
            d = _const_value(node.right, text)
            if d == 0:
                raise ParseError(f"division by zero in {text!r}")
            return left / d
        right = _walk(node.right, text)
        if isinstance(node.op, ast.Add):
            return left + right
        if isinstance(node.op, ast.Sub):
            return left - right
        return left * right
    if isinstance(node, ast.Call) and isinstance(node.func, ast.Name) and node.func.id == "exp":
        if len(node.args) != 1 or node.keywords:
            raise ParseError(f"exp takes one argument in {text!r}")
        arg = _walk(node.args[0], text)
        if not arg.is_polynomial():
            raise ParseError(f"exp argument must be polynomial in {text!r}")
        return ExtExpr.exp(arg.as_poly())
    raise ParseError(f"unsupported syntax in {text!r}")


def _const_value(node, text) -> Fraction:
    v = _walk(node, text)
    if not v.is_polynomial() or not v.as_poly().is_constant():
        raise ParseError(f"expected a constant in {text!r}")
    return v.as_poly().constant_value()


def parse_poly(text: str) -> Poly:
    e = parse(text)
    if not e.is_polynomial():
        raise ParseError(f"{text!r} is not a polynomial")
    return e.as_poly()


# module-level conveniences
def diff(e: ExtExpr, var: str) -> ExtExpr:
    return ExtExpr.coerce(e).diff(var)


def substitute_params(e: ExtExpr, bindings: Mapping[str, object]) -> ExtExpr:
    return ExtExpr.coerce(e).subs(bindings)


def is_identically_zero(e) -> bool:
    return ExtExpr.coerce(e).is_identically_zero()
