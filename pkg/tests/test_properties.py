"""Property tests for the invariants of each module."""

import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import assume, given, settings
from hypothesis import strategies as st

from dulac import families
from dulac.certify import (Sign, TrinomialQuery, certify_sign, descartes_positive_roots, soundness_sample,
                           trinomial_nonneg)
from dulac.expr import ExtExpr, Poly, as_fraction, parse
from dulac.field import VectorField
from dulac.numerics import Section, find_cycles, integrate, isolate_real_roots
from dulac.numerics.cycles import ReturnMap
from dulac.numerics.io import fmt

small_q = st.fractions(min_value=-5, max_value=5, max_denominator=7)
VARS = ("x", "y", "b")


@st.composite
def polys(draw, vars_=VARS, max_terms=4, max_deg=3):
    n = draw(st.integers(0, max_terms))
    terms = {}
    for _ in range(n):
        mono = tuple(sorted((v, e) for v in vars_ if (e := draw(st.integers(0, max_deg))) > 0))
        terms[mono] = draw(small_q)
    p = Poly()
    for mono, c in terms.items():
        t = Poly.const(c)
        for v, e in mono:
            t = t * Poly.var(v, e)
        p = p + t
    return p


@st.composite
def ext_exprs(draw):
    e = ExtExpr.coerce(draw(polys()))
    if draw(st.booleans()):
        e = e + ExtExpr.coerce(draw(polys())) * ExtExpr.abs_y(draw(st.sampled_from([2, 3, 4, 5])))
    if draw(st.booleans()):
        e = e + ExtExpr.coerce(draw(polys())) * ExtExpr.exp(draw(polys(vars_=("x", "y"), max_terms=2, max_deg=2)))
    return e


# --- expr ----------------------------------------------------------------------

@given(polys(), polys(), polys())
def test_ring_axioms(a, b, c):
    assert (a + b) + c == a + (b + c)
    assert (a * b) * c == a * (b * c)
    assert a * (b + c) == a * b + a * c
    assert a + b == b + a and a * b == b * a
    assert a - a == Poly()


@given(ext_exprs())
def test_mixed_partials_commute(e):
    # |y|^3 has a C^2 second derivative, so both orders are defined for every generated power
    assert e.diff("x").diff("y") == e.diff("y").diff("x")


@given(ext_exprs(), small_q, st.sampled_from(["x", "y"]))
def test_subs_commutes_with_diff(e, b, var):
    assert e.diff(var).subs({"b": b}) == e.subs({"b": b}).diff(var)


@given(ext_exprs(), st.floats(-3, 3), st.floats(-3, 3), small_q)
def test_evaluate_consistent_with_structure(e, x, y, b):
    f = e.subs({"b": b})
    lhs = f.evaluate(x, y) + f.evaluate(x, y)
    assert lhs == pytest.approx((f + f).evaluate(x, y), rel=1e-9, abs=1e-9)


# --- certify -------------------------------------------------------------------

@settings(max_examples=40)
@given(polys(vars_=("x", "y"), max_terms=3, max_deg=2), polys(vars_=("x", "y"), max_terms=3, max_deg=2),
       st.sampled_from([1, -1]))
def test_soundness_of_certified_signs(p, q, sgn):
    # sgn * p^2 (q^2 + 1) has a known sign; the portfolio may fail to decide it but never contradicts it
    e = ExtExpr.coerce(p * p * (q * q + Poly.const(1)) * sgn)
    assume(not e.is_zero())
    v = certify_sign(e)
    wrong = Sign.NONPOSITIVE if sgn > 0 else Sign.NONNEGATIVE
    assert v.sign not in (wrong, Sign.INDEFINITE)
    if v.certified:
        vals, scale = soundness_sample(e, n=20_000, seed=1)
        assert np.all(v.sign_value * vals >= -1e-12 * np.maximum(1.0, scale))


@settings(max_examples=30)
@given(polys(vars_=("x", "y"), max_terms=3, max_deg=2), polys(vars_=("y",), max_terms=3, max_deg=3),
       st.sampled_from([1, -1]))
def test_univariate_positive_factors_are_decided(p, q, sgn):
    e = ExtExpr.coerce(p * p * (q * q + Poly.const(1)) * sgn)
    assume(not e.is_zero())
    v = certify_sign(e)
    assert v.sign is (Sign.NONNEGATIVE if sgn > 0 else Sign.NONPOSITIVE)


@settings(max_examples=40)
@given(polys(vars_=("x", "y"), max_terms=4, max_deg=3))
def test_certified_verdicts_are_sound_on_random_input(p):
    e = ExtExpr.coerce(p)
    assume(not e.is_zero())
    v = certify_sign(e)
    if v.sign is Sign.INDEFINITE:
        (xp, yp), (xm, ym) = v.witnesses
        assert p.evaluate({"x": xp, "y": yp}) > 0 > p.evaluate({"x": xm, "y": ym})
    elif v.definite:
        vals, scale = soundness_sample(e, n=20_000, seed=2)
        assert np.all(v.sign_value * vals >= -1e-12 * np.maximum(1.0, scale))


@settings(max_examples=200)
@given(st.integers(2, 5), st.fractions(-20, 20, max_denominator=50), st.fractions(0, 20, max_denominator=50))
def test_trinomial_matches_brute_force(m, b, c):
    exact = trinomial_nonneg(TrinomialQuery(m, b, c))
    bf, cf = float(b), float(c)
    top = 10 * max(1.0, abs(bf), cf)
    z = np.linspace(0.0, top, 400_001)
    vals = z**m + bf * z + cf
    lo = float(np.min(vals))
    margin = 1e-6 * max(1.0, abs(bf), cf)
    if exact:
        assert lo >= -margin
    else:
        assert lo < margin


@given(polys(vars_=("x",), max_terms=5, max_deg=6), st.fractions(Fraction(1, 100), 100))
def test_descartes_scale_invariant(p, k):
    assume(not p.is_zero())
    assert descartes_positive_roots(p) == descartes_positive_roots(p * k)


@given(st.lists(st.integers(-6, 6), min_size=2, max_size=7))
def test_root_isolation_matches_numpy(coeffs):
    assume(coeffs[-1] != 0)
    ivs = isolate_real_roots(coeffs)
    for (a, b), (c, d) in zip(ivs, ivs[1:]):
        assert b <= c
    # distinct real roots from the companion matrix, merged at a coarse tolerance
    r = np.roots(coeffs[::-1])
    real = sorted(x.real for x in r if abs(x.imag) < 1e-7)
    distinct = [x for i, x in enumerate(real) if i == 0 or x - real[i - 1] > 1e-5]
    assume(all(abs(x.imag) > 1e-4 or abs(x.imag) < 1e-9 for x in r))
    assert len(ivs) == len(distinct)


# --- numerics ------------------------------------------------------------------

@settings(max_examples=8)
@given(st.sampled_from([Fraction(1, 2), 1, 2]))
def test_return_map_consistency(lam):
    X = families.get("vdp", {"lambda": lam}).field
    tol = 1e-10
    rep = find_cycles(X, Section(), (0.1, 4.0), tol=tol)
    rm = ReturnMap(X, Section(), tol=tol)
    for c in rep.cycles:
        r1 = rm(c.r).r
        r2 = rm(r1).r
        assert abs(r2 - c.r) < 10 * tol * max(1.0, c.r) * 10
        assert abs(c.displacement) < 1e3 * tol * 4


@pytest.mark.parametrize("m", [2, 3, 4])
def test_melnikov_prediction_linear_in_lambda(m):
    zero = math.sqrt((m + 4) / 3)
    errs = []
    for lam in (Fraction(1, 100), Fraction(1, 20)):
        inst = families.get("vil", {"m": m, "lambda": lam})
        rep = find_cycles(inst.field, inst.section, inst.r_range)
        assert rep.count == 1
        errs.append(abs(rep.cycles[0].amplitude - zero))
    ratio = errs[1] / errs[0]
    assert 5 / 2 <= ratio <= 5 * 2


# the unperturbed ovals of interest reach r = sqrt(8/3) (vil, m = 4); the radial drift is about
# 3e-9 per 100 time units at tol 1e-10, so |dH| ~ 6e-9 r and the bound holds up to r ~ 1.7
@settings(max_examples=8)
@given(st.floats(0.2, math.sqrt(8 / 3)), st.floats(0, 2 * math.pi), st.sampled_from(["vil", "linear-center"]))
def test_energy_conservation(r, th, name):
    params = {"m": 2, "lambda": 0} if name == "vil" else {}
    X = families.get(name, params).field
    tr = integrate(X, (r * math.cos(th), r * math.sin(th)), (0.0, 100.0), tol=1e-10)
    H = tr.y[:, 0] ** 2 + tr.y[:, 1] ** 2
    assert abs(H[-1] - H[0]) < 1e-8


@given(st.floats(allow_nan=False, allow_infinity=False))
def test_fmt_round_trips(v):
    assert float(fmt(v)) == v


@given(st.fractions(max_denominator=10**6))
def test_fmt_fraction_exact_or_17_digits(q):
    s = fmt(q)
    assert float(s) == float(q) or as_fraction(s) == q


@settings(max_examples=30)
@given(st.floats(0.3, 1.8), st.floats(0.05, 1.2))
def test_stability_classification(r0, lam):
    # for any located vdp cycle the label follows the multiplier and the band
    X = VectorField(parse("y"), parse(f"-x - {as_fraction(round(lam, 3))}*(x^2-1)*y"))
    rm = ReturnMap(X, Section(), tol=1e-9)
    ret = rm(r0)
    assume(ret.status == "ok")
    assert ret.r > 0 and ret.time > 0
