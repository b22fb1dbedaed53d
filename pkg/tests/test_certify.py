from fractions import Fraction

import numpy as np
import pytest

from dulac.certify import (ParametricInputError, Sign, TrinomialQuery, certify_sign, certify_sign_parametric,
                           descartes_positive_roots, lambda_threshold, lambda_threshold_squared, soundness_sample,
                           sturm_nonneg, trinomial_nonneg)
from dulac.expr import ExtExpr, parse
from dulac.families import vil_candidate
from dulac.bendixson import compute_Ms
from dulac import families


def test_square_times_even_power_nonpositive():
    v = certify_sign(parse("-2*x^4*(x^2+y^2-1)^2"))
    assert v.sign is Sign.NONPOSITIVE
    assert v.vanishing_set == "null-measure"
    assert v.certified and v.trace


def test_cofactor_product_is_indefinite_but_cofactor_is_not():
    # the product changes sign across the circle; the cofactor (2b-3)x^2+b at b=2 does not
    prod = certify_sign(parse("(1/3)*(x^2+y^2-1)*(x^2+2)"))
    assert prod.sign is Sign.INDEFINITE
    assert certify_sign(parse("x^2+2")).sign is Sign.NONNEGATIVE


def test_xy_indefinite_with_witnesses():
    v = certify_sign(parse("x*y"))
    assert v.sign is Sign.INDEFINITE
    (xp, yp), (xm, ym) = v.witnesses
    assert xp * yp > 0 and xm * ym < 0


def test_vil_ms_nonpositive_at_large_lambda():
    inst = families.get("vil", {"m": 2, "lambda": Fraction(7, 2)})
    v = certify_sign(compute_Ms(inst.field, vil_candidate(2, Fraction(7, 2))))
    assert v.sign is Sign.NONPOSITIVE and v.certified
    # oracle: grid minimum of the trinomial z^2 - 27/(2 lam^2) z + 9/(2 lam^2)
    lam2 = 12.25
    z = np.linspace(0, 100, 200001)
    assert np.min(z**2 - 27 / (2 * lam2) * z + 9 / (2 * lam2)) >= 0


def test_identically_zero():
    v = certify_sign(ExtExpr.coerce(0))
    assert v.sign is Sign.ZERO and not v.certified


def test_positive_measure_zero_set_is_not_certified():
    v = certify_sign(parse("x^2") * ExtExpr.coerce(0) + parse("0*y"))
    assert not v.certified


def test_unbound_parameters_rejected():
    with pytest.raises(ParametricInputError):
        certify_sign(parse("b*x^2"))


def test_parametric_split():
    pv = certify_sign_parametric(parse("(2*b-3)*x^4*y^2"))
    assert pv.verdict.sign is Sign.NONNEGATIVE
    assert pv.param_factor == parse("2*b-3").as_poly()


def test_halfplane_region():
    assert certify_sign(parse("y^3 + y"), "halfplane").sign is Sign.NONNEGATIVE
    assert certify_sign(parse("y^3 + y")).sign is Sign.INDEFINITE


def test_unknown_never_certifies():
    # transcendental sum with mixed signs: only sampling applies
    e = parse("x") * ExtExpr.exp(parse("y^2").as_poly()) + parse("x^2 + 1")
    v = certify_sign(e)
    assert not v.certified


@pytest.mark.parametrize("m,b,c,want", [
    (2, -2, 1, True),
    (2, -3, 1, False),
    (3, 0, 0, True),
    (4, 5, 0, True),
])
def test_trinomial_examples(m, b, c, want):
    assert trinomial_nonneg(TrinomialQuery(m, b, c)) is want


def test_trinomial_tie_counts_as_nonnegative():
    # z^3 - 3z + 2 = (z-1)^2 (z+2): minimum 0 at z=1
    assert trinomial_nonneg(TrinomialQuery(3, -3, 2))


def test_trinomial_rejects_negative_c():
    with pytest.raises(ValueError):
        trinomial_nonneg(TrinomialQuery(2, 1, -1))
    with pytest.raises(ValueError):
        TrinomialQuery(1, 0, 0)


def test_lambda_threshold_values():
    assert lambda_threshold(2) == pytest.approx(9 * 2**0.5 / 4, abs=1e-12)
    assert abs(lambda_threshold(2) - 3.18198) < 1e-5
    assert lambda_threshold(3) == pytest.approx(3 / 2**0.5)
    seq = [lambda_threshold(m) for m in range(3, 30)]
    assert all(a > b for a, b in zip(seq, seq[1:]))
    assert seq[-1] < 1e-4
    assert lambda_threshold_squared(2) == Fraction(81, 8)
    with pytest.raises(ValueError):
        lambda_threshold(1)


@pytest.mark.parametrize("m", range(2, 13))
def test_threshold_tight(m):
    t2 = lambda_threshold_squared(m)

    def q(l2):
        return TrinomialQuery(m, -Fraction(27, 2) / l2, Fraction(9 * (m - 1), 2) / l2)

    assert trinomial_nonneg(q(t2))
    assert trinomial_nonneg(q(t2 * Fraction(101, 100) ** 2))
    assert not trinomial_nonneg(q(t2 / 4))


def test_descartes():
    assert descartes_positive_roots(parse("x^2-1")) == 1
    assert descartes_positive_roots(parse("x^2+1")) == 0
    # W = x f f' + g'(0) x - 1 - f^2 with f = x^2, g'(0) = 0
    f = parse("x^2")
    W = parse("x") * f * f.diff("x") - 1 - f * f
    assert W == parse("x^4 - 1")
    assert descartes_positive_roots(W) == 1


def test_sturm_nonneg():
    assert sturm_nonneg(parse("(x^2-1)^2"), "R")
    assert not sturm_nonneg(parse("x^3-x"), "halfline")
    assert not sturm_nonneg(parse("4*x^6 - 12*x^5 - 4*x^4 + 28*x^3 + 56*x^2 - 72*x - 229"), "R")
    assert sturm_nonneg(parse("x^3+x"), "halfline")


def test_soundness_sample_on_certified():
    e = parse("-2*x^4*(x^2+y^2-1)^2")
    vals, scale = soundness_sample(e, n=20_000)
    assert np.all(vals <= 1e-12 * np.maximum(1.0, scale))
