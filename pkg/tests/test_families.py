from fractions import Fraction

import pytest

from dulac import families
from dulac.bendixson import compute_Ms, curvature_K, lienard_H
from dulac.expr import ExtExpr, parse
from dulac.families import ParameterDomainError, UnknownFamilyError
from dulac.topology import invariance_cofactor


def test_registry_names_and_schema():
    names = families.names()
    for n in ("vdp", "vdp-lienard", "wilson-ext", "wilc", "wilc-lienard", "lienard-iv", "eq1-3", "vil", "massera",
              "rigid-cubic", "rigid-fg", "linear-center"):
        assert n in names
    s = families.FAMILIES["vil"].schema()
    assert [p["name"] for p in s["params"]] == ["m", "lambda"]


@pytest.mark.parametrize("name", families.names())
def test_every_family_builds_with_defaults(name):
    inst = families.get(name)
    assert inst.field.P is not None and inst.candidates
    assert not inst.field.free_params()


def test_wilc_half():
    inst = families.get("wilc", {"b": Fraction(1, 2)})
    assert inst.field.P == parse("y - (x^2-1)*(x^3 - x/2)")
    assert inst.field.Q == parse("-x*(1 + y*(x^3 - x/2))")
    (c1, c2) = inst.candidates
    B = parse("x^3 - x/2")
    assert c1.V == (1 - parse("x^2+y^2")) * (parse("x^2+y^2") + B * parse("y")) and c1.s == 1
    assert c2.V == parse("x^2+y^2-1") and c2.s == Fraction(1, 3)


def test_vil():
    inst = families.get("vil", {"m": 2, "lambda": 1})
    assert inst.field.P == parse("y") - ExtExpr.abs_y(2) * parse("x^3 - x")
    assert inst.field.Q == parse("-x")
    c = inst.candidates[0]
    assert c.s == Fraction(1, 3)
    want = ExtExpr.exp(parse("y^4/18").as_poly()) * (3 + parse("x*y"))
    assert c.V == want


def test_vil_m3_candidate_keeps_abs():
    c = families.get("vil", {"m": 3, "lambda": 2}).candidates[0]
    assert c.V.has_abs()


def test_vil_rejects_m1():
    with pytest.raises(ParameterDomainError, match="m = 1"):
        families.get("vil", {"m": 1})
    with pytest.raises(ParameterDomainError):
        families.get("vil", {"m": Fraction(5, 2)})


def test_unknown_family_and_param():
    with pytest.raises(UnknownFamilyError):
        families.get("nope")
    with pytest.raises(ParameterDomainError):
        families.get("vdp", {"mu": 1})


def test_rigid_cubic():
    p = dict(a=1, b=2, c=3, d=-1, e=1, h=-2)
    inst = families.get("rigid-cubic", p)
    F = parse("1 + 2*x + 3*y - x^2 + x*y - 2*y^2")
    assert inst.field.P == -parse("y") + parse("x") * F
    assert inst.field.Q == parse("x") + parse("y") * F
    assert inst.prediction.bound == 1
    assert families.get("rigid-cubic", dict(p, e=5)).prediction.bound is None


def test_rigid_candidate_is_K():
    inst = families.get("rigid-cubic")
    assert inst.candidates[0].V == curvature_K(inst.field)


def test_massera_candidate_is_K():
    inst = families.get("massera")
    assert inst.candidates[0].V == curvature_K(inst.field)
    F = parse("-x + x^3/3")
    Ms = compute_Ms(inst.field, inst.candidates[0])
    assert Ms == (parse("y") - F) ** 2 * parse("x") * F.diff("x").diff("x")


def test_wilc_lienard_identity():
    inst = families.get("wilc-lienard", {"b": Fraction(1, 2)})
    A = parse(families.WILC2_A).subs({"b": Fraction(1, 2)})
    Ms = compute_Ms(inst.field, inst.candidates[0])
    assert Ms == 2 * parse("x^4") * A * A


def test_family_iv_H():
    for a, b in [(1, 0), (1, Fraction(1, 16)), (Fraction(3, 2), -1)]:
        F, G = families._iv_FG(a, b)
        a_, b_ = Fraction(a), Fraction(b)
        assert lienard_H(F, G, 0) == parse(f"{a_ * (16 - 3 * a_**2 - 144 * b_) / 12}*x^4")
    F, G = families._iv_FG(0, 1)
    assert lienard_H(F, G, 0).is_zero()


def test_wilson_cycle_curve_invariant():
    X = families.family_iv_wilson(1, 0)
    C = families.wilson_cycle_curve(1)
    assert invariance_cofactor(X, C.as_poly()) is not None


def test_eq13_field():
    inst = families.get("eq1-3")
    assert inst.field.P == parse("y + (1/3)*x^3*(x-1)*(2*x-3)")
    assert inst.field.Q == parse("-x*(x-1)*(2*x-1)")
    assert inst.box == (-1.0, 2.0, -2.0, 2.0)


def test_wilc_constants():
    k = families.wilc_constants()
    assert round(k["b_lower"], 2) == -1.44
    assert abs(k["b_upper"] - (1 - k["b_lower"])) < 1e-10
    assert abs(k["b_star"] - 0.747) <= 0.005


@pytest.mark.parametrize("b,case,count", [(-2, "i", 0), (-1, "ii", 1), (0.3, "iii", 2), (1.5, "v", 2), (3, "vi", 1)])
def test_scenarios(b, case, count):
    sc = families.scenario_table_wilc(b)
    assert sc.case == case and sc.count == count


def test_scenario_at_b_star():
    assert families.scenario_table_wilc(families.wilc_constants()["b_star"]).case == "iv"


def test_case_boundaries_sorted():
    bs = families.case_boundaries()
    assert bs == sorted(bs) and bs[1] == 0.0


def test_vil_prediction_threshold():
    assert families.get("vil", {"m": 2, "lambda": Fraction(7, 2)}).prediction.bound == 0
    assert families.get("vil", {"m": 2, "lambda": Fraction(1, 2)}).prediction.bound is None
    assert families.vil_threshold(6) == pytest.approx(3 / 2**0.5 / 8)
