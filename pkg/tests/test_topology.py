from fractions import Fraction

import pytest

from dulac import families
from dulac.expr import ExtExpr, parse
from dulac.field import VectorField
from dulac.topology import (HEURISTIC, MissingBoxError, TopologyError, count_bounded_components, equilibria,
                            invariance_cofactor, invariant_ovals)


def wilc_V(b=Fraction(1, 2)):
    return families.get("wilc", {"b": b}).candidates[0].V


def test_circle():
    t = count_bounded_components(parse("x^2+y^2-1"))
    assert t.count == 1 and t.exact
    assert t.bounded_components[0].kind == "oval"


def test_wilson_V_two_components():
    t = count_bounded_components(wilc_V())
    assert t.exact and t.count == 2
    kinds = sorted(c.kind for c in t.bounded_components)
    assert kinds == ["isolated-point", "oval"]


def test_eq13_isolated_points():
    t = count_bounded_components(families.get("eq1-3").candidates[0].V)
    assert t.exact and t.count == 2
    pts = sorted(tuple(round(v, 9) for v in c.point) for c in t.bounded_components)
    assert pts == [(0.0, 0.0), (1.0, 0.0)]
    assert all(c.kind == "isolated-point" for c in t.bounded_components)


def test_generalized_vdp_origin_only():
    t = count_bounded_components(families.get("vdp-lienard", {"lambda": 1}).candidates[0].V)
    assert t.exact and t.count == 1
    assert tuple(round(v, 12) for v in t.bounded_components[0].point) == (0.0, 0.0)


def test_unbounded_only():
    t = count_bounded_components(parse("x*y - 1"))
    assert t.count == 0


def test_radial_rule():
    t = count_bounded_components(parse("(x^2+y^2)*(x^2+y^2-1)*(x^2+y^2-4)"))
    assert t.exact and t.count == 3


def test_zero_V_rejected():
    with pytest.raises(TopologyError):
        count_bounded_components(ExtExpr.coerce(0))


def test_heuristic_needs_box():
    with pytest.raises(MissingBoxError):
        count_bounded_components(parse("x^2+y^2-1"), force_heuristic=True)


@pytest.mark.parametrize("V,box", [
    (parse("x^2+y^2-1"), (-2, 2, -2, 2)),
    (parse("(x^2+y^2-1)*(x^2+y^2-4)"), (-3, 3, -3, 3)),
    (parse("(x^2+4*y^2-1)*((x-3)^2+y^2-1)"), (-2, 5, -2, 2)),
])
def test_heuristic_agrees_with_exact(V, box):
    exact = count_bounded_components(V)
    grid = count_bounded_components(V, box=box, resolution=512, force_heuristic=True)
    assert grid.method == HEURISTIC and not grid.exact
    assert grid.count == exact.count


def test_invariant_circle_wil():
    inst = families.get("wilc", {"b": Fraction(1, 2)})
    C = parse("x^2+y^2-1").as_poly()
    k = invariance_cofactor(inst.field, C)
    assert k is not None
    assert k == (parse("-2*x") * parse("x^3 - 1/2*x")).as_poly()
    rep = invariant_ovals(inst.field, wilc_V())
    assert rep.N == 1


def test_vdp_circle_not_invariant():
    X = families.get("vdp", {"lambda": 1}).field
    rep = invariant_ovals(X, parse("x^2+y^2-1"))
    assert rep.N == 0
    assert rep.ovals and not rep.ovals[0].invariant


def test_lienard_candidate_no_orbit():
    inst = families.get("eq1-3")
    assert invariant_ovals(inst.field, inst.candidates[0].V).N == 0


def test_perturbed_circle_not_invariant():
    # negative control: nudging one coefficient by 1e-3 destroys invariance
    inst = families.get("wilc", {"b": Fraction(1, 2)})
    C = parse("x^2 + 1001/1000*y^2 - 1").as_poly()
    assert invariance_cofactor(inst.field, C) is None


def test_circle_with_equilibria_is_not_periodic():
    # for b <= b_lower the invariant circle carries equilibria
    inst = families.get("wilc", {"b": -2})
    rep = invariant_ovals(inst.field, parse("x^2+y^2-1"))
    assert rep.ovals[0].invariant
    assert rep.N == 0 and rep.ovals[0].equilibria_on_curve


def test_equilibria_eq13():
    eqs = equilibria(families.get("eq1-3").field, box=(-1, 2, -2, 2))
    by_pt = {tuple(round(v, 9) for v in e.point): e for e in eqs}
    assert set(by_pt) == {(0.0, 0.0), (1.0, 0.0), (0.5, round(-1 / 24, 9))}
    assert by_pt[(0.5, round(-1 / 24, 9))].kind == "saddle"
    assert by_pt[(0.0, 0.0)].kind == "weak focus"
    e1 = by_pt[(1.0, 0.0)]
    assert e1.kind == "focus" and e1.stability == "stable"


def test_equilibria_vdp_and_wilc():
    assert [e.point for e in equilibria(families.get("vdp").field)] == [(0.0, 0.0)]
    assert [e.point for e in equilibria(families.get("wilc", {"b": 0}).field)] == [(0.0, 0.0)]
