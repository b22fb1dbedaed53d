import json
from fractions import Fraction

import pytest

from dulac import families
from dulac.bendixson import (ROUTE_COFACTOR, DulacCandidate, best_certificate, certificate, compute_D, compute_Ms,
                             curvature_K, curvature_Kperp, identity_suite, lienard_H, rigid_field, rigid_H)
from dulac.certify import Sign
from dulac.expr import ExtExpr, parse
from dulac.field import VectorField

CENTER = VectorField(parse("y"), parse("-x"))


def lienard(F):
    return VectorField(parse("y") - F, parse("-x"))


def test_identity_suite_complete():
    res = identity_suite()
    assert len(res) == 12
    assert all(res.values()), [k for k, v in res.items() if not v]


def test_ms_vdp():
    X = families.get("vdp", {"lambda": 3}).field
    assert compute_Ms(X, DulacCandidate(parse("x^2+y^2-1"), 2)) == parse("6*(x^2-1)^2")


def test_ms_wilc_symbolic_in_b():
    X = VectorField(parse("y - (x^2-1)*(x^3-b*x)"), parse("-x*(1 + y*(x^3-b*x))"))
    Ms = compute_Ms(X, DulacCandidate(parse("x^2+y^2-1"), Fraction(1, 3)))
    assert Ms == parse("(1/3)*(x^2+y^2-1)*((2*b-3)*x^2+b)")


def test_ms_zero_candidate():
    X = families.get("vdp").field
    assert compute_Ms(X, DulacCandidate(ExtExpr.coerce(0), 1)).is_zero()


@pytest.mark.parametrize("m", [0, 2, 3, 4])
def test_ms_lieg(m):
    F, G = parse("x^3 - 2*x"), parse("x^2 + x^4")
    w = ExtExpr.abs_y(m) if m else ExtExpr.coerce(1)
    X = VectorField(parse("y") - w * F, -G.diff("x") / 2)
    V = G + parse("y^2") - parse("y") * w * F
    assert compute_Ms(X, DulacCandidate(V, 1)) == w * lienard_H(F, G, m) / 2


def test_candidate_requires_positive_s():
    with pytest.raises(ValueError):
        DulacCandidate(parse("x"), 0)


def test_curvature_K():
    assert curvature_K(CENTER) == parse("x^2+y^2")
    F = parse("x^3/3 - x")
    want = parse("x^2+y^2") + F * F - 2 * parse("y") * F + parse("x") * (parse("y") - F) * F.diff("x")
    assert curvature_K(lienard(F)) == want


def test_curvature_K_rigid():
    F = parse("1/2 - x^2 + x*y - y^2")
    x, y = parse("x"), parse("y")
    want = (x * x + y * y) * (x * F * F.diff("x") + y * F * F.diff("y") + x * F.diff("y") - y * F.diff("x") - 1 - F * F)
    assert curvature_K(rigid_field(F)) == want


def test_curvature_Kperp():
    assert curvature_Kperp(CENTER).is_zero()
    assert curvature_Kperp(VectorField(parse("x"), parse("y"))) == parse("x^2+y^2")
    assert not curvature_Kperp(families.get("vdp").field).is_zero()


def test_compute_D():
    F = parse("x^3/3 - x")
    assert compute_D(lienard(F)) == parse("x") * (parse("y") - F) ** 2 * F.diff("x").diff("x")
    assert compute_D(CENTER).is_zero()


def test_D_requires_C2():
    X = VectorField(parse("y") - ExtExpr.abs_y(1) * parse("x^3"), parse("-x"))
    with pytest.raises(ValueError):
        compute_D(X)


def test_rigid_H():
    assert rigid_H(parse("a0 + b*x + c*y + d*x^2 + e*x*y + h*y^2")) == parse("4*d*h - e^2")
    assert rigid_H(parse("x^4 + y^2")) == parse("24*x^2")
    assert rigid_H(parse("x+y")).is_zero()


def test_lienard_H_examples():
    F = parse("-(1/3)*x^3*(x-1)*(2*x-3)")
    G = parse("x^2*(x-1)^2")
    assert lienard_H(F, G, 0) == parse("-4*x^4*(x-1)^4")
    C, B = parse("x"), parse("x^2/3 - 1")
    assert lienard_H(C * B, C * C, 0) == 2 * C**3 * B.diff("x")


def test_certificate_vdp():
    inst = families.get("vdp", {"lambda": 1})
    cert = certificate(inst.field, inst.candidates[0])
    assert cert.certified and cert.bound == 1 and cert.N == 0 and cert.L == 1
    d = cert.to_dict()
    for key in ("family", "params", "V", "s", "Ms", "verdict", "L", "N", "bound", "regions", "certified"):
        assert key in d
    json.dumps(d)


def test_certificate_wilc_half():
    inst = families.get("wilc", {"b": Fraction(1, 2)})
    cert = best_certificate(inst.field, inst.candidates)
    assert cert.certified and (cert.N, cert.L, cert.bound) == (1, 2, 3)


def test_certificate_vil_no_cycles():
    inst = families.get("vil", {"m": 2, "lambda": Fraction(7, 2)})
    cert = certificate(inst.field, inst.candidates[0])
    assert cert.certified and cert.bound == 0


def test_uncertified_claims_no_bound():
    inst = families.get("vil", {"m": 2, "lambda": Fraction(7, 5)})
    cert = certificate(inst.field, inst.candidates[0])
    assert not cert.certified
    assert cert.to_dict()["bound"] is None


def test_cofactor_route():
    # b = 3: M_s = V * k with k = (1/3)(3 x^2 + 3) > 0 although M_s itself changes sign
    inst = families.get("wilc", {"b": 3})
    cert = certificate(inst.field, inst.candidates[1])
    assert cert.verdict.sign is Sign.INDEFINITE
    assert cert.route == ROUTE_COFACTOR and cert.certified
    assert cert.stability_at((2.0, 0.0)) == -1


def test_stability_sign_matches_minus_V_Ms():
    inst = families.get("eq1-3")
    cert = certificate(inst.field, inst.candidates[0])
    for p in [(0.5, 1.0), (-0.7, 0.2), (1.4, -0.3)]:
        s = -cert.candidate.V.evaluate(*p) * cert.Ms.evaluate(*p)
        assert cert.stability_at(p) == (1 if s > 0 else -1 if s < 0 else 0)


def test_rigid_certificates():
    for name in ("rigid-cubic", "rigid-fg"):
        inst = families.get(name)
        cert = certificate(inst.field, inst.candidates[0])
        assert cert.certified and cert.bound == 2, name


def test_linear_center_uncertified():
    inst = families.get("linear-center")
    cert = certificate(inst.field, inst.candidates[0])
    assert cert.verdict.sign is Sign.ZERO and not cert.certified
