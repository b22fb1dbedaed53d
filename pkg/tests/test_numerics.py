import math
from fractions import Fraction

import numpy as np
import pytest

from dulac import families
from dulac.expr import parse
from dulac.field import VectorField
from dulac.numerics import (BracketError, DomainError, MelnikovProblem, Section, b_lower, b_star, b_upper,
                            cycle_orbit, diliberto_stability, find_cycles, find_root, integrate, isolate_real_roots,
                            melnikov, melnikov_closed_form, melnikov_zero, p6_roots, polar_radial_sign,
                            radial_velocity, vil_problem, winding_number, z_integral)
from dulac.numerics.cycles import ReturnMap, stability_of
from dulac.numerics.io import csv_text, fmt, trajectory_rows
from dulac.numerics.quadrature import z_domain_ok
from dulac.numerics.roots import P6, real_roots

CENTER = VectorField(parse("y"), parse("-x"))


# --- integration -------------------------------------------------------------

def test_linear_center_closes():
    tr = integrate(CENTER, (1.0, 0.0), (0.0, 2 * math.pi), tol=1e-10)
    assert tr.status == "ok"
    assert np.hypot(*(tr.y[-1] - [1.0, 0.0])) < 1e-8


def test_dense_output_matches_exact():
    tr = integrate(CENTER, (1.0, 0.0), (0.0, 5.0), tol=1e-11)
    for t in (0.3, 1.7, 4.2):
        x, y = tr.sol(t)
        assert abs(x - math.cos(t)) < 1e-8 and abs(y + math.sin(t)) < 1e-8


def test_wilc_circle_invariant():
    X = families.get("wilc", {"b": Fraction(1, 2)}).field
    tr = integrate(X, (1.0, 0.0), (0.0, 50.0), tol=1e-10)
    assert np.max(np.abs(tr.y[:, 0] ** 2 + tr.y[:, 1] ** 2 - 1)) < 1e-6


def test_wilson_algebraic_cycle_invariant():
    X = families.family_iv_wilson(1, 0)
    curve = families.wilson_cycle_curve(1).lambdify()
    assert abs(curve(0.0, 2.0)) < 1e-15
    tr = integrate(X, (0.0, 2.0), (0.0, 30.0), tol=1e-11)
    assert max(abs(curve(x, y)) for x, y in tr.y) < 1e-6


def test_escape_is_labelled():
    X = VectorField(parse("x^2"), parse("0"))
    tr = integrate(X, (1.0, 0.0), (0.0, 10.0))
    assert tr.status == "escaped"


def test_trajectory_rows_csv():
    tr = integrate(CENTER, (1.0, 0.0), (0.0, 1.0))
    rows = trajectory_rows(tr)
    assert rows[0] == (0.0, 1.0, 0.0)
    text = csv_text(("t", "x", "y"), rows)
    assert text.splitlines()[0] == "t,x,y"


# --- cycles ------------------------------------------------------------------

def test_vdp_cycle_against_long_integration():
    X = families.get("vdp", {"lambda": 1}).field
    rep = find_cycles(X, Section(), (0.1, 4.0))
    assert rep.count == 1
    c = rep.cycles[0]
    assert c.stability == "attractor" and c.multiplier < 1
    # oracle: two seeds, inside and outside, settle on the same closed orbit
    amps, xmax = [], []
    for seed in ((0.5, 0.0), (4.0, 0.0)):
        tr = integrate(X, seed, (0.0, 150.0), tol=1e-11)
        late = tr.y[tr.t > 120.0]
        amps.append(np.max(np.hypot(late[:, 0], late[:, 1])))
        xmax.append(np.max(np.abs(late[:, 0])))
    assert abs(amps[0] - amps[1]) < 1e-3
    assert abs(c.amplitude - amps[0]) < 1e-3
    orb = cycle_orbit(X, Section(), c.r)
    assert abs(np.max(np.abs(orb[:, 0])) - 2.0086) < 1e-3
    assert abs(xmax[0] - 2.0086) < 1e-3


def test_wilc_half_two_cycles():
    rep = find_cycles(families.get("wilc", {"b": Fraction(1, 2)}).field, Section(), (0.05, 3.0))
    assert rep.count == 2
    inner, circle = rep.cycles
    assert inner.r < 1 and inner.stability == "repeller"
    assert abs(circle.r - 1) < 1e-8 and circle.stability == "attractor"


def test_vil_large_lambda_no_cycles():
    inst = families.get("vil", {"m": 2, "lambda": Fraction(7, 2)})
    assert find_cycles(inst.field, inst.section, inst.r_range).count == 0


def test_vil_small_lambda_amplitude():
    inst = families.get("vil", {"m": 2, "lambda": Fraction(1, 20)})
    rep = find_cycles(inst.field, inst.section, inst.r_range)
    assert rep.count == 1
    assert abs(rep.cycles[0].amplitude / math.sqrt(2) - 1) < 0.05


def test_center_detected():
    rep = find_cycles(CENTER, Section(), (0.05, 4.0))
    assert rep.center and rep.count == 0


def test_semistable_is_near_degenerate():
    X = families.get("wilc", {"b": b_star()}).field
    rep = find_cycles(X, Section(), (0.05, 3.0))
    on_circle = [c for c in rep.cycles if abs(c.r - 1) < 1e-6]
    assert on_circle and on_circle[0].stability == "near-degenerate"


def test_eq13_measured_repeller():
    inst = families.get("eq1-3")
    rep = find_cycles(inst.field, inst.section, inst.r_range)
    assert rep.count == 1
    c = rep.cycles[0]
    assert c.stability == "repeller" and c.multiplier > 1
    orb = cycle_orbit(inst.field, inst.section, c.r)
    for p in [(0, 0), (1, 0), (0.5, -1 / 24)]:
        assert abs(winding_number(orb, p)) == 1
    assert winding_number(orb, (3, 3)) == 0


def test_diliberto_matches_log_multiplier():
    X = families.get("vdp", {"lambda": 1}).field
    c = find_cycles(X, Section(), (0.1, 4.0)).cycles[0]
    d = diliberto_stability(X, c, Section())
    assert d.sign == -1 and d.raw_arclength < 0
    assert d.integral == pytest.approx(math.log(c.multiplier), abs=1e-4)
    assert d.integral == pytest.approx(d.divergence, abs=1e-6)


def test_stability_band():
    assert stability_of(0.5) == "attractor"
    assert stability_of(1.5) == "repeller"
    assert stability_of(1 + 5e-5) == "near-degenerate"


def test_grazing_sample_discarded():
    # x' = -y, y' = 0 has no component across the ray theta=0
    X = VectorField(parse("-y"), parse("0*x"))
    ret = ReturnMap(X, Section(), tol=1e-10)(1.0)
    assert ret.status == "grazing"


def test_bad_range():
    with pytest.raises(ValueError):
        find_cycles(CENTER, Section(), (1.0, 0.5))


# --- quadrature --------------------------------------------------------------

def test_melnikov_examples():
    p = vil_problem(2)
    assert melnikov(p, 1.0) == pytest.approx(-math.pi / 8, abs=1e-10)
    assert abs(melnikov(p, 2.0)) < 1e-10
    zero = MelnikovProblem(parse("x^2+y^2"), parse("0"), parse("0"))
    assert melnikov(zero, 3.0) == 0.0


def test_melnikov_domain():
    with pytest.raises(DomainError):
        melnikov(vil_problem(2), -1.0)


def test_melnikov_non_round_oval():
    # the same perturbation on the ellipse H = x^2 + 4 y^2 through the general path
    p = MelnikovProblem(parse("x^2 + 4*y^2"), parse("-x"), parse("0"))
    # oint -R dy = oint x dy = area enclosed = pi * sqrt(h) * sqrt(h)/2
    h = 2.0
    assert melnikov(p, h) == pytest.approx(math.pi * h / 2, abs=1e-8)


@pytest.mark.parametrize("m", [2, 3, 4])
@pytest.mark.parametrize("r", [0.5, 1.0, 2.0])
def test_melnikov_closed_form(m, r):
    assert abs(melnikov(vil_problem(m), r * r, tol=1e-12) - melnikov_closed_form(m, r)) < 1e-8


def test_closed_form_values():
    assert melnikov_closed_form(2, 1.0) == pytest.approx(-math.pi / 8, rel=1e-14)
    assert abs(melnikov_closed_form(2, math.sqrt(2))) < 1e-14
    assert melnikov_zero(2) == pytest.approx(math.sqrt(2))


def test_z_signs_and_domain():
    assert z_integral(0.0) < 0
    assert z_integral(0.747) < 0 < z_integral(0.75) or abs(z_integral(0.747)) < 1e-3
    assert not z_domain_ok(-2) and not z_domain_ok(3)
    with pytest.raises(DomainError):
        z_integral(-2.0)


def test_z_single_sign_change():
    lo, hi = b_lower() + 0.05, b_upper() - 0.05
    bs = np.linspace(lo, hi, 60)
    zs = [z_integral(b) for b in bs]
    changes = sum(1 for a, b in zip(zs, zs[1:]) if a * b < 0)
    assert changes == 1


# --- roots -------------------------------------------------------------------

def test_p6_roots():
    ivs = p6_roots()
    assert len(ivs) == 2
    assert round(b_lower(), 2) == -1.44
    assert abs(b_upper() - (1 - b_lower())) < 1e-10
    assert len(isolate_real_roots(P6)) == 2


def test_sqrt2_roots():
    ivs = real_roots("x^2 - 2", Fraction(1, 10**12))
    mids = sorted((a + b) / 2 for a, b in ivs)
    assert [float(m) for m in mids] == pytest.approx([-math.sqrt(2), math.sqrt(2)], abs=1e-12)


def test_find_root_examples():
    assert find_root(lambda x: x * x - 2, (1, 2)) == pytest.approx(math.sqrt(2), abs=1e-12)
    assert find_root(lambda r: melnikov_closed_form(2, r), (1, 2)) == pytest.approx(math.sqrt(2), abs=1e-8)
    assert abs(b_star() - 0.747) <= 0.005
    with pytest.raises(BracketError):
        find_root(lambda x: x * x + 1, (-1, 1))


# --- polar -------------------------------------------------------------------

def test_polar_sign_b_nonpositive():
    for b in (-1, 0):
        X = families.get("wilc", {"b": b}).field
        rep = polar_radial_sign(X, n_r=120, n_theta=120)
        assert not rep.sign_change_outside
        assert rep.max_field_mismatch < 1e-10


def test_polar_b0_closed_form():
    for r in (0.5, 1.5, 2.0):
        for th in (0.3, 1.0, 2.5):
            want = -r * (r * r - 1) * r * r * math.cos(th) ** 4
            assert radial_velocity(0.0, r, th) == pytest.approx(want, rel=1e-12, abs=1e-14)


def test_polar_b2_changes_sign():
    rep = polar_radial_sign(families.get("wilc", {"b": 2}).field, n_r=120, n_theta=120)
    assert rep.sign_change_outside
    assert radial_velocity(2.0, math.sqrt(1.5), 0.0) * radial_velocity(2.0, math.sqrt(3.0), 0.0) < 0


# --- io ----------------------------------------------------------------------

def test_fmt():
    assert fmt(0.1) == "0.10000000000000001"
    assert fmt(Fraction(7, 5)) == "1.4"
    assert fmt(Fraction(1, 3)) == "0.33333333333333331"
    assert fmt(True) == "true" and fmt(None) == ""
    assert fmt([1.0, 2]) == "1;2"
    assert fmt(float("nan")) == "nan"
