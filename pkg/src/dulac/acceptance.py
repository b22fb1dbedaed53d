"""The ten acceptance checks, runnable from tests and from ``dulac report``.

Each check returns a :class:`CheckResult`.  Checks 9 and 10 reuse the cycle
searches of checks 4 to 8 through a small cache, so the whole suite does each
expensive computation once.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache

import numpy as np

from . import families
from .bendixson import best_certificate, identity_suite
from .certify import TrinomialQuery, lambda_threshold, lambda_threshold_squared, trinomial_nonneg
from .numerics import roots
from .numerics.cycles import (ETA, IntegrationError, cycle_orbit, diliberto_stability, find_cycles,
                              return_multiplier, winding_number)
from .numerics.ode import integrate
from .numerics.quadrature import melnikov, melnikov_closed_form, vil_problem
from .topology import count_bounded_components, equilibria

WILC_GRID = (-2, -1, Fraction(3, 10), Fraction(3, 2), 3)
VIL_NO_CYCLE = (Fraction(16, 5), Fraction(7, 2), 4)
VIL_CYCLE = Fraction(7, 5)
MELNIKOV_M = (2, 3, 4)
MELNIKOV_R = (0.5, 1.0, 2.0)
CIRCLE_TOL = 1e-6
CIRCLE_TIME = 10.0  # over one revolution; on a repelling circle rounding grows like mu^(t/T)
DILIBERTO_EPS = 1e-4


@dataclass
class CheckResult:
    number: int
    title: str
    passed: bool
    detail: str
    data: dict = field(default_factory=dict)

    def line(self) -> str:
        return f"[{'PASS' if self.passed else 'FAIL'}] {self.number:2d}. {self.title}: {self.detail}"


@dataclass
class Run:
    """Cycle search and best certificate for one family point."""

    family: str
    params: dict
    instance: object
    report: object
    cert: object

    @property
    def label(self) -> str:
        ps = ", ".join(f"{k}={v}" for k, v in self.params.items())
        return f"{self.family}({ps})"


def _key(params: dict) -> tuple:
    return tuple(sorted((k, Fraction(v)) for k, v in params.items()))


@lru_cache(maxsize=None)
def _run(family: str, key: tuple) -> Run:
    params = dict(key)
    inst = families.get(family, params)
    rep = find_cycles(inst.field, inst.section, inst.r_range)
    cert = best_certificate(inst.field, inst.candidates, family=family, params=inst.params)
    return Run(family, inst.params, inst, rep, cert)


def run(family: str, **params) -> Run:
    return _run(family, _key(params))


def _points_4_to_8() -> list[Run]:
    pts = [run("vil", m=2, **{"lambda": lam}) for lam in VIL_NO_CYCLE]
    pts.append(run("vil", m=2, **{"lambda": VIL_CYCLE}))
    pts.append(run("vil", m=2, **{"lambda": Fraction(1, 20)}))
    pts += [run("wilc", b=b) for b in WILC_GRID]
    pts.append(run("wilc", b=_b_star_fraction()))
    pts.append(run("eq1-3"))
    return pts


@lru_cache(maxsize=None)
def _b_star_fraction() -> Fraction:
    return Fraction(roots.b_star()).limit_denominator(10**15)


# ---------------------------------------------------------------------------


def check_1() -> CheckResult:
    res = identity_suite()
    bad = [k for k, ok in res.items() if not ok]
    ok = len(res) == 12 and not bad
    return CheckResult(1, "symbolic identities", ok,
                       f"{sum(res.values())}/{len(res)} exact" + (f"; failing: {', '.join(bad)}" if bad else ""),
                       {"identities": res})


def check_2() -> CheckResult:
    w = Fraction(1, 10**10)
    ivs = roots.real_roots(roots.P6, w)
    neg = [iv for iv in ivs if iv[1] < 0]
    ok = len(ivs) == 2 and len(neg) == 1
    detail = f"{len(ivs)} real roots"
    data = {"intervals": [(str(a), str(b)) for a, b in ivs]}
    if ok:
        lo, hi = neg[0]
        b_lo = roots.midpoint(neg[0])
        b_hi = roots.midpoint(max(ivs))
        sym = abs(b_hi - (1 - b_lo))
        width = float(hi - lo)
        ok = width <= 1e-10 and round(b_lo, 2) == -1.44 and sym <= 1e-10
        detail += f"; negative root {b_lo:.12f} (width {width:.1e}); |b+ - (1 - b-)| = {sym:.1e}"
        data.update(b_lower=b_lo, b_upper=b_hi, symmetry_error=sym)
    return CheckResult(2, "sextic root b_lower", ok, detail, data)


def check_3() -> CheckResult:
    b = roots.b_star(quad_tol=1e-8)
    err = abs(b - 0.747)
    return CheckResult(3, "zero b* of Z", err <= 0.005, f"b* = {b:.10f}, |b* - 0.747| = {err:.2e}", {"b_star": b})


def _con_trinomial(m: int, lam2: Fraction) -> TrinomialQuery:
    return TrinomialQuery(m, -Fraction(27, 2) / lam2, Fraction(9 * (m - 1), 2) / lam2)


def check_4() -> CheckResult:
    thr = lambda_threshold(2)
    ok_thr = abs(thr - 3.18198) <= 1e-5
    tight = {}
    for m in range(2, 13):
        t2 = lambda_threshold_squared(m)
        tight[m] = (trinomial_nonneg(_con_trinomial(m, t2))
                    and trinomial_nonneg(_con_trinomial(m, t2 * Fraction(101, 100) ** 2))
                    and not trinomial_nonneg(_con_trinomial(m, t2 / 4)))
    ok_tight = all(tight.values())
    none_above = {str(lam): run("vil", m=2, **{"lambda": lam}).report.count for lam in VIL_NO_CYCLE}
    below = run("vil", m=2, **{"lambda": VIL_CYCLE}).report.count
    ok_sweep = all(c == 0 for c in none_above.values()) and below >= 1
    detail = (f"threshold {thr:.7f}; trinomial tight for m=2..12: {ok_tight}; "
              f"cycles at lambda={', '.join(none_above)}: {list(none_above.values())}; at lambda=1.4: {below}")
    return CheckResult(4, "lambda threshold", ok_thr and ok_tight and ok_sweep, detail,
                       {"threshold": thr, "tight": tight, "counts_above": none_above, "count_1.4": below})


def check_5() -> CheckResult:
    worst = 0.0
    for m in MELNIKOV_M:
        p = vil_problem(m)
        for r in MELNIKOV_R:
            worst = max(worst, abs(melnikov(p, r * r, tol=1e-12) - melnikov_closed_form(m, r)))
    zero_err = {}
    for m in MELNIKOV_M:
        p = vil_problem(m)
        z = roots.find_root(lambda r: melnikov(p, r * r, tol=1e-11), (1.0, 2.5), tol=1e-12)
        zero_err[m] = abs(z - math.sqrt((m + 4) / 3))
    rep = run("vil", m=2, **{"lambda": Fraction(1, 20)}).report
    amp = rep.cycles[0].amplitude if rep.count == 1 else math.nan
    amp_err = abs(amp / math.sqrt(2) - 1)
    ok = worst < 1e-8 and max(zero_err.values()) <= 1e-6 and amp_err <= 0.05
    detail = (f"max |quad - closed| = {worst:.1e}; max zero error = {max(zero_err.values()):.1e}; "
              f"amplitude at lambda=0.05 = {amp:.6f} ({100 * amp_err:.2f}% from sqrt 2)")
    return CheckResult(5, "Melnikov function", ok, detail,
                       {"max_diff": worst, "zero_errors": zero_err, "amplitude": amp, "cycles": rep.count})


def check_6() -> CheckResult:
    cases = {
        "van der Pol circle": (families.get("vdp").candidates[0].V, 1),
        "wilson-ext V at b=1/2": (families.get("wilc", {"b": Fraction(1, 2)}).candidates[0].V, 2),
        "eq1-3 V": (families.get("eq1-3").candidates[0].V, 2),
        "generalized van der Pol V": (families.get("vdp-lienard").candidates[0].V, 1),
    }
    got, ok = {}, True
    for name, (V, want) in cases.items():
        t = count_bounded_components(V)
        got[name] = (t.count, t.method, t.exact)
        ok &= t.exact and t.count == want
    detail = "; ".join(f"{k}: L={v[0]}" for k, v in got.items())
    return CheckResult(6, "L(V) counts", ok, detail, {"counts": got})


def _where(c) -> str:
    if abs(c.r - 1) < 1e-5:
        return "circle"
    return "inside" if c.r < 1 else "outside"


def _circle_drift(b) -> float:
    X = families.get("wilc", {"b": b}).field
    tr = integrate(X, (1.0, 0.0), (0.0, CIRCLE_TIME), tol=1e-12)
    return float(np.max(np.abs(tr.y[:, 0] ** 2 + tr.y[:, 1] ** 2 - 1)))


def check_7() -> CheckResult:
    rows, ok = [], True
    for b in WILC_GRID:
        sc = families.scenario_table_wilc(float(b))
        rep = run("wilc", b=b).report
        seen = tuple((_where(c), c.stability) for c in rep.cycles)
        match = rep.count == sc.count and sorted(seen) == sorted(sc.cycles)
        ok &= match
        rows.append(f"b={float(b):g} case {sc.case}: {list(seen)}{'' if match else ' MISMATCH'}")
    bs = roots.b_star()
    mu = return_multiplier(families.get("wilc", {"b": bs}).field, families.get("wilc").section, 1.0)
    ok_star = abs(mu - 1) < 1e-3
    drift = {float(b): _circle_drift(b) for b in (*WILC_GRID, _b_star_fraction())}
    ok_circle = max(drift.values()) < CIRCLE_TOL
    detail = (f"{'; '.join(rows)}; circle multiplier at b*: {mu:.6f}; "
              f"max circle drift {max(drift.values()):.1e}")
    return CheckResult(7, "wilc scenario grid", ok and ok_star and ok_circle, detail,
                       {"rows": rows, "multiplier_b_star": mu, "circle_drift": drift})


def check_8() -> CheckResult:
    r = run("eq1-3")
    inst, rep = r.instance, r.report
    x0, x1, y0, y1 = inst.box
    eqs = [e.point for e in equilibria(inst.field, box=(x0, x1, y0, y1))]
    inside = []
    for c in rep.cycles:
        orb = cycle_orbit(inst.field, inst.section, c.r)
        in_box = bool(np.all((orb[:, 0] >= x0) & (orb[:, 0] <= x1) & (orb[:, 1] >= y0) & (orb[:, 1] <= y1)))
        if in_box:
            inside.append((c, [winding_number(orb, p) for p in eqs]))
    ok = len(inside) == 1 and len(eqs) == 3 and all(abs(w) == 1 for w in inside[0][1])
    data = {"equilibria": eqs, "cycles": [c.to_dict() for c, _ in inside]}
    if inside:
        c = inside[0][0]
        expected = inst.prediction.cycles[0][1]
        flag = ("measured stability agrees with -V M_1" if c.stability == expected
                else f"DISCREPANCY: measured {c.stability}, certificate predicts {expected}")
        flag += "; it repels (multiplier > 1), it is not an attractor" if c.stability == "repeller" else ""
        data["flag"] = flag
        detail = (f"{len(inside)} cycle in box, r={c.r:.6f}, period {c.period:.4f}, "
                  f"multiplier {c.multiplier:.6g} ({c.stability}); encloses {len(eqs)} equilibria; {flag}")
    else:
        detail = f"{len(inside)} cycles in the box"
    return CheckResult(8, "eq1-3 cycle", ok, detail, data)


def check_9() -> CheckResult:
    rows, ok, skipped = [], True, []
    for r in _points_4_to_8():
        if r.cert is None or not r.cert.certified:
            skipped.append(r.label)
            continue
        good = r.cert.bound >= r.report.count
        ok &= good
        rows.append((r.label, r.cert.bound, r.report.count, good))
    bad = [x for x in rows if not x[3]]
    detail = f"{len(rows)} certified points, bound >= count on all: {not bad}"
    if skipped:
        detail += f"; uncertified (no bound claimed): {', '.join(skipped)}"
    return CheckResult(9, "bound dominance", ok and bool(rows), detail, {"rows": rows, "skipped": skipped})


def _sgn(v: float) -> int:
    return int(v > 0) - int(v < 0)


def check_10() -> CheckResult:
    rows, ok = [], True
    for r in _points_4_to_8():
        for c in r.report.cycles:
            if abs(c.multiplier - 1) <= ETA:
                rows.append((r.label, c.r, "near-degenerate, skipped"))
                continue
            s_mu = _sgn(c.multiplier - 1)
            try:
                dil = diliberto_stability(r.instance.field, c, r.instance.section)
                s_dil = _sgn(dil.integral) if abs(dil.integral) > DILIBERTO_EPS else None
                s_raw = _sgn(dil.raw_arclength) if abs(dil.raw_arclength) > DILIBERTO_EPS else None
            except IntegrationError:
                s_dil = s_raw = None
            good = s_dil in (None, s_mu) and s_raw in (None, s_mu)
            note = (f"mu-1 sign {s_mu:+d}, Diliberto dt-form {s_dil if s_dil is not None else 'n/a'}, "
                    f"ds-form {s_raw if s_raw is not None else 'n/a'}")
            if r.cert is not None and r.cert.certified and not r.cert.on_curve(c.fixed_point):
                s_reg = r.cert.stability_at(c.fixed_point)
                good &= s_reg == s_mu
                note += f", region {s_reg:+d}"
            else:
                note += ", region n/a"
            ok &= good
            rows.append((r.label, c.r, note + ("" if good else " MISMATCH")))
    n = sum(1 for x in rows if "skipped" not in x[2])
    bad = [x for x in rows if "MISMATCH" in x[2]]
    detail = f"{n} cycles compared, {len(bad)} disagreements"
    if bad:
        detail += ": " + "; ".join(f"{a} r={b:.6g} {c}" for a, b, c in bad)
    return CheckResult(10, "stability cross-validation", ok and n > 0, detail, {"rows": rows})


CHECKS = (check_1, check_2, check_3, check_4, check_5, check_6, check_7, check_8, check_9, check_10)


def run_all(echo=None) -> list[CheckResult]:
    out = []
    for chk in CHECKS:
        try:
            res = chk()
        except Exception as exc:  # a crash is a failure of that criterion, not of the report
            n = CHECKS.index(chk) + 1
            res = CheckResult(n, chk.__name__, False, f"error: {type(exc).__name__}: {exc}")
        out.append(res)
        if echo is not None:
            echo(res.line())
    return out
