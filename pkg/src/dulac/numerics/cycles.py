"""Limit cycles through Poincare return maps on a ray section."""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field

import numpy as np
from scipy import optimize
from scipy.integrate import solve_ivp

from ..bendixson import curvature_Kperp
from ..field import VectorField
from .ode import MAX_RADIUS, MAX_TIME, IntegrationError, Step, steps

ETA = 1e-4
MIN_TRANSVERSAL = 1e-8
STRONG_CONTRACTION = 1e-3  # below this the centred difference is replaced by the divergence integral
SETTLED = 1e-9  # speed below which an orbit is taken to have reached an equilibrium
EXPLICIT_BUDGET = 8_000  # explicit steps before handing a (stiff) orbit to LSODA


@dataclass(frozen=True)
class Section:
    """Ray ``c + r (cos a, sin a)``, ``r > 0``."""

    center: tuple = (0.0, 0.0)
    angle: float = 0.0

    @property
    def label(self) -> str:
        if self.angle == 0.0:
            return "ray theta=0" if self.center == (0.0, 0.0) else f"ray from {self.center} along +x"
        return f"ray from {self.center} at angle {self.angle:.6g}"

    def point(self, r: float) -> tuple[float, float]:
        return (self.center[0] + r * math.cos(self.angle), self.center[1] + r * math.sin(self.angle))

    def coords(self, x: float, y: float) -> tuple[float, float]:
        """``(along, across)`` coordinates relative to the ray."""
        dx, dy = x - self.center[0], y - self.center[1]
        ca, sa = math.cos(self.angle), math.sin(self.angle)
        return dx * ca + dy * sa, -dx * sa + dy * ca


@dataclass(frozen=True)
class Return:
    r: float  # radius of the return point
    time: float
    amplitude: float  # max distance from the section centre along the orbit
    status: str = "ok"  # ok | escaped | equilibrium | no-return | grazing


@dataclass(frozen=True)
class CycleEstimate:
    section: str
    fixed_point: tuple
    r: float
    period: float
    amplitude: float
    multiplier: float
    stability: str  # attractor | repeller | near-degenerate
    displacement: float
    kind: str = "transversal"  # transversal | touch

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass
class CycleReport:
    cycles: list
    center: bool = False
    escaping: int = 0
    samples: list = field(default_factory=list)  # (r, d) pairs
    notes: list = field(default_factory=list)

    @property
    def count(self) -> int:
        return len(self.cycles)


def stability_of(multiplier: float, eta: float = ETA) -> str:
    if multiplier < 1 - eta:
        return "attractor"
    if multiplier > 1 + eta:
        return "repeller"
    return "near-degenerate"


class ReturnMap:
    """First return to the ray of a field, with the caps of the integrator."""

    def __init__(self, X, section: Section, tol: float = 1e-10, t_max: float = MAX_TIME,
                 max_radius: float = MAX_RADIUS):
        self.f = X.rhs if isinstance(X, VectorField) else X
        self.section = section
        self.tol = tol
        self.t_max = t_max
        self.max_radius = max_radius
        self.orientation = self._orientation()

    def _orientation(self) -> int:
        # sign of the across-component of X on the ray, sampled at a few radii
        s = 0.0
        for r in (0.3, 0.7, 1.3, 2.0):
            p = self.section.point(r)
            u, v = self.f(*p)
            ca, sa = math.cos(self.section.angle), math.sin(self.section.angle)
            s += -u * sa + v * ca
        return 1 if s >= 0 else -1

    def across_speed(self, r: float) -> float:
        p = self.section.point(r)
        u, v = self.f(*p)
        ca, sa = math.cos(self.section.angle), math.sin(self.section.angle)
        return -u * sa + v * ca

    def __call__(self, r: float, keep: bool = False):
        sec = self.section
        p0 = sec.point(r)
        if abs(self.across_speed(r)) < MIN_TRANSVERSAL:
            return (Return(math.nan, math.nan, math.nan, "grazing"), []) if keep else \
                Return(math.nan, math.nan, math.nan, "grazing")
        o = 1 if self.across_speed(r) > 0 else -1
        prev = 0.0
        amp = r
        segs: list[Step] = []
        try:
            for s in steps(self.f, 0.0, p0, tol=self.tol, t_end=self.t_max, max_radius=self.max_radius,
                           max_steps=EXPLICIT_BUDGET):
                if keep:
                    segs.append(s)
                x1, y1 = s(s.t0 + s.h)
                along, across = sec.coords(x1, y1)
                u, v = self.f(x1, y1)
                if abs(u) + abs(v) < SETTLED * (1.0 + abs(x1) + abs(y1)):
                    ret = Return(math.nan, math.nan, amp, "equilibrium")
                    return (ret, segs) if keep else ret
                amp = max(amp, math.hypot(along, across))
                if prev * o < 0 <= across * o and along > 0:
                    g = lambda t: sec.coords(*s(t))[1]  # noqa: E731
                    if across == 0:
                        tc = s.t0 + s.h
                    else:
                        tc = optimize.brentq(g, s.t0, s.t0 + s.h, xtol=1e-15, rtol=4 * np.finfo(float).eps)
                    xc, yc = s(tc)
                    a, _ = sec.coords(xc, yc)
                    if a > 0:
                        ret = Return(a, tc, amp)
                        return (ret, segs) if keep else ret
                prev = across if across != 0 else prev
        except IntegrationError as exc:
            if "maximum number" in str(exc):
                t, x, y = exc.partial
                ret = self._stiff_tail(t, (x, y), prev, o, amp)
                return (ret, segs) if keep else ret
            status = "escaped" if "escaped" in str(exc) else "failed"
            ret = Return(math.nan, math.nan, amp, status)
            return (ret, segs) if keep else ret
        ret = Return(math.nan, math.nan, amp, "no-return")
        return (ret, segs) if keep else ret

    def _stiff_tail(self, t0: float, p0, prev: float, o: int, amp: float) -> Return:
        # implicit continuation for orbits that exhaust the explicit budget
        sec = self.section
        f = self.f

        def rhs(t, p):
            return f(p[0], p[1])

        def cross(t, p):
            return sec.coords(p[0], p[1])[1]
        cross.direction = o

        def escape(t, p):
            return p[0] * p[0] + p[1] * p[1] - self.max_radius ** 2
        escape.terminal = True

        t, p = t0, np.array(p0, dtype=float)
        while t < self.t_max:
            sol = solve_ivp(rhs, (t, self.t_max), p, method="LSODA", rtol=max(self.tol, 1e-12), atol=self.tol,
                            events=(cross, escape))
            if sol.y.size:
                amp = max(amp, float(np.max(np.hypot(*sec.coords(sol.y[0], sol.y[1])))))
            if sol.status == -1:
                return Return(math.nan, math.nan, amp, "failed")
            if sol.t_events[1].size:
                return Return(math.nan, math.nan, amp, "escaped")
            hit = [(tc, yc) for tc, yc in zip(sol.t_events[0], sol.y_events[0]) if sec.coords(*yc)[0] > 0]
            if hit:
                tc, yc = hit[0]
                return Return(sec.coords(*yc)[0], float(tc), amp)
            if sol.status == 0:
                break
            t, p = sol.t[-1], sol.y[:, -1]
        return Return(math.nan, math.nan, amp, "no-return")

    def displacement(self, r: float) -> float:
        ret = self(r)
        return ret.r - r if ret.status == "ok" else math.nan


def multiplier(rm: ReturnMap, r: float) -> float:
    """Derivative of the return map at ``r`` by centred differences."""
    h = max(math.sqrt(rm.tol), 1e-7) * max(1.0, r)
    h = min(h, 0.25 * r)
    a, b = rm(r + h), rm(r - h)
    if a.status != "ok" or b.status != "ok":
        return math.nan
    return (a.r - b.r) / (2 * h)


def _refine_sign_change(rm: ReturnMap, a: float, b: float, da: float, db: float, xtol: float):
    f = rm.displacement
    try:
        return optimize.brentq(f, a, b, xtol=xtol, rtol=1e-14, maxiter=200)
    except ValueError:
        return None


def find_cycles(X, section: Section = Section(), r_range=(0.05, 4.0), tol: float = 1e-10,
                n_grid: int = 48, eta: float = ETA, touch_tol: float = 1e-7) -> CycleReport:
    """Locate limit cycles crossing ``section`` at radii inside ``r_range``."""
    rm = ReturnMap(X, section, tol=tol)
    rmin, rmax = float(r_range[0]), float(r_range[1])
    if not 0 < rmin < rmax:
        raise ValueError("r_range must satisfy 0 < rmin < rmax")
    rs = list(np.linspace(rmin, rmax, n_grid))
    ds = [rm.displacement(r) for r in rs]
    report = CycleReport([], samples=[])
    report.escaping = sum(1 for d in ds if math.isnan(d))

    # refine the grid near small displacements and near sign changes
    for _ in range(2):
        extra = []
        for i in range(len(rs) - 1):
            da, db = ds[i], ds[i + 1]
            if math.isnan(da) or math.isnan(db):
                if math.isnan(da) != math.isnan(db):  # edge of the returning region
                    extra.append(0.5 * (rs[i] + rs[i + 1]))
                continue
            small = min(abs(da), abs(db)) < 0.05 * (rs[i + 1] - rs[i]) + 1e-6
            if small and np.sign(da) == np.sign(db):
                extra += list(np.linspace(rs[i], rs[i + 1], 5)[1:-1])
        if not extra:
            break
        for r in extra:
            rs.append(r)
            ds.append(rm.displacement(r))
        order = np.argsort(rs)
        rs = [rs[i] for i in order]
        ds = [ds[i] for i in order]
    report.samples = list(zip(rs, ds))

    finite = [abs(d) for d in ds if not math.isnan(d)]
    scale = max(1.0, rmax)
    if finite and len(finite) == len(ds) and max(finite) < 1e3 * tol * scale:
        report.center = True
        report.notes.append("displacement vanishes on the whole range: continuum of periodic orbits (center)")
        return report

    roots: list[tuple[float, str]] = []
    xtol = max(tol, 1e-13)
    for i in range(len(rs) - 1):
        da, db = ds[i], ds[i + 1]
        if math.isnan(da) or math.isnan(db):
            continue
        if da == 0:
            roots.append((rs[i], "transversal"))
        elif da * db < 0:
            r = _refine_sign_change(rm, rs[i], rs[i + 1], da, db, xtol)
            if r is not None:
                roots.append((r, "transversal"))
    if ds and ds[-1] == 0:
        roots.append((rs[-1], "transversal"))

    # tangential zeros (double cycles): local minima of |d| without sign change
    for i in range(1, len(rs) - 1):
        d0, d1, d2 = ds[i - 1], ds[i], ds[i + 1]
        if any(math.isnan(v) for v in (d0, d1, d2)) or d0 * d1 <= 0 or d1 * d2 <= 0:
            continue
        if abs(d1) <= abs(d0) and abs(d1) <= abs(d2):
            res = optimize.minimize_scalar(lambda r: abs(rm.displacement(r)), bounds=(rs[i - 1], rs[i + 1]),
                                           method="bounded", options={"xatol": 1e-9})
            if res.success and abs(res.fun) < touch_tol * scale:
                roots.append((_refine_touch(rm, float(res.x), rs[i - 1], rs[i + 1]), "touch"))

    for r, kind in sorted(roots):
        if any(abs(r - c.r) < 1e-6 * max(1.0, r) for c in report.cycles):
            continue
        ret = rm(r)
        if ret.status != "ok":
            continue
        d = ret.r - r
        if abs(d) > 1e3 * max(tol, 1e-12) * scale:
            report.notes.append(f"sign change at r={r:.10g} is a discontinuity (|d|={abs(d):.3g}), discarded")
            continue
        mu = multiplier(rm, r)
        if mu < STRONG_CONTRACTION and isinstance(X, VectorField):
            # differences of returns that agree to ~tol cannot resolve a tiny multiplier
            try:
                mu = math.exp(_orbit_integrals(X, rm, r)[2])
                report.notes.append(f"multiplier at r={r:.10g} from exp(oint div X dt)")
            except IntegrationError:
                pass
        stab = stability_of(mu, eta) if kind == "transversal" else "near-degenerate"
        report.cycles.append(CycleEstimate(section.label, section.point(r), r, ret.time, ret.amplitude, mu,
                                           stab, d, kind))
    return report


def _refine_touch(rm: ReturnMap, r0: float, lo: float, hi: float) -> float:
    """Stationary point of a cubic fitted to d(r) around a double zero.

    Minimising |d| only resolves the zero to sqrt(noise / d''), since d is flat there; a fit over a
    window where d'' (r - r0)^2 dominates the noise recovers it to noise / (h d'').
    """
    h = min(1e-3 * max(1.0, r0), 0.25 * (hi - lo))
    e = np.linspace(-h, h, 9)
    try:
        d = np.array([rm.displacement(r0 + t) for t in e])
    except IntegrationError:
        return r0
    if not np.all(np.isfinite(d)):
        return r0
    c3, c2, c1, _ = np.polyfit(e / h, d, 3)
    crit = np.roots([3 * c3, 2 * c2, c1])
    crit = crit[np.isreal(crit)].real
    crit = crit[np.abs(crit) <= 1]
    if crit.size == 0:
        return r0
    return r0 + h * float(crit[np.argmin(np.abs(crit))])


def return_multiplier(X, section: Section, r: float, tol: float = 1e-11) -> float:
    return multiplier(ReturnMap(X, section, tol=tol), r)


# Gauss-Legendre nodes on [0, 1] for integrating along dense output
_GL_X, _GL_W = np.polynomial.legendre.leggauss(6)
_GL_X = 0.5 * (_GL_X + 1)
_GL_W = 0.5 * _GL_W


@dataclass(frozen=True)
class DilibertoResult:
    integral: float  # closed-orbit integral of K_perp / |X|^2 dt (= ln multiplier)
    raw_arclength: float  # closed-orbit integral of K_perp ds
    divergence: float  # closed-orbit integral of div X dt
    sign: int


def diliberto_stability(X: VectorField, cycle: CycleEstimate, section: Section, tol: float = 1e-11) -> DilibertoResult:
    """Orbit integrals of the normalised K_perp, raw K_perp and div X."""
    I, raw, div = _orbit_integrals(X, ReturnMap(X, section, tol=tol), cycle.r)
    return DilibertoResult(I, raw, div, int(np.sign(I)))


def _orbit_integrals(X: VectorField, rm: ReturnMap, r: float) -> tuple[float, float, float]:
    ret, segs = rm(r, keep=True)
    if ret.status != "ok":
        raise IntegrationError(f"cycle at r={r} did not return: {ret.status}")
    kp = curvature_Kperp(X).lambdify()
    dv = X.divergence().lambdify()
    f = X.rhs
    I = raw = div = 0.0
    for s in segs:
        t1 = min(s.t0 + s.h, ret.time)
        if t1 <= s.t0:
            break
        h = t1 - s.t0
        for xg, wg in zip(_GL_X, _GL_W):
            p = s(s.t0 + xg * h)
            u, v = f(*p)
            n2 = u * u + v * v
            k = kp(*p)
            I += wg * h * k / n2
            raw += wg * h * k * math.sqrt(n2)
            div += wg * h * dv(*p)
    return I, raw, div


def cycle_orbit(X, section: Section, r: float, tol: float = 1e-11, per_step: int = 4) -> np.ndarray:
    """Points along the closed orbit through ``section.point(r)``, shape ``(n, 2)``."""
    ret, segs = ReturnMap(X, section, tol=tol)(r, keep=True)
    if ret.status != "ok":
        raise IntegrationError(f"orbit through r={r} did not return: {ret.status}")
    pts = [section.point(r)]
    for s in segs:
        t1 = min(s.t0 + s.h, ret.time)
        if t1 <= s.t0:
            break
        for k in range(1, per_step + 1):
            pts.append(s(s.t0 + (t1 - s.t0) * k / per_step))
    return np.array(pts, dtype=float)


def winding_number(orbit: np.ndarray, point) -> int:
    """Winding number of the closed polyline ``orbit`` around ``point``."""
    d = orbit - np.asarray(point, dtype=float)
    ang = np.arctan2(d[:, 1], d[:, 0])
    step = np.diff(np.append(ang, ang[0]))
    step = (step + np.pi) % (2 * np.pi) - np.pi
    return int(round(step.sum() / (2 * np.pi)))
