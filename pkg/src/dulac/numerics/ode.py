"""Dormand-Prince 5(4) for planar fields, with Hairer's dense output.

The stepper works on scalar pairs rather than arrays: for a two-dimensional
state the numpy call overhead would dominate the arithmetic.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

A21 = 1 / 5
A31, A32 = 3 / 40, 9 / 40
A41, A42, A43 = 44 / 45, -56 / 15, 32 / 9
A51, A52, A53, A54 = 19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729
A61, A62, A63, A64, A65 = 9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656
A71, A73, A74, A75, A76 = 35 / 384, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84
E1, E3, E4, E5, E6, E7 = 71 / 57600, -71 / 16695, 71 / 1920, -17253 / 339200, 22 / 525, -1 / 40
D1, D3, D4 = -12715105075 / 11282082432, 87487479700 / 32700410799, -10690763975 / 1880347072
D5, D6, D7 = 701980252875 / 199316789632, -1453857185 / 822651844, 69997945 / 29380423

MAX_TIME = 1e4
MAX_RADIUS = 1e3
ROUNDOFF = 64 * 2.220446049250313e-16


class IntegrationError(RuntimeError):
    def __init__(self, msg, partial=None):
        super().__init__(msg)
        self.partial = partial


@dataclass
class Step:
    """One accepted step with its interpolation coefficients."""

    t0: float
    h: float
    r: tuple  # ((x1..x5), (y1..y5)) Hairer coefficients

    def __call__(self, t: float) -> tuple[float, float]:
        th = (t - self.t0) / self.h
        th1 = 1.0 - th
        (a1, a2, a3, a4, a5), (b1, b2, b3, b4, b5) = self.r
        return (
            a1 + th * (a2 + th1 * (a3 + th * (a4 + th1 * a5))),
            b1 + th * (b2 + th1 * (b3 + th * (b4 + th1 * b5))),
        )


def _initial_step(f, t0, x, y, fx, fy, tol, direction):
    sc0 = max(tol, ROUNDOFF * abs(x)), max(tol, ROUNDOFF * abs(y))
    d0 = math.hypot(x / sc0[0], y / sc0[1]) / math.sqrt(2)
    d1 = math.hypot(fx / sc0[0], fy / sc0[1]) / math.sqrt(2)
    h0 = 1e-6 if d0 < 1e-5 or d1 < 1e-5 else 0.01 * d0 / d1
    gx, gy = f(x + direction * h0 * fx, y + direction * h0 * fy)
    d2 = math.hypot((gx - fx) / sc0[0], (gy - fy) / sc0[1]) / math.sqrt(2) / h0
    if max(d1, d2) <= 1e-15:
        h1 = max(1e-6, h0 * 1e-3)
    else:
        h1 = (0.01 / max(d1, d2)) ** 0.2
    return min(100 * h0, h1)


def steps(f: Callable, t0: float, p0, tol: float = 1e-10, t_end: float = MAX_TIME,
          max_radius: float = MAX_RADIUS, h_min: float = 1e-14, max_steps: int = 2_000_000):
    """Generator of accepted ``Step`` objects from ``(t0, p0)`` towards ``t_end``.

    Stops silently at ``t_end``; raises ``IntegrationError`` on step underflow,
    non-finite values or when the radius cap is exceeded (``escaped`` flag in
    the message).
    """
    direction = 1.0 if t_end >= t0 else -1.0
    t = float(t0)
    x, y = float(p0[0]), float(p0[1])
    k1x, k1y = f(x, y)
    h = direction * _initial_step(f, t, x, y, k1x, k1y, tol, direction)
    n = 0
    while direction * (t_end - t) > 0:
        if n >= max_steps:
            raise IntegrationError("maximum number of steps reached", (t, x, y))
        if direction * (t + h - t_end) > 0:
            h = t_end - t
        k2x, k2y = f(x + h * A21 * k1x, y + h * A21 * k1y)
        k3x, k3y = f(x + h * (A31 * k1x + A32 * k2x), y + h * (A31 * k1y + A32 * k2y))
        k4x, k4y = f(x + h * (A41 * k1x + A42 * k2x + A43 * k3x), y + h * (A41 * k1y + A42 * k2y + A43 * k3y))
        k5x, k5y = f(
            x + h * (A51 * k1x + A52 * k2x + A53 * k3x + A54 * k4x),
            y + h * (A51 * k1y + A52 * k2y + A53 * k3y + A54 * k4y),
        )
        k6x, k6y = f(
            x + h * (A61 * k1x + A62 * k2x + A63 * k3x + A64 * k4x + A65 * k5x),
            y + h * (A61 * k1y + A62 * k2y + A63 * k3y + A64 * k4y + A65 * k5y),
        )
        xn = x + h * (A71 * k1x + A73 * k3x + A74 * k4x + A75 * k5x + A76 * k6x)
        yn = y + h * (A71 * k1y + A73 * k3y + A74 * k4y + A75 * k5y + A76 * k6y)
        k7x, k7y = f(xn, yn)
        ex = h * (E1 * k1x + E3 * k3x + E4 * k4x + E5 * k5x + E6 * k6x + E7 * k7x)
        ey = h * (E1 * k1y + E3 * k3y + E4 * k4y + E5 * k5y + E6 * k6y + E7 * k7y)
        # absolute local error below tol, floored at the roundoff level of the state
        scx = max(tol, ROUNDOFF * max(abs(x), abs(xn)))
        scy = max(tol, ROUNDOFF * max(abs(y), abs(yn)))
        err = math.sqrt(0.5 * ((ex / scx) ** 2 + (ey / scy) ** 2))
        if not math.isfinite(err):
            h *= 0.2
            if abs(h) < h_min:
                raise IntegrationError("non-finite state", (t, x, y))
            continue
        if err <= 1.0:
            dx, dy = xn - x, yn - y
            bx, by = h * k1x - dx, h * k1y - dy
            rx = (x, dx, bx, dx - h * k7x - bx, h * (D1 * k1x + D3 * k3x + D4 * k4x + D5 * k5x + D6 * k6x + D7 * k7x))
            ry = (y, dy, by, dy - h * k7y - by, h * (D1 * k1y + D3 * k3y + D4 * k4y + D5 * k5y + D6 * k6y + D7 * k7y))
            yield Step(t, h, (rx, ry))
            t += h
            x, y = xn, yn
            k1x, k1y = k7x, k7y
            n += 1
            if x * x + y * y > max_radius * max_radius:
                raise IntegrationError("escaped: radius cap exceeded", (t, x, y))
            fac = 10.0 if err == 0 else min(10.0, max(0.2, 0.9 * err ** -0.2))
        else:
            fac = max(0.2, 0.9 * err ** -0.2)
        h *= fac
        if abs(h) < h_min * max(1.0, abs(t)):
            raise IntegrationError("step size underflow", (t, x, y))


@dataclass
class Trajectory:
    t: np.ndarray
    y: np.ndarray  # shape (n, 2)
    status: str  # "ok" | "escaped" | "failed"
    message: str = ""
    segments: list = field(default_factory=list, repr=False)

    def sol(self, t: float) -> tuple[float, float]:
        """Dense output at ``t`` inside the integrated span."""
        ts = [s.t0 for s in self.segments]
        i = int(np.searchsorted(ts, t, side="right")) - 1 if self.segments[0].h > 0 else \
            len(ts) - 1 - int(np.searchsorted(ts[::-1], t, side="left"))
        i = min(max(i, 0), len(self.segments) - 1)
        return self.segments[i](t)


def _as_rhs(X):
    if callable(X):
        return X
    rhs = X.rhs
    return lambda x, y: rhs(x, y)


def integrate(X, x0, t_span=(0.0, 10.0), tol: float = 1e-10, max_radius: float = MAX_RADIUS) -> Trajectory:
    """Integrate ``X`` (a VectorField or ``f(x, y) -> (u, v)``) from ``x0``."""
    if tol <= 0:
        raise ValueError("tol must be positive")
    f = _as_rhs(X)
    t0, t1 = float(t_span[0]), float(t_span[1])
    segs = []
    status, msg = "ok", ""
    try:
        for s in steps(f, t0, x0, tol=tol, t_end=t1, max_radius=max_radius):
            segs.append(s)
    except IntegrationError as exc:
        status = "escaped" if "escaped" in str(exc) else "failed"
        msg = str(exc)
    ts = [t0] + [s.t0 + s.h for s in segs]
    ys = [tuple(map(float, x0))] + [s(s.t0 + s.h) for s in segs]
    return Trajectory(np.array(ts), np.array(ys, dtype=float), status, msg, segs)
