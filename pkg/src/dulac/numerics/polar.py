"""Sign of the radial velocity of the wilc family on a polar grid."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ..field import VectorField


@dataclass(frozen=True)
class RadialSignReport:
    b: float
    inside: tuple  # (n_pos, n_neg) for r < 1
    outside: tuple  # (n_pos, n_neg) for r > 1
    max_field_mismatch: float  # |closed form - (x P + y Q)/r| over the grid

    @property
    def sign_change_outside(self) -> bool:
        return self.outside[0] > 0 and self.outside[1] > 0

    @property
    def sign_change_inside(self) -> bool:
        return self.inside[0] > 0 and self.inside[1] > 0


def radial_velocity(b: float, r, th):
    """``r' = r (r^2 - 1)(b - r^2 cos^2 th) cos^2 th``."""
    c2 = np.cos(th) ** 2
    return r * (r * r - 1) * (b - r * r * c2) * c2


def polar_radial_sign(X: VectorField, region=(0.0, 3.0), n_r: int = 300, n_theta: int = 360,
                      eps: float = 1e-12) -> RadialSignReport:
    """Tabulate the sign of ``r'`` on an ``(r, theta)`` grid avoiding ``r = 1``.

    Points with ``|cos theta|`` below ``1e-6`` are skipped: ``r'`` vanishes
    there identically.  The closed form is checked against the field itself.
    """
    pd = X.param_dict()
    if "b" not in pd:
        raise ValueError("polar_radial_sign needs a wilc field with bound parameter b")
    b = float(pd["b"])
    r0, r1 = float(region[0]), float(region[1])
    rs = np.linspace(max(r0, 1e-3), r1, n_r)
    rs = rs[np.abs(rs - 1) > 1e-6]
    ths = np.linspace(0, 2 * math.pi, n_theta, endpoint=False)
    ths = ths[np.abs(np.cos(ths)) > 1e-6]
    R, T = np.meshgrid(rs, ths, indexing="ij")
    rdot = radial_velocity(b, R, T)
    x, y = R * np.cos(T), R * np.sin(T)
    P, Q = X.rhs_vectorized(x, y)
    mismatch = float(np.max(np.abs(rdot - (x * P + y * Q) / R)))
    tol = eps * (1 + np.abs(rdot).max())
    pos, neg = rdot > tol, rdot < -tol
    inner, outer = R < 1, R > 1
    return RadialSignReport(
        b,
        (int((pos & inner).sum()), int((neg & inner).sum())),
        (int((pos & outer).sum()), int((neg & outer).sum())),
        mismatch,
    )
