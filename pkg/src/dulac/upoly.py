"""Exact univariate polynomials over Q as dense coefficient lists.

Coefficients are stored lowest degree first and trailing zeros are
stripped, so ``[]`` is the zero polynomial.
"""

from __future__ import annotations

import math
from fractions import Fraction
from typing import Sequence

UPoly = list  # list[Fraction]

INF = math.inf


def trim(p: Sequence) -> UPoly:
    p = [Fraction(c) for c in p]
    while p and not p[-1]:
        p.pop()
    return p


def degree(p: UPoly) -> int:
    return len(p) - 1


def add(a: UPoly, b: UPoly) -> UPoly:
    n = max(len(a), len(b))
    return trim([(a[i] if i < len(a) else 0) + (b[i] if i < len(b) else 0) for i in range(n)])


def neg(a: UPoly) -> UPoly:
    return [-c for c in a]


def sub(a: UPoly, b: UPoly) -> UPoly:
    return add(a, neg(b))


def mul(a: UPoly, b: UPoly) -> UPoly:
    if not a or not b:
        return []
    out = [Fraction(0)] * (len(a) + len(b) - 1)
    for i, ca in enumerate(a):
        if ca:
            for j, cb in enumerate(b):
                out[i + j] += ca * cb
    return trim(out)


def scale(a: UPoly, c) -> UPoly:
    return trim([x * c for x in a])


def deriv(a: UPoly) -> UPoly:
    return trim([k * a[k] for k in range(1, len(a))])


def divmod_(a: UPoly, b: UPoly) -> tuple[UPoly, UPoly]:
    if not b:
        raise ZeroDivisionError("polynomial division by zero")
    a = list(a)
    q = [Fraction(0)] * max(len(a) - len(b) + 1, 0)
    lb = b[-1]
    while len(a) >= len(b) and a:
        k = len(a) - len(b)
        c = a[-1] / lb
        q[k] = c
        for i, cb in enumerate(b):
            a[i + k] -= c * cb
        a = trim(a)
    return trim(q), a


def monic(a: UPoly) -> UPoly:
    return [c / a[-1] for c in a] if a else []


def gcd(a: UPoly, b: UPoly) -> UPoly:
    a, b = trim(a), trim(b)
    while b:
        a, b = b, divmod_(a, b)[1]
    return monic(a)


def evaluate(p: UPoly, x):
    acc = 0
    for c in reversed(p):
        acc = acc * x + c
    return acc


def sign(v) -> int:
    return (v > 0) - (v < 0)


def sign_at(p: UPoly, x) -> int:
    """Sign of ``p`` at ``x``; ``x`` may be ``±inf``."""
    if not p:
        return 0
    if x == INF:
        return sign(p[-1])
    if x == -INF:
        return sign(p[-1]) * (-1) ** degree(p)
    return sign(evaluate(p, x))


def sqf_part(p: UPoly) -> UPoly:
    """Product of the distinct irreducible factors (monic)."""
    p = trim(p)
    if len(p) <= 1:
        return monic(p)
    g = gcd(p, deriv(p))
    return monic(divmod_(p, g)[0])


def sqf_list(p: UPoly) -> tuple[Fraction, list[tuple[UPoly, int]]]:
    """Yun's square-free decomposition ``p = c * prod f_i**i``."""
    p = trim(p)
    if not p:
        raise ValueError("square-free decomposition of zero")
    c = p[-1]
    f = monic(p)
    if len(f) == 1:
        return c, []
    out = []
    a0 = gcd(f, deriv(f))
    b = divmod_(f, a0)[0]
    cc = divmod_(deriv(f), a0)[0]
    d = sub(cc, deriv(b))
    i = 1
    while len(b) > 1:
        a = gcd(b, d)
        if len(a) > 1:
            out.append((a, i))
        b = divmod_(b, a)[0]
        cc = divmod_(d, a)[0]
        d = sub(cc, deriv(b))
        i += 1
    return c, out


def odd_part(p: UPoly) -> UPoly:
    """Product of factors of odd multiplicity (sign changes occur only at its roots)."""
    _, factors = sqf_list(p)
    out: UPoly = [Fraction(1)]
    for f, k in factors:
        if k % 2:
            out = mul(out, f)
    return out


def sturm_sequence(p: UPoly) -> list[UPoly]:
    """Sturm sequence of the square-free part of ``p``."""
    f = sqf_part(p)
    seq = [f, deriv(f)]
    while seq[-1]:
        r = divmod_(seq[-2], seq[-1])[1]
        seq.append(neg(r))
    return seq[:-1]


def _variations(seq: list[UPoly], x) -> int:
    signs = [s for s in (sign_at(q, x) for q in seq) if s]
    return sum(1 for u, v in zip(signs, signs[1:]) if u != v)


def count_roots(p: UPoly, a=-INF, b=INF, seq: list[UPoly] | None = None) -> int:
    """Number of distinct real roots in the half-open interval ``(a, b]``."""
    if not trim(p):
        raise ValueError("zero polynomial has infinitely many roots")
    seq = seq if seq is not None else sturm_sequence(p)
    if len(seq[0]) <= 1:
        return 0
    return _variations(seq, a) - _variations(seq, b)


def count_roots_open(p: UPoly, a=-INF, b=INF) -> int:
    n = count_roots(p, a, b)
    if b not in (INF, -INF) and evaluate(trim(p), b) == 0:
        n -= 1
    return n


def root_bound(p: UPoly) -> Fraction:
    """Cauchy bound: every real root lies in ``(-B, B)``."""
    p = trim(p)
    lc = abs(p[-1])
    return 1 + max((abs(c) / lc for c in p[:-1]), default=Fraction(0))


def isolate_real_roots(p: UPoly) -> list[tuple[Fraction, Fraction]]:
    """Disjoint rational intervals ``[lo, hi]`` each holding exactly one real root.

    Endpoints are never roots unless ``lo == hi``; intervals are sorted.
    """
    f = sqf_part(trim(p))
    if len(f) <= 1:
        return []
    seq = sturm_sequence(f)
    bound = root_bound(f) + 1
    out: list[tuple[Fraction, Fraction]] = []
    stack = [(-bound, bound)]
    while stack:
        a, b = stack.pop()
        n = _variations(seq, a) - _variations(seq, b)
        if n == 0:
            continue
        if n == 1:
            out.append((a, b))
            continue
        mid = (a + b) / 2
        if evaluate(f, mid) == 0:
            out.append((mid, mid))
            # nudge off the exact root for the two halves
            eps = (b - a) / 1024
            while evaluate(f, mid - eps) == 0 or evaluate(f, mid + eps) == 0 or _variations(
                seq, mid - eps
            ) - _variations(seq, mid + eps) != 1:
                eps /= 2
            stack.append((a, mid - eps))
            stack.append((mid + eps, b))
        else:
            stack.append((a, mid))
            stack.append((mid, b))
    out.sort()
    return out


def refine_root(p: UPoly, interval: tuple[Fraction, Fraction], width) -> tuple[Fraction, Fraction]:
    """Bisect an isolating interval of a simple-rooted ``p`` down to ``width``."""
    f = sqf_part(trim(p))
    lo, hi = Fraction(interval[0]), Fraction(interval[1])
    width = Fraction(width)
    slo = sign(evaluate(f, lo))
    while hi - lo > width:
        mid = (lo + hi) / 2
        sm = sign(evaluate(f, mid))
        if sm == 0:
            return mid, mid
        if sm == slo:
            lo = mid
        else:
            hi = mid
    return lo, hi


def real_roots(p: UPoly, width=Fraction(1, 10**12)) -> list[tuple[Fraction, Fraction]]:
    return [refine_root(p, iv, width) for iv in isolate_real_roots(p)]


def _inner_roots(f: UPoly, lo, hi) -> list[tuple[Fraction, Fraction]]:
    """Isolating intervals of the roots of square-free ``f`` lying in the open
    interval ``(lo, hi)``, each refined to sit strictly inside it."""
    out = []
    for a, b in isolate_real_roots(f):
        for end in (lo, hi):
            if end in (INF, -INF):
                continue
            end = Fraction(end)
            if a < end < b:
                if evaluate(f, end) == 0:
                    a = b = end
                elif sign(evaluate(f, a)) != sign(evaluate(f, end)):
                    b = end
                else:
                    a = end
        if a == b:
            inside = (lo == -INF or a > lo) and (hi == INF or a < hi)
        else:
            inside = (lo == -INF or a >= lo) and (hi == INF or b <= hi)
        if not inside:
            continue
        while (lo != -INF and a == lo) or (hi != INF and b == hi):
            a, b = refine_root(f, (a, b), (b - a) / 2)
        out.append((a, b))
    return out


def gap_points(p: UPoly, lo=-INF, hi=INF) -> list[Fraction]:
    """One rational point in every open gap between consecutive real roots of
    ``p`` inside ``(lo, hi)``."""
    f = sqf_part(trim(p))
    roots = _inner_roots(f, lo, hi) if len(f) > 1 else []
    if not roots:
        if lo == -INF and hi == INF:
            return [Fraction(0)]
        if lo == -INF:
            return [Fraction(hi) - 1]
        if hi == INF:
            return [Fraction(lo) + 1]
        return [(Fraction(lo) + Fraction(hi)) / 2]
    pts = [roots[0][0] - 1 if lo == -INF else (Fraction(lo) + roots[0][0]) / 2]
    for (_, b1), (a2, _) in zip(roots, roots[1:]):
        pts.append((b1 + a2) / 2)
    pts.append(roots[-1][1] + 1 if hi == INF else (roots[-1][1] + Fraction(hi)) / 2)
    return pts


def nonneg_on(p: UPoly, lo=-INF, hi=INF) -> bool:
    """``p >= 0`` on the interval ``[lo, hi]`` (exact)."""
    p = trim(p)
    if not p:
        return True
    odd = odd_part(p)
    if count_roots_open(odd, lo, hi) > 0:
        return False
    # no odd-multiplicity root inside, so the sign away from roots is constant
    return evaluate(p, gap_points(p, lo, hi)[0]) > 0


def positive_roots_upper_bound(p: UPoly) -> int:
    """Descartes' rule of signs: sign changes of the coefficient sequence."""
    signs = [sign(c) for c in trim(p) if c]
    return sum(1 for u, v in zip(signs, signs[1:]) if u != v)
