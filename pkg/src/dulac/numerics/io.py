"""CSV output with floats at 17 significant digits."""

from __future__ import annotations

import csv
import io
import math
import numbers
from fractions import Fraction
from typing import Iterable, Sequence


def _terminates(d: int) -> bool:
    for p in (2, 5):
        while d % p == 0:
            d //= p
    return d == 1


def _exact_decimal(v: Fraction) -> str:
    # exact value of a rational with a 2^a 5^b denominator, e.g. 7/5 -> 1.4
    k = 0
    while (10 ** k) % v.denominator:
        k += 1
    n = abs(v.numerator) * 10 ** k // v.denominator
    digits = str(n).rjust(k + 1, "0")
    s = digits[:len(digits) - k] + ("." + digits[len(digits) - k:] if k else "")
    return ("-" if v < 0 else "") + s


def fmt(v) -> str:
    if isinstance(v, bool) or v is None:
        return "" if v is None else str(v).lower()
    if isinstance(v, numbers.Integral):
        return str(int(v))
    if isinstance(v, Fraction) and _terminates(v.denominator):
        return _exact_decimal(v)
    if isinstance(v, numbers.Real):
        v = float(v)
        return "nan" if math.isnan(v) else f"{v:.17g}"
    if isinstance(v, (list, tuple)):
        return ";".join(fmt(u) for u in v)
    return str(v)


def csv_text(header: Sequence[str], rows: Iterable[Sequence]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([fmt(v) for v in row])
    return buf.getvalue()


def write_csv(path, header: Sequence[str], rows: Iterable[Sequence]) -> str:
    text = csv_text(header, rows)
    if path is not None:
        with open(path, "w", newline="") as fh:
            fh.write(text)
    return text


def trajectory_rows(traj) -> list[tuple]:
    return [(float(t), float(p[0]), float(p[1])) for t, p in zip(traj.t, traj.y)]
