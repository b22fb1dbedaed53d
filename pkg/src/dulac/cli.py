"""Command-line front end: ``dulac <command> [options]``.

Exit codes: 0 success (``verify``: certified), 2 uncertified, 1 error.
Every option can also come from an INI file given by ``--config``; its
``[common]`` section and the section named after the command hold flat
``key = value`` pairs, and flags given on the command line win.
"""

from __future__ import annotations

import argparse
import configparser
import json
import math
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from fractions import Fraction

import numpy as np

from . import families
from .bendixson import DulacCandidate, best_certificate, certificate
from .expr import as_fraction, parse
from .field import VectorField
from .numerics import roots
from .numerics.cycles import (IntegrationError, Section, cycle_orbit, diliberto_stability, find_cycles,
                              winding_number)
from .numerics.io import csv_text
from .numerics.quadrature import DomainError, melnikov, melnikov_closed_form, melnikov_zero, vil_problem, z_integral
from .topology import equilibria

EXIT_OK, EXIT_ERROR, EXIT_UNCERTIFIED = 0, 1, 2


class UsageError(ValueError):
    pass


@dataclass
class RunConfig:
    """Everything a run depends on; dumping it next to the output makes the run repeatable."""

    command: str
    family: str | None = None
    params: dict = field(default_factory=dict)
    P: str | None = None
    Q: str | None = None
    V: str | None = None
    s: str | None = None
    candidate: int | None = None
    sweep: tuple | None = None  # (name, start, stop, step)
    tol: float = 1e-10
    box: tuple | None = None
    r_range: tuple | None = None
    section: tuple | None = None
    seed: int = 0
    workers: int = 0
    extra: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        d = asdict(self)
        d["params"] = {k: str(v) for k, v in self.params.items()}
        return d


# ---------------------------------------------------------------------------
# parsing helpers


def _kv(text: str) -> tuple[str, str]:
    if "=" not in text:
        raise UsageError(f"expected key=value, got {text!r}")
    k, v = text.split("=", 1)
    return k.strip(), v.strip()


def _floats(text: str, n: tuple, what: str) -> tuple:
    parts = [p for p in text.replace(",", ":").split(":")]
    if len(parts) not in n:
        raise UsageError(f"{what}: expected {' or '.join(map(str, n))} numbers separated by ':', got {text!r}")
    return tuple(float(p) for p in parts)


def parse_range(text: str) -> tuple:
    """``name=a:b:step`` -> ``(name, a, b, step)`` with exact rational endpoints."""
    name, spec = _kv(text)
    parts = spec.split(":")
    if len(parts) != 3:
        raise UsageError(f"--range expects name=a:b:step, got {text!r}")
    a, b, h = (as_fraction(p) for p in parts)
    if h <= 0 or b < a:
        raise UsageError("--range needs step > 0 and a <= b")
    return name, a, b, h


def range_values(a: Fraction, b: Fraction, h: Fraction) -> list[Fraction]:
    n = int((b - a) / h)
    return [a + k * h for k in range(n + 1)]


def _box(text: str | None, default: tuple | None) -> tuple | None:
    if text is None:
        return None
    v = _floats(text, (2, 4), "--box")
    if len(v) == 2:  # x-range only; keep the default y-range
        y = default[2:] if default else (-4.0, 4.0)
        v = (v[0], v[1], *y)
    if v[0] >= v[1] or v[2] >= v[3]:
        raise UsageError("--box bounds must be increasing")
    return v


# ---------------------------------------------------------------------------
# building the problem


def _problem(cfg: RunConfig):
    """``(field, candidates, instance-or-None)`` for a family or raw input."""
    if cfg.family:
        inst = families.get(cfg.family, cfg.params)
        cands = list(inst.candidates)
        if cfg.V is not None:
            cands = [DulacCandidate(parse(cfg.V), as_fraction(cfg.s or 1), "user V")]
        elif cfg.s is not None:
            cands = [DulacCandidate(c.V, as_fraction(cfg.s), c.note) for c in cands]
        return inst.field, cands, inst
    if cfg.P is None or cfg.Q is None:
        raise UsageError("give --family or both --P and --Q")
    X = VectorField(parse(cfg.P), parse(cfg.Q))
    if cfg.params:
        X = X.subs(cfg.params)
    if X.free_params():
        raise UsageError(f"unbound parameters {sorted(X.free_params())}; bind them with --param")
    cands = []
    if cfg.V is not None:
        V = parse(cfg.V)
        if cfg.params:
            V = V.subs(cfg.params)
        cands.append(DulacCandidate(V, as_fraction(cfg.s or 1), "user V"))
    return X, cands, None


def _section(cfg: RunConfig, inst) -> Section:
    if cfg.section is not None:
        cx, cy, a = cfg.section
        return Section((cx, cy), a)
    return inst.section if inst is not None else Section()


def _r_range(cfg: RunConfig, inst) -> tuple:
    if cfg.r_range is not None:
        return cfg.r_range
    return inst.r_range if inst is not None else (0.05, 4.0)


def _dump(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=True, default=str)


def _emit(cfg: RunConfig, args, payload: dict, text: str, csv: str | None = None):
    out = {"config": cfg.to_dict(), **payload}
    if args.out:
        path = args.out
        with open(path, "w") as fh:
            fh.write(csv if csv is not None and path.endswith(".csv") else _dump(out) + "\n")
    if args.json:
        print(_dump(out))
    elif csv is not None and args.csv:
        sys.stdout.write(csv)
    else:
        print(text)


# ---------------------------------------------------------------------------
# commands


def cmd_families(cfg: RunConfig, args) -> int:
    if cfg.family:
        spec = families.FAMILIES.get(cfg.family)
        if spec is None:
            raise families.UnknownFamilyError(f"unknown family {cfg.family!r}")
        schemas = [spec.schema()]
    else:
        schemas = [families.FAMILIES[n].schema() for n in families.names()]
    lines = []
    for s in schemas:
        ps = ", ".join(f"{p['name']}={p['default']}" for p in s["params"]) or "no parameters"
        lines.append(f"{s['name']:14s} {s['summary']}\n{'':14s} [{ps}]")
    _emit(cfg, args, {"families": schemas}, "\n".join(lines))
    return EXIT_OK


def _select(cfg: RunConfig, X, cands, box):
    kw = dict(box=box, family=cfg.family, params=cfg.params, seed=cfg.seed)
    if not cands:
        raise UsageError("no Dulac candidate: give --V (and --s) for raw fields")
    if cfg.candidate is not None:
        if not 0 <= cfg.candidate < len(cands):
            raise UsageError(f"--candidate must be in 0..{len(cands) - 1}")
        return certificate(X, cands[cfg.candidate], **kw)
    return best_certificate(X, cands, **kw)


def cmd_verify(cfg: RunConfig, args) -> int:
    X, cands, inst = _problem(cfg)
    cert = _select(cfg, X, cands, cfg.box)
    d = cert.to_dict()
    if inst is not None:
        d["prediction"] = inst.prediction.to_dict()
    if cert.certified:
        head = f"certified: at most {cert.bound} limit cycle(s) (L = {cert.L}, N = {cert.N})"
    else:
        head = "uncertified: no bound claimed"
    lines = [head, f"V = {cert.candidate.V}", f"s = {cert.candidate.s}", f"M_s = {cert.Ms}",
             f"sign: {cert.effective_verdict.sign.value} via {cert.route}"]
    lines += [f"  {t}" for t in cert.effective_verdict.trace]
    lines += [f"note: {n}" for n in cert.notes]
    _emit(cfg, args, {"certificate": d}, "\n".join(lines))
    return EXIT_OK if cert.certified else EXIT_UNCERTIFIED


CYCLE_HEADER = ("r", "x", "y", "period", "amplitude", "multiplier", "stability", "kind", "diliberto",
                "in_box", "enclosed_equilibria")


def _cycle_rows(X, sec: Section, rep, box) -> tuple[list, list]:
    eqs = [e.point for e in equilibria(X, box=box)] if box is not None and X.is_polynomial() else []
    rows, dicts = [], []
    for c in rep.cycles:
        try:
            dil = diliberto_stability(X, c, sec).integral
        except IntegrationError:
            dil = math.nan
        in_box, enc = None, None
        if box is not None:
            orb = cycle_orbit(X, sec, c.r)
            in_box = bool(np.all((orb[:, 0] >= box[0]) & (orb[:, 0] <= box[1])
                                 & (orb[:, 1] >= box[2]) & (orb[:, 1] <= box[3])))
            enc = sum(1 for p in eqs if winding_number(orb, p) != 0)
        rows.append((c.r, c.fixed_point[0], c.fixed_point[1], c.period, c.amplitude, c.multiplier, c.stability,
                     c.kind, dil, in_box, enc))
        dicts.append({**c.to_dict(), "diliberto": dil, "in_box": in_box, "enclosed_equilibria": enc})
    return rows, dicts


def cmd_cycles(cfg: RunConfig, args) -> int:
    X, _, inst = _problem(cfg)
    sec = _section(cfg, inst)
    box = cfg.box
    rep = find_cycles(X, sec, _r_range(cfg, inst), tol=cfg.tol)
    rows, dicts = _cycle_rows(X, sec, rep, box)
    if box is not None:
        keep = [i for i, r in enumerate(rows) if r[9]]
        rows, dicts = [rows[i] for i in keep], [dicts[i] for i in keep]
    payload = {"section": sec.label, "cycles": dicts, "count": len(dicts), "center": rep.center,
               "escaping_samples": rep.escaping, "notes": rep.notes}
    if box is not None:
        payload["box"] = list(box)
    if rep.center:
        text = "center: continuum of periodic orbits, 0 isolated cycles"
    else:
        text = f"{len(dicts)} limit cycle(s) on {sec.label}" + (f" inside box {list(box)}" if box else "")
        for r in rows:
            text += (f"\n  r={r[0]:.10g} period={r[3]:.6g} amplitude={r[4]:.6g} multiplier={r[5]:.6g} {r[6]}"
                     + (f", encloses {r[10]} equilibria" if r[10] is not None else ""))
    text += "".join(f"\nnote: {n}" for n in rep.notes)
    _emit(cfg, args, payload, text, csv_text(CYCLE_HEADER, rows))
    return EXIT_OK


SWEEP_HEADER = ("value", "count", "bound", "certified", "radii", "amplitudes", "multipliers", "stabilities", "status")


def _sweep_point(job) -> tuple:
    family, params, r_range, tol, seed = job
    try:
        inst = families.get(family, params)
        rep = find_cycles(inst.field, inst.section, r_range or inst.r_range, tol=tol)
        cert = best_certificate(inst.field, inst.candidates, family=family, params=inst.params, seed=seed)
        ok = cert is not None and cert.certified
        status = "center" if rep.center else "ok"
        return (rep.count, cert.bound if ok else None, ok, [c.r for c in rep.cycles],
                [c.amplitude for c in rep.cycles], [c.multiplier for c in rep.cycles],
                [c.stability for c in rep.cycles], status)
    except (IntegrationError, ValueError) as exc:
        return (None, None, False, [], [], [], [], f"error: {exc}")


def cmd_sweep(cfg: RunConfig, args) -> int:
    if not cfg.family:
        raise UsageError("sweep needs --family")
    if cfg.sweep is None:
        raise UsageError("sweep needs --range name=a:b:step")
    name, a, b, h = cfg.sweep
    values = range_values(a, b, h)
    jobs = [(cfg.family, {**cfg.params, name: v}, cfg.r_range, cfg.tol, cfg.seed) for v in values]
    families.get(cfg.family, jobs[0][1])  # fail early on bad parameters
    workers = cfg.workers or os.cpu_count() or 1
    if workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=min(workers, len(jobs))) as ex:
            results = list(ex.map(_sweep_point, jobs))  # map keeps input order
    else:
        results = [_sweep_point(j) for j in jobs]
    rows = [(v, *r) for v, r in zip(values, results)]
    csv = csv_text((name, *SWEEP_HEADER[1:]), rows)
    payload = {"parameter": name, "rows": [dict(zip((name, *SWEEP_HEADER[1:]), r)) for r in rows]}
    _emit(cfg, args, payload, csv.rstrip("\n"), csv)
    return EXIT_OK


def cmd_melnikov(cfg: RunConfig, args) -> int:
    m = int(cfg.params.get("m", 2))
    p = vil_problem(m)
    if "r" in cfg.params:
        rs = [float(cfg.params["r"])]
    elif cfg.sweep is not None:
        rs = [float(v) for v in range_values(*cfg.sweep[1:])]
    else:
        rs = [0.5, 1.0, 1.5, 2.0]
    rows = []
    for r in rs:
        q = melnikov(p, r * r, tol=min(cfg.tol, 1e-10))
        c = melnikov_closed_form(m, r)
        rows.append((r, q, c, abs(q - c)))
    z = roots.find_root(lambda r: melnikov(p, r * r, tol=1e-11), (0.5, 3.0))
    payload = {"m": m, "rows": [dict(zip(("r", "quadrature", "closed_form", "difference"), r)) for r in rows],
               "zero": z, "zero_closed_form": melnikov_zero(m)}
    text = "\n".join(f"r={r:.6g}  quadrature={q:.17g}  closed form={c:.17g}  |diff|={d:.2e}" for r, q, c, d in rows)
    text += f"\nzero at r={z:.15g} (closed form sqrt((m+4)/3) = {melnikov_zero(m):.15g})"
    _emit(cfg, args, payload, text, csv_text(("r", "quadrature", "closed_form", "difference"), rows))
    return EXIT_OK


def cmd_roots(cfg: RunConfig, args) -> int:
    poly = cfg.extra.get("poly") or roots.P6
    width = as_fraction(cfg.extra.get("width") or Fraction(1, 10**10))
    ivs = roots.real_roots(poly, width)
    rows = [(str(lo), str(hi), roots.midpoint((lo, hi)), float(hi - lo)) for lo, hi in ivs]
    payload = {"polynomial": poly, "count": len(ivs),
               "roots": [dict(zip(("lo", "hi", "mid", "width"), r)) for r in rows]}
    text = f"{len(ivs)} real root(s) of {poly}\n" + "\n".join(
        f"  [{r[0]}, {r[1]}]  ~ {r[2]:.15g}" for r in rows)
    _emit(cfg, args, payload, text, csv_text(("lo", "hi", "mid", "width"), rows))
    return EXIT_OK


def cmd_zstar(cfg: RunConfig, args) -> int:
    qt = float(cfg.extra.get("quad_tol") or 1e-8)
    bs = roots.b_star(quad_tol=qt, tol=cfg.tol)
    lo, hi = roots.b_lower(), roots.b_upper()
    payload = {"b_star": bs, "b_lower": lo, "b_upper": hi, "quad_tol": qt}
    text = f"b* = {bs:.15g}\nb_lower = {lo:.15g}\n1 - b_lower = {hi:.15g}"
    if "b" in cfg.params:
        b = cfg.params["b"]
        try:
            payload["Z"] = z = z_integral(b, qt)
            text += f"\nZ({b}) = {z:.17g}"
        except DomainError as exc:
            payload["Z"] = None
            text += f"\nZ({b}) undefined: {exc}"
    _emit(cfg, args, payload, text)
    return EXIT_OK


def cmd_report(cfg: RunConfig, args) -> int:
    from .acceptance import run_all
    res = run_all(echo=None if args.json else print)
    payload = {"checks": [{"number": r.number, "title": r.title, "passed": r.passed, "detail": r.detail}
                          for r in res],
               "passed": sum(r.passed for r in res), "total": len(res)}
    if args.json:
        print(_dump({"config": cfg.to_dict(), **payload}))
    else:
        print(f"{payload['passed']}/{payload['total']} acceptance criteria pass")
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(_dump({"config": cfg.to_dict(), **payload}) + "\n")
    return EXIT_OK if payload["passed"] == payload["total"] else EXIT_ERROR


COMMANDS = {
    "families": (cmd_families, "list families and their parameters"),
    "verify": (cmd_verify, "build a Dulac certificate and bound the number of limit cycles"),
    "cycles": (cmd_cycles, "locate limit cycles on a ray section"),
    "sweep": (cmd_sweep, "cycle counts and bounds over a parameter range"),
    "melnikov": (cmd_melnikov, "Melnikov function of the vil family: quadrature vs closed form"),
    "roots": (cmd_roots, "isolate the real roots of a univariate polynomial"),
    "zstar": (cmd_zstar, "the constants b*, b_lower and 1 - b_lower"),
    "report": (cmd_report, "run the acceptance checks"),
}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="INI file with [common] and per-command sections")
    common.add_argument("--family")
    common.add_argument("--param", action="append", default=None, metavar="K=V")
    common.add_argument("--range", dest="range_", metavar="K=A:B:STEP")
    common.add_argument("--candidate", type=int)
    common.add_argument("--s", help="exponent s of the candidate V")
    common.add_argument("--P", help="first component (raw input)")
    common.add_argument("--Q", help="second component (raw input)")
    common.add_argument("--V", help="Dulac candidate (raw input)")
    common.add_argument("--tol", type=float)
    common.add_argument("--box", metavar="X0:X1[:Y0:Y1]")
    common.add_argument("--rrange", metavar="R0:R1")
    common.add_argument("--section", metavar="CX:CY:ANGLE")
    common.add_argument("--out")
    common.add_argument("--json", action="store_true", default=None)
    common.add_argument("--csv", action="store_true", default=None, help="print CSV instead of text")
    common.add_argument("--seed", type=int)
    common.add_argument("--workers", type=int)
    common.add_argument("--poly", help="polynomial for the roots command")
    common.add_argument("--width", help="isolation width for the roots command")
    common.add_argument("--quad-tol", dest="quad_tol", type=float)

    ap = argparse.ArgumentParser(prog="dulac", description=__doc__.splitlines()[0])
    sub = ap.add_subparsers(dest="command", required=True)
    for name, (_, help_) in COMMANDS.items():
        sub.add_parser(name, parents=[common], help=help_, description=help_)
    return ap


_CONFIG_KEYS = {"family", "param", "range", "candidate", "s", "P", "Q", "V", "tol", "box", "rrange", "section",
                "out", "json", "csv", "seed", "workers", "poly", "width", "quad_tol"}


def _apply_config(args):
    """Fill options missing from the command line with values from ``--config``."""
    if not args.config:
        return
    cp = configparser.ConfigParser(interpolation=None)
    cp.optionxform = str  # keep P/Q/V case
    if not cp.read(args.config):
        raise UsageError(f"cannot read config file {args.config!r}")
    merged = {}
    for sec in ("common", args.command):
        if cp.has_section(sec):
            merged.update(cp.items(sec))
    unknown = set(merged) - _CONFIG_KEYS
    if unknown:
        raise UsageError(f"unknown config key(s): {sorted(unknown)}")
    for k, v in merged.items():
        attr = "range_" if k == "range" else k
        if getattr(args, attr) is not None:
            continue
        if k == "param":
            v = [p for p in v.replace(",", " ").split() if p]
        elif k in ("json", "csv"):
            v = cp.getboolean(args.command if cp.has_option(args.command, k) else "common", k)
        elif k in ("candidate", "seed", "workers"):
            v = int(v)
        elif k in ("tol", "quad_tol"):
            v = float(v)
        setattr(args, attr, v)


def config_from_args(args) -> RunConfig:
    params = {}
    for item in args.param or []:
        k, v = _kv(item)
        params[k] = as_fraction(v)
    default_box = None
    if args.family and args.family in families.FAMILIES:
        default_box = families.FAMILIES[args.family].box
    rr = _floats(args.rrange, (2,), "--rrange") if args.rrange else None
    if rr is not None and not 0 < rr[0] < rr[1]:
        raise UsageError("--rrange must satisfy 0 < r0 < r1")
    return RunConfig(
        command=args.command, family=args.family, params=params, P=args.P, Q=args.Q, V=args.V, s=args.s,
        candidate=args.candidate, sweep=parse_range(args.range_) if args.range_ else None,
        tol=args.tol if args.tol is not None else 1e-10, box=_box(args.box, default_box), r_range=rr,
        section=_floats(args.section, (3,), "--section") if args.section else None,
        seed=args.seed or 0, workers=args.workers or 0,
        extra={k: getattr(args, k) for k in ("poly", "width", "quad_tol") if getattr(args, k) is not None},
    )


_VALUE_FLAGS = {"--family", "--param", "--range", "--s", "--P", "--Q", "--V", "--box", "--rrange", "--section",
                "--poly", "--width", "--tol", "--quad-tol"}


def _glue_negative_values(argv: list[str]) -> list[str]:
    # argparse reads "-1:2" or "-x" as an option; "--box=-1:2" is unambiguous
    out, i = [], 0
    while i < len(argv):
        a = argv[i]
        if a in _VALUE_FLAGS and i + 1 < len(argv) and argv[i + 1].startswith("-") and argv[i + 1] != "--":
            out.append(f"{a}={argv[i + 1]}")
            i += 2
        else:
            out.append(a)
            i += 1
    return out


def main(argv=None) -> int:
    ap = build_parser()
    argv = sys.argv[1:] if argv is None else list(argv)
    args = ap.parse_args(_glue_negative_values(argv))
    try:
        _apply_config(args)
        cfg = config_from_args(args)
        if cfg.tol <= 0:
            raise UsageError("--tol must be positive")
        return COMMANDS[args.command][0](cfg, args)
    except (UsageError, ValueError, KeyError, IntegrationError, OSError) as exc:
        msg = exc.args[0] if isinstance(exc, KeyError) and exc.args else exc
        print(f"error: {msg}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
