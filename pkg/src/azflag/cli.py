"""Command-line driver: ``azflag verify|compute|corpus|oracle``.

Exit codes: 0 success, 1 a check failed, 2 usage or input error.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

from . import corpus
from .azpipe import delta_bound, verify_context
from .errors import AzflagError, ParseError, ValidationError, VerificationFailed
from .exactnum import format_rational
from .lattices import VerificationReport

REPORT_SCHEMA = "azflag-report/1"
ORACLE_TOL = 1e-4

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2


class _Usage(Exception):
    pass


def _emit(text: str) -> None:
    sys.stdout.write(text if text.endswith("\n") else text + "\n")


def _json(obj) -> str:
    return json.dumps(obj, indent=2, ensure_ascii=False)


def _load(args):
    path = corpus.resolve_case(args.path, args.corpus_dir)
    if not path.exists():
        raise _Usage(f"no such file: {args.path}")
    return corpus.load_flag(path)


def _checks_json(rep: VerificationReport) -> list[dict]:
    return [{"name": c.name, "ok": c.ok, "detail": c.detail} for c in rep.checks]


# ---------------------------------------------------------------------------
# verify


def cmd_verify(args) -> int:
    case = _load(args)
    rep = verify_context(case.context)
    if args.format == "json":
        _emit(_json({"schema": REPORT_SCHEMA, "command": "verify", "case": case.name,
                     "ok": rep.ok, "checks": _checks_json(rep), "notes": list(rep.notes)}))
    else:
        lines = [f"case {case.name}"] + rep.lines()
        lines.append("verification passed" if rep.ok else "verification FAILED")
        _emit("\n".join(lines))
    return EXIT_OK if rep.ok else EXIT_FAIL


# ---------------------------------------------------------------------------
# compute


def _trace_lines(case) -> list[str]:
    ctx = case.context
    if not ctx.has_curve:
        return ["(no flag curve: nothing to trace)"]
    basis = ctx.surface.basis
    out = []
    for ch, cd in zip(ctx.dec3.chambers, ctx.chambers):
        out.append(f"threefold chamber u ∈ [{format_rational(ch.u_lo)}, {format_rational(ch.u_hi)}]")
        for k, cell in enumerate(cd.cells, 1):
            tag = " (degenerate)" if cell.degenerate else ""
            out.append(f"  cell {k}{tag}: u ∈ [{format_rational(cell.u_lo)}, {format_rational(cell.u_hi)}], "
                       f"v ∈ [{cell.lower}, {cell.upper}]")
            out.append(f"    P = {cell.P.format(basis)}")
            if cell.N_coeffs:
                out.append("    N = " + " + ".join(f"({c})*{name}" for name, c in cell.N_coeffs.items()))
            else:
                out.append("    N = 0")
            out.append(f"    vol = {cell.vol}")
        for piece in cd.threshold:
            out.append(f"  t(u) = {piece.t} on [{format_rational(piece.u_lo)}, {format_rational(piece.u_hi)}]")
    return out


def _trace_json(case) -> list[dict]:
    ctx = case.context
    if not ctx.has_curve:
        return []
    basis = ctx.surface.basis
    out = []
    for ch, cd in zip(ctx.dec3.chambers, ctx.chambers):
        out.append({
            "u": [format_rational(ch.u_lo), format_rational(ch.u_hi)],
            "cells": [{
                "u": [format_rational(c.u_lo), format_rational(c.u_hi)],
                "v": [str(c.lower), str(c.upper)],
                "degenerate": c.degenerate,
                "active": list(c.active),
                "P": c.P.format(basis),
                "N": {name: str(x) for name, x in c.N_coeffs.items()},
                "vol": str(c.vol),
            } for c in cd.cells],
            "threshold": [{"u": [format_rational(p.u_lo), format_rational(p.u_hi)], "t": str(p.t)}
                          for p in cd.threshold],
        })
    return out


def cmd_compute(args) -> int:
    case = _load(args)
    rep = verify_context(case.context)
    if not rep.ok:
        raise VerificationFailed(rep)
    res = delta_bound(case.context, case.points)
    if args.format == "json":
        obj = {"schema": REPORT_SCHEMA, "command": "compute", "case": case.name, "result": res.to_json()}
        if args.trace:
            obj["trace"] = _trace_json(case)
        _emit(_json(obj))
        return EXIT_OK
    lines = [f"case {case.name}", f"S_X(Y) = {format_rational(res.S_X_Y)}"]
    if res.S_V_Z is not None:
        lines.append(f"S(V;Z) = {format_rational(res.S_V_Z)}")
        if res.log_discrepancy != 1:
            lines.append(f"A(Z) = {format_rational(res.log_discrepancy)}")
    for p in res.points:
        lines.append(f"point {p.name}: F_p = {format_rational(p.F_p)}, S(W;p) = {format_rational(p.S_W_p)}, "
                     f"quotient = {format_rational(p.quotient)}")
    for w, x in res.terms:
        lines.append(f"term {w} = {format_rational(x)}")
    lines.append(f"delta_bound = {format_rational(res.delta_bound)}")
    lines.append(f"witness = {res.witness}")
    if args.trace:
        lines.extend(_trace_lines(case))
    _emit("\n".join(lines))
    return EXIT_OK


# ---------------------------------------------------------------------------
# corpus


def _run_all(paths: list[Path], jobs: int) -> list[corpus.CaseReport]:
    if jobs <= 1 or len(paths) <= 1:
        reports = [corpus.run_path(p) for p in paths]
    else:
        with ProcessPoolExecutor(max_workers=min(jobs, len(paths))) as ex:
            reports = list(ex.map(corpus.run_path, [str(p) for p in paths]))
    return sorted(reports, key=lambda r: r.name)


def _expected_bound(r: corpus.CaseReport) -> str:
    for c in r.comparisons:
        if c.field == "delta_bound":
            return format_rational(c.expected)
    return "-"


def cmd_corpus(args) -> int:
    d = Path(args.dir or args.corpus_dir or corpus.corpus_dir())
    if not d.is_dir():
        raise _Usage(f"not a directory: {d}")
    paths = corpus.case_files(d)
    if not paths:
        raise _Usage(f"no cases in {d}")
    reports = _run_all(paths, args.jobs or os.cpu_count() or 1)
    summary, regions = corpus.regional_summary(reports)
    ok = all(r.passed for r in reports)

    if args.format == "json":
        cases = []
        for r in reports:
            entry = {"name": r.name, "mode": r.mode, "region": r.region, "passed": r.passed,
                     "expected_delta_bound": _expected_bound(r),
                     "delta_bound": format_rational(r.report.delta_bound) if r.report else None,
                     "failures": r.failures(),
                     "result": r.report.to_json() if r.report else None}
            if args.timing:
                entry["ms"] = round(r.elapsed_ms, 1)
            cases.append(entry)
        _emit(_json({"schema": REPORT_SCHEMA, "command": "corpus", "ok": ok, "cases": cases,
                     "regions": [{"region": x.region, "bound": format_rational(x.bound), "cases": x.cases}
                                 for x in regions],
                     "summary": format_rational(summary) if summary is not None else None}))
        return EXIT_OK if ok else EXIT_FAIL

    header = ["", "case", "expected", "computed", "result"] + (["ms"] if args.timing else [])
    rows = []
    for r in reports:
        row = ["!!" if not r.passed else "", r.name, _expected_bound(r),
               format_rational(r.report.delta_bound) if r.report else "error",
               "PASS" if r.passed else "FAIL"]
        if args.timing:
            row.append(f"{r.elapsed_ms:.1f}")
        rows.append(row)
    widths = [max(len(x[i]) for x in [header] + rows) for i in range(len(header))]
    lines = ["  ".join(x.ljust(w) for x, w in zip(row, widths)).rstrip() for row in [header] + rows]
    for r in reports:
        for msg in r.failures():
            lines.append(f"!! {r.name}: {msg}")
    lines.append("")
    lines.append("regional bounds (point flags):")
    for x in regions:
        lines.append(f"  {x.region}: {format_rational(x.bound)}  [{', '.join(x.cases)}]")
    if summary is not None:
        lines.append(f"summary: min over regions = {format_rational(summary)}")
    lines.append(f"{sum(r.passed for r in reports)}/{len(reports)} cases passed")
    _emit("\n".join(lines))
    return EXIT_OK if ok else EXIT_FAIL


# ---------------------------------------------------------------------------
# oracle


def cmd_oracle(args) -> int:
    case = _load(args)
    rep = verify_context(case.context)
    if not rep.ok:
        raise VerificationFailed(rep)
    exact = delta_bound(case.context, case.points)
    approx = corpus.numeric_oracle(case, args.grid)
    rows = corpus.compare_oracle(exact, approx)
    ok = corpus.oracle_ok(rows, ORACLE_TOL)
    if args.format == "json":
        _emit(_json({"schema": REPORT_SCHEMA, "command": "oracle", "case": case.name, "grid": args.grid,
                     "tolerance": ORACLE_TOL, "ok": ok,
                     "rows": [{"quantity": r.quantity, "exact": format_rational(r.exact), "approx": r.approx,
                               "abs_error": r.abs_error, "rel_error": r.rel_error, "gating": r.gating}
                              for r in rows]}))
        return EXIT_OK if ok else EXIT_FAIL
    header = ["quantity", "exact", "oracle", "abs error", "rel error"]
    table = [[r.quantity + ("" if r.gating else " *"), format_rational(r.exact), f"{r.approx:.9f}",
              f"{r.abs_error:.3e}", f"{r.rel_error:.3e}"] for r in rows]
    widths = [max(len(x[i]) for x in [header] + table) for i in range(len(header))]
    lines = [f"case {case.name}, grid {args.grid}"]
    lines += ["  ".join(x.ljust(w) for x, w in zip(row, widths)).rstrip() for row in [header] + table]
    if any(not r.gating for r in rows):
        lines.append("* informational, not checked against the tolerance")
    lines.append(f"{'PASS' if ok else 'FAIL'}: relative tolerance {ORACLE_TOL:g}")
    _emit("\n".join(lines))
    return EXIT_OK if ok else EXIT_FAIL


# ---------------------------------------------------------------------------


def _grid(text: str) -> int:
    try:
        n = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an integer: {text!r}") from None
    if n < 2:
        raise argparse.ArgumentTypeError("grid must be at least 2")
    return n


def _jobs(text: str) -> int:
    try:
        n = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an integer: {text!r}") from None
    if n < 1:
        raise argparse.ArgumentTypeError("jobs must be at least 1")
    return n


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--format", choices=("text", "json"), default="text")
    common.add_argument("--corpus-dir", default=None, help="corpus location (default: $AZFLAG_CORPUS_DIR or bundled)")

    p = argparse.ArgumentParser(prog="azflag", description="Exact stability-threshold invariants for threefold flags.")
    sub = p.add_subparsers(dest="command", required=True)

    v = sub.add_parser("verify", parents=[common], help="check restriction map and threefold decomposition")
    v.add_argument("path", help="flag file, or a case name from the corpus")
    v.set_defaults(func=cmd_verify)

    c = sub.add_parser("compute", parents=[common], help="compute S values and the delta bound")
    c.add_argument("path")
    c.add_argument("--trace", action="store_true", help="also print every chamber complex")
    c.set_defaults(func=cmd_compute)

    k = sub.add_parser("corpus", parents=[common], help="run every case in a directory")
    k.add_argument("dir", nargs="?", default=None)
    k.add_argument("--jobs", type=_jobs, default=None, help="worker processes (default: CPU count)")
    k.add_argument("--timing", action="store_true", help="add a per-case ms column")
    k.set_defaults(func=cmd_corpus)

    o = sub.add_parser("oracle", parents=[common], help="floating-point cross-check of the exact values")
    o.add_argument("path")
    o.add_argument("--grid", type=_grid, default=400)
    o.set_defaults(func=cmd_oracle)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code) if isinstance(exc.code, int) else EXIT_USAGE
    try:
        return args.func(args)
    except VerificationFailed as exc:
        print(f"verification failed: {exc}", file=sys.stderr)
        return EXIT_FAIL
    except (_Usage, ParseError, ValidationError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except AzflagError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
