"""Running flag cases against their stored expected values."""

from __future__ import annotations

import time
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path

from ..azpipe import SReport, delta_bound, verify_context
from ..errors import AzflagError
from ..exactnum import format_rational
from ..lattices import VerificationReport
from .schema import FlagCase, load_flag


@dataclass
class Comparison:
    field: str
    expected: Fraction | str
    computed: Fraction | str | None

    @property
    def ok(self) -> bool:
        return self.computed is not None and self.expected == self.computed

    def describe(self) -> str:
        def show(x):
            if x is None:
                return "missing"
            return format_rational(x) if isinstance(x, Fraction) else x
        return f"{self.field}: expected {show(self.expected)}, computed {show(self.computed)}"


@dataclass
class CaseReport:
    name: str
    mode: str
    region: str | None = None
    report: SReport | None = None
    verification: VerificationReport | None = None
    comparisons: list[Comparison] = field(default_factory=list)
    error: str | None = None
    elapsed_ms: float = 0.0

    @property
    def passed(self) -> bool:
        if self.error is not None or self.report is None:
            return False
        if self.verification is not None and not self.verification.ok:
            return False
        return all(c.ok for c in self.comparisons)

    def failures(self) -> list[str]:
        out = []
        if self.error is not None:
            out.append(self.error)
        if self.verification is not None:
            out.extend(c.describe() for c in self.verification.failures())
        out.extend(c.describe() for c in self.comparisons if not c.ok)
        return out


def compare_expected(case: FlagCase, rep: SReport) -> list[Comparison]:
    e = case.expected
    out = []
    if e.S_X_Y is not None:
        out.append(Comparison("S_X_Y", e.S_X_Y, rep.S_X_Y))
    if e.S_V_Z is not None:
        out.append(Comparison("S_V_Z", e.S_V_Z, rep.S_V_Z))
    computed = {p.name: p for p in rep.points}
    for pname, vals in e.points.items():
        pv = computed.get(pname)
        for key, want in vals.items():
            got = None
            if pv is not None:
                got = pv.quotient if key == "quotient" else getattr(pv, key)
            out.append(Comparison(f"{key}[{pname}]", want, got))
    if e.delta_bound is not None:
        out.append(Comparison("delta_bound", e.delta_bound, rep.delta_bound))
    if e.witness is not None:
        out.append(Comparison("witness", e.witness, rep.witness))
    return out


def run_case(case: FlagCase) -> CaseReport:
    """Verify the input data, run the pipeline and compare with the expected block.

    Never raises for mathematical errors: they end up in ``CaseReport.error``.
    """
    t0 = time.perf_counter()
    out = CaseReport(case.name, case.mode, case.region)
    try:
        out.verification = verify_context(case.context)
        if out.verification.ok:
            out.report = delta_bound(case.context, case.points)
            out.comparisons = compare_expected(case, out.report)
    except (AzflagError, ValueError, ArithmeticError) as exc:
        out.error = f"{type(exc).__name__}: {exc}"
    out.elapsed_ms = (time.perf_counter() - t0) * 1000
    return out


def run_path(path) -> CaseReport:
    """Load and run one file; load errors become a failing report."""
    try:
        case = load_flag(path)
    except AzflagError as exc:
        return CaseReport(Path(path).stem, "?", error=f"{type(exc).__name__}: {exc}")
    return run_case(case)


@dataclass
class RegionBound:
    region: str
    bound: Fraction
    cases: list[str]


def regional_summary(reports: list[CaseReport]) -> tuple[Fraction | None, list[RegionBound]]:
    """Best bound per region over passing point-mode cases, and the minimum over regions.

    Several flags may cover the same region; any one of them bounds delta
    there, so the region gets the largest of their bounds.
    """
    regions: dict[str, RegionBound] = {}
    for r in reports:
        if r.mode != "point" or r.region is None or not r.passed:
            continue
        b = r.report.delta_bound
        cur = regions.get(r.region)
        if cur is None:
            regions[r.region] = RegionBound(r.region, b, [r.name])
        else:
            cur.cases.append(r.name)
            cur.bound = max(cur.bound, b)
    rows = sorted(regions.values(), key=lambda x: x.region)
    return (min(x.bound for x in rows) if rows else None), rows
