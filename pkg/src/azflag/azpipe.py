"""Stability-threshold invariants of a flag ``p ∈ Z ⊂ Y ⊂ X``.

Given a verified decomposition of ``-K_X - uY`` and the intersection data of
the flag surface, computes ``S_X(Y)``, ``S(V;Z)``, and for each marked point
``F_p`` and ``S(W;p)``, then the local lower bound for delta.  The same
formulas serve both flag kinds: a curve on ``Y`` itself (log discrepancy 1),
or the exceptional curve of a plt blow-up of ``Y`` (restriction map and order
data given on the blown-up surface).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from fractions import Fraction
from typing import Mapping, Sequence

from .errors import VerificationFailed
from .exactnum import ParamPoly, format_rational, integrate_between
from .lattices import ClassVector, RestrictionMap, SurfaceLattice, ThreefoldData, pair, restrict, triple, verify_restriction
from .zariski import (
    ChamberedDecomposition,
    ParamDivisor,
    ThreefoldDecomposition,
    chamber_complex,
    verify_threefold_decomposition,
)

ON_SURFACE = "on_surface"
PULLBACK = "pullback"


@dataclass(frozen=True)
class MarkedPoint:
    """A point on the flag curve with its local data.

    ``local_mults[C]`` is the local intersection multiplicity of the
    negative-part curve ``C`` with the flag curve at this point.
    """

    name: str
    different_ord: Fraction = Fraction(0)
    local_mults: Mapping[str, Fraction] = field(default_factory=dict)

    def __post_init__(self):
        object.__setattr__(self, "different_ord", Fraction(self.different_ord))
        object.__setattr__(self, "local_mults", {k: Fraction(v) for k, v in self.local_mults.items()})
        if not 0 <= self.different_ord < 1:
            raise ValueError(f"point {self.name!r}: different order must lie in [0, 1)")
        if any(m < 0 for m in self.local_mults.values()):
            raise ValueError(f"point {self.name!r}: negative local multiplicity")


@dataclass(frozen=True)
class FlagContext:
    threefold: ThreefoldData
    Y: ClassVector
    dec3: ThreefoldDecomposition
    surface: SurfaceLattice | None = None
    restriction: RestrictionMap | None = None
    Z: str | None = None
    log_discrepancy: Fraction = Fraction(1)
    mode: str = ON_SURFACE

    def __post_init__(self):
        object.__setattr__(self, "log_discrepancy", Fraction(self.log_discrepancy))
        if self.mode not in (ON_SURFACE, PULLBACK):
            raise ValueError(f"unknown flag mode {self.mode!r}")
        if self.log_discrepancy < 1:
            raise ValueError("log discrepancy must be at least 1")
        if self.mode == ON_SURFACE and self.log_discrepancy != 1:
            raise ValueError("a curve on the flag surface itself has log discrepancy 1")
        if self.Z is not None:
            if self.surface is None or self.restriction is None:
                raise ValueError("a flag curve needs a surface lattice and a restriction map")
            self.surface.curve(self.Z)
            if self.Z in self.surface.negative_candidates:
                raise ValueError(f"flag curve {self.Z!r} may not be a negative-part candidate")

    @property
    def has_curve(self) -> bool:
        return self.Z is not None

    def Zclass(self) -> ClassVector:
        return self.surface.curve(self.Z)

    @cached_property
    def chambers(self) -> list[ChamberedDecomposition]:
        amp = self.polarization()
        return [chamber_complex(self.surface, flag_family(self, i), amp) for i in range(len(self.dec3.chambers))]

    def polarization(self) -> ClassVector:
        """Image of ``-K_X`` on the flag surface: nef and big, used to orient psef tests."""
        return restrict(self.threefold.anticanonical, self.restriction)


def s_divisor(ctx: FlagContext) -> Fraction:
    """``S_X(Y) = (1/(-K_X)^3) ∫_0^tau P(u)^3 du``."""
    T, dec = ctx.threefold, ctx.dec3
    total = Fraction(0)
    for i, ch in enumerate(dec.chambers):
        total += dec.volume(T, i).integrate_u(ch.u_lo, ch.u_hi)
    return total / T.degree()


def flag_family(ctx: FlagContext, i: int) -> ParamDivisor:
    """``P(u)|_Y - vZ`` (or its pullback) on the i-th threefold chamber."""
    ch = ctx.dec3.chambers[i]
    base = restrict(ch.P.as_polys(), ctx.restriction).as_polys()
    base = base - ctx.Zclass().as_polys() * ParamPoly.v()
    return ParamDivisor(base, ch.u_lo, ch.u_hi)


def flag_chambers(ctx: FlagContext) -> list[ChamberedDecomposition]:
    """Surface chamber complexes, one per threefold chamber (computed once per context)."""
    return ctx.chambers


def _order_along_curve(ctx: FlagContext, i: int) -> ParamPoly:
    """``d(u) = ord_Z(N(u)|_Y)`` on the i-th threefold chamber."""
    d = ParamPoly()
    for comp in ctx.dec3.chambers[i].N:
        d = d + comp.coeff * comp.ord_along_flag_curve
    return d


def _order_at_point(ctx: FlagContext, i: int, p: MarkedPoint) -> ParamPoly:
    d = ParamPoly()
    for comp in ctx.dec3.chambers[i].N:
        d = d + comp.coeff * comp.ord_at_points.get(p.name, Fraction(0))
    return d


def s_curve(ctx: FlagContext) -> Fraction:
    """``S(V;Z)``: the order-of-N term plus the double volume integral, over (-K_X)^3 / 3."""
    T = ctx.threefold
    chambers = flag_chambers(ctx)
    total = Fraction(0)
    for i, ch in enumerate(ctx.dec3.chambers):
        P = ch.P.as_polys()
        d = _order_along_curve(ctx, i)
        if not d.is_zero():
            total += (ParamPoly.lift(triple(P, P, ctx.Y, T)) * d).integrate_u(ch.u_lo, ch.u_hi)
        for cell in chambers[i].cells:
            if not cell.degenerate:
                total += integrate_between(cell.vol, cell.u_lo, cell.u_hi, cell.lower, cell.upper)
    return 3 * total / T.degree()


def _point_integrand(ctx: FlagContext, i: int, cell, p: MarkedPoint) -> ParamPoly:
    order = _order_at_point(ctx, i, p)
    for C, c in cell.N_coeffs.items():
        mu = p.local_mults.get(C, Fraction(0))
        if mu:
            order = order + c * mu
    return order


def _pz(ctx: FlagContext, cell) -> ParamPoly:
    return ParamPoly.lift(pair(cell.P, ctx.Zclass().as_polys(), ctx.surface))


def f_term(ctx: FlagContext, p: MarkedPoint) -> Fraction:
    """``F_p``: (6/(-K_X)^3) ∫∫ (P(u,v)·Z) · ord_p(N'|_Z + N(u,v)|_Z) dv du."""
    chambers = flag_chambers(ctx)
    unknown = set(p.local_mults) - set(ctx.surface.negative_candidates)
    if unknown:
        raise ValueError(f"point {p.name!r}: local multiplicities for non-candidate curves {sorted(unknown)}")
    total = Fraction(0)
    for i in range(len(ctx.dec3.chambers)):
        for cell in chambers[i].cells:
            if cell.degenerate:
                continue
            order = _point_integrand(ctx, i, cell, p)
            if order.is_zero():
                continue
            total += integrate_between(_pz(ctx, cell) * order, cell.u_lo, cell.u_hi, cell.lower, cell.upper)
    return 6 * total / ctx.threefold.degree()


def w_integral(ctx: FlagContext) -> Fraction:
    """(3/(-K_X)^3) ∫∫ (P(u,v)·Z)^2 dv du, the point-independent part of ``S(W;p)``."""
    chambers = flag_chambers(ctx)
    total = Fraction(0)
    for i in range(len(ctx.dec3.chambers)):
        for cell in chambers[i].cells:
            if not cell.degenerate:
                pz = _pz(ctx, cell)
                total += integrate_between(pz * pz, cell.u_lo, cell.u_hi, cell.lower, cell.upper)
    return 3 * total / ctx.threefold.degree()


def s_point(ctx: FlagContext, p: MarkedPoint) -> Fraction:
    return w_integral(ctx) + f_term(ctx, p)


@dataclass
class PointValues:
    name: str
    F_p: Fraction
    S_W_p: Fraction
    different_ord: Fraction

    @property
    def quotient(self) -> Fraction:
        return (1 - self.different_ord) / self.S_W_p


@dataclass
class SReport:
    S_X_Y: Fraction
    S_V_Z: Fraction | None
    points: list[PointValues]
    delta_bound: Fraction
    witness: str
    log_discrepancy: Fraction = Fraction(1)
    terms: list[tuple[str, Fraction]] = field(default_factory=list)

    def to_json(self) -> dict:
        return {
            "S_X_Y": format_rational(self.S_X_Y),
            "S_V_Z": None if self.S_V_Z is None else format_rational(self.S_V_Z),
            "log_discrepancy": format_rational(self.log_discrepancy),
            "points": [
                {"name": p.name, "F_p": format_rational(p.F_p), "S_W_p": format_rational(p.S_W_p),
                 "quotient": format_rational(p.quotient)}
                for p in self.points
            ],
            "terms": [{"witness": w, "value": format_rational(x)} for w, x in self.terms],
            "delta_bound": format_rational(self.delta_bound),
            "witness": self.witness,
        }


def delta_bound(ctx: FlagContext, points: Sequence[MarkedPoint] = ()) -> SReport:
    """Lower bound for delta at the flag: the minimum of the point, curve and divisor terms.

    Ties go to the first term in that order.  Without marked points only the
    curve and divisor terms enter; without a flag curve only the divisor term.
    """
    sx = s_divisor(ctx)
    terms: list[tuple[str, Fraction]] = []
    pts: list[PointValues] = []
    sv = None
    if ctx.has_curve:
        sv = s_curve(ctx)
        w = w_integral(ctx) if points else Fraction(0)
        for p in points:
            f = f_term(ctx, p)
            pv = PointValues(p.name, f, w + f, p.different_ord)
            pts.append(pv)
            terms.append((f"point:{p.name}", pv.quotient))
        terms.append(("curve", ctx.log_discrepancy / sv))
    terms.append(("divisor", 1 / sx))
    best = min(x for _, x in terms)
    witness = next(w for w, x in terms if x == best)
    return SReport(sx, sv, pts, best, witness, ctx.log_discrepancy, terms)


def verify_context(ctx: FlagContext):
    """Run the restriction and decomposition checks; returns the combined report."""
    report = verify_threefold_decomposition(ctx.threefold, ctx.Y, ctx.dec3)
    if ctx.has_curve:
        report.extend(verify_restriction(ctx.restriction, ctx.threefold, ctx.Y, ctx.surface))
        for ch in ctx.dec3.chambers:
            for comp in ch.N:
                if comp.restriction is not None:
                    img = restrict(comp.divisor, ctx.restriction)
                    report.add(f"restriction of {comp.name} matches stated class", img == comp.restriction,
                               f"{img.format(ctx.surface.basis)} vs {comp.restriction.format(ctx.surface.basis)}")
    return report


def compute(ctx: FlagContext, points: Sequence[MarkedPoint] = (), verify: bool = True) -> SReport:
    if verify:
        report = verify_context(ctx)
        if not report.ok:
            raise VerificationFailed(report)
    return delta_bound(ctx, points)
