"""Zariski decompositions on surface lattices, pointwise and over (u, v) chambers.

The threefold-level decompositions are input data; this module only checks
their numerical axioms (:func:`verify_threefold_decomposition`).
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Mapping, NamedTuple, Sequence

from .errors import ChamberError, IndefiniteSupport, IrrationalWall, NotPseudoeffective, VolumeNotVanishing
from .exactnum import ParamPoly, Polygon, format_rational, is_negative_definite, rat_solve_symmetric, solve_poly_rhs
from .lattices import ClassVector, SurfaceLattice, ThreefoldData, VerificationReport, pair, triple

log = logging.getLogger(__name__)

MAX_SWEEP_DEPTH = 64


class Decomposition(NamedTuple):
    P: ClassVector
    N: dict[str, Fraction]


def _negative_part(L: SurfaceLattice, N: Mapping[str, object]) -> ClassVector:
    out = ClassVector.zero(L.rank)
    for name, c in N.items():
        out = out + L.curve(name) * c
    return out


def zariski_decompose_at(L: SurfaceLattice, D: ClassVector, ample: ClassVector | None = None) -> Decomposition:
    """Zariski decomposition of a fixed rational class by the active-set iteration.

    Start from the candidates ``C`` with ``D·C < 0``, solve for the negative
    part supported there, then add every candidate the positive part is still
    negative on, until nothing changes.

    ``ample`` (a nef and big class) makes the pseudoeffectivity test exact
    when the lattice has no candidates to catch an anti-effective class.
    """
    if D.is_parametric():
        raise TypeError("zariski_decompose_at needs a class with rational coefficients")
    cands = list(L.negative_candidates)
    active = [C for C in cands if pair(D, L.curve(C), L) < 0]
    while True:
        x: list[Fraction] = []
        if active:
            G = L.gram(active)
            if not is_negative_definite(G):
                raise IndefiniteSupport(f"Gram matrix of {active} is not negative definite")
            x = rat_solve_symmetric(G, [pair(D, L.curve(C), L) for C in active])
            bad = [(C, c) for C, c in zip(active, x) if c < 0]
            if bad:
                raise NotPseudoeffective(f"negative part forced to have negative coefficient on {bad[0][0]}")
        N = dict(zip(active, x))
        P = D - _negative_part(L, N)
        new = [C for C in cands if C not in N and pair(P, L.curve(C), L) < 0]
        if not new:
            break
        active = [C for C in cands if C in N or C in new]
    if pair(P, P, L) < 0:
        raise NotPseudoeffective(f"positive part has negative self-intersection {pair(P, P, L)}")
    if ample is not None and pair(P, ample, L) < 0:
        raise NotPseudoeffective("positive part pairs negatively with the polarization")
    return Decomposition(P, N)


# ---------------------------------------------------------------------------
# parametric families


@dataclass(frozen=True)
class ParamDivisor:
    """A family ``D(u, v)`` with affine coefficients, over ``u_lo <= u <= u_hi`` and ``v >= 0``."""

    base: ClassVector
    u_lo: Fraction
    u_hi: Fraction

    def __post_init__(self):
        object.__setattr__(self, "base", self.base.as_polys())
        object.__setattr__(self, "u_lo", Fraction(self.u_lo))
        object.__setattr__(self, "u_hi", Fraction(self.u_hi))
        if any(c.total_degree() > 1 for c in self.base.coeffs):
            raise ValueError("ParamDivisor coefficients must be affine in (u, v)")
        if self.u_lo > self.u_hi:
            raise ValueError("empty u-interval")


@dataclass(frozen=True)
class ZariskiCell:
    """One chamber: ``u_lo <= u <= u_hi``, ``lower(u) <= v <= upper(u)``."""

    u_lo: Fraction
    u_hi: Fraction
    lower: ParamPoly
    upper: ParamPoly
    active: tuple[str, ...]
    N_coeffs: Mapping[str, ParamPoly]
    P: ClassVector
    vol: ParamPoly
    region: Polygon
    upper_kind: tuple[str, ...] = ()

    @property
    def degenerate(self) -> bool:
        return self.region.degenerate

    def sample_points(self, k: int = 3) -> list[tuple[Fraction, Fraction]]:
        """Rational points strictly inside the cell."""
        pts = []
        for i in range(1, k + 1):
            u0 = self.u_lo + (self.u_hi - self.u_lo) * Fraction(i, k + 1)
            lo, hi = self.lower(u0), self.upper(u0)
            for j in range(1, k + 1):
                pts.append((u0, lo + (hi - lo) * Fraction(j, k + 1)))
        return pts


@dataclass(frozen=True)
class ThresholdPiece:
    u_lo: Fraction
    u_hi: Fraction
    t: ParamPoly


@dataclass
class ChamberedDecomposition:
    lattice: SurfaceLattice
    divisor: ParamDivisor
    cells: list[ZariskiCell]
    threshold: list[ThresholdPiece]

    def t_at(self, u0) -> Fraction:
        u0 = Fraction(u0)
        for piece in self.threshold:
            if piece.u_lo <= u0 <= piece.u_hi:
                return piece.t(u0)
        raise ValueError(f"u={u0} outside the decomposition")

    def cell_at(self, u0, v0) -> ZariskiCell | None:
        for c in self.cells:
            if not c.degenerate and c.region.contains((u0, v0)):
                return c
        return None


def _split_affine_v(g: ParamPoly) -> tuple[ParamPoly, Fraction]:
    """Write an affine ``g(u, v)`` as ``g0(u) + gamma*v``."""
    if g.total_degree() > 1:
        raise IrrationalWall(f"wall {g} is not affine")
    g0 = ParamPoly({(a, 0): c for (a, b), c in g.terms.items() if b == 0})
    return g0, g.coeff(0, 1)


def _rational_sqrt(x: Fraction) -> Fraction | None:
    if x < 0:
        return None
    n, d = x.numerator, x.denominator
    rn, rd = math.isqrt(n), math.isqrt(d)
    if rn * rn == n and rd * rd == d:
        return Fraction(rn, rd)
    return None


def _affine_sqrt(delta: ParamPoly) -> ParamPoly | None:
    """An affine ``s(u)`` with ``s**2 == delta``, if one exists with rational data."""
    d2, d1, d0 = delta.coeff(2), delta.coeff(1), delta.coeff(0)
    if delta.degree_u() > 2:
        return None
    if d2 == 0:
        if d1 != 0:
            return None
        s0 = _rational_sqrt(d0)
        return None if s0 is None else ParamPoly.const(s0)
    s1 = _rational_sqrt(d2)
    if s1 is None:
        return None
    s0 = d1 / (2 * s1)
    if s0 * s0 != d0:
        return None
    return ParamPoly.from_u_coeffs([s0, s1])


def _vol_roots(vol: ParamPoly) -> tuple[list[ParamPoly], bool]:
    """Roots in v of ``vol(u, v)`` as affine functions of u.

    Returns ``(roots, exact)``; ``exact`` is False when some root has no
    affine rational description (the caller decides whether it matters).
    """
    if vol.degree_v() > 2:
        raise IrrationalWall(f"volume {vol} has degree > 2 in v")
    A = vol.coeff(0, 2)
    if any(vol.coeff(a, 2) for a in range(1, vol.degree_u() + 1)):
        raise IrrationalWall(f"volume {vol} has a non-constant v^2 coefficient")
    B = ParamPoly({(a, 0): c for (a, b), c in vol.terms.items() if b == 1})
    C = ParamPoly({(a, 0): c for (a, b), c in vol.terms.items() if b == 0})
    if A == 0:
        if B.is_zero():
            return [], True
        q, r = _divmod_u(-C, B)
        if r.is_zero() and q.degree_u() <= 1:
            return [q], True
        return [], False
    delta = B * B - 4 * A * C
    if delta.is_zero():
        return [-B / (2 * A)], True
    s = _affine_sqrt(delta)
    if s is None:
        return [], False
    return [(-B + s) / (2 * A), (-B - s) / (2 * A)], True


def _divmod_u(num: ParamPoly, den: ParamPoly) -> tuple[ParamPoly, ParamPoly]:
    n, d = num.u_coeffs(), den.u_coeffs()
    q = [Fraction(0)] * max(len(n) - len(d) + 1, 1)
    n = list(n)
    while len(n) >= len(d) and any(n):
        shift = len(n) - len(d)
        f = n[-1] / d[-1]
        q[shift] = f
        for i, c in enumerate(d):
            n[i + shift] -= f * c
        n.pop()
    return ParamPoly.from_u_coeffs(q), ParamPoly.from_u_coeffs(n)


def _irrational_root_matters(vol: ParamPoly, a: Fraction, b: Fraction, lower: ParamPoly, caps: list[ParamPoly]) -> bool:
    """Float probe: does vol vanish between the lower wall and the first rational wall?"""
    for i in range(0, 33):
        u0 = a + (b - a) * Fraction(i, 32)
        lo = float(lower(u0))
        hi = min((float(c(u0)) for c in caps), default=math.inf)
        A = float(vol.coeff(0, 2))
        B = float(sum(c * u0**a_ for (a_, b_), c in vol.terms.items() if b_ == 1))
        C = float(sum(c * u0**a_ for (a_, b_), c in vol.terms.items() if b_ == 0))
        if A == 0:
            roots = [-C / B] if B else []
        else:
            disc = B * B - 4 * A * C
            roots = [] if disc < 0 else [(-B + s * math.sqrt(disc)) / (2 * A) for s in (1, -1)]
        if any(lo + 1e-12 < r <= hi for r in roots):
            return True
    return False


def _crossings(fns: Sequence[ParamPoly], a: Fraction, b: Fraction) -> list[Fraction]:
    pts = set()
    for i in range(len(fns)):
        for j in range(i + 1, len(fns)):
            diff = fns[i] - fns[j]
            beta = diff.coeff(1)
            if beta:
                r = -diff.coeff(0) / beta
                if a < r < b:
                    pts.add(r)
    return sorted(pts)


def _cell_polygon(a, b, lower, upper) -> Polygon:
    return Polygon([(a, lower(a)), (b, lower(b)), (b, upper(b)), (a, upper(a))])


class _Sweep:
    def __init__(self, L: SurfaceLattice, D: ParamDivisor, ample: ClassVector | None):
        self.L = L
        self.D = D
        self.ample = ample
        self.cells: list[ZariskiCell] = []
        self.threshold: list[ThresholdPiece] = []
        self.cands = list(L.negative_candidates)

    def solve(self, active: tuple[str, ...]):
        L, D = self.L, self.D.base
        if active:
            G = L.gram(active)
            if not is_negative_definite(G):
                raise IndefiniteSupport(f"Gram matrix of {list(active)} is not negative definite")
            x = solve_poly_rhs(G, [ParamPoly.lift(pair(D, L.curve(C), L)) for C in active])
        else:
            x = []
        N = dict(zip(active, x))
        P = D - _negative_part(L, N).as_polys()
        return N, P.as_polys()

    def run(self, a: Fraction, b: Fraction, lower: ParamPoly, active: tuple[str, ...], depth: int, seen: frozenset):
        if depth > MAX_SWEEP_DEPTH:
            raise ChamberError("chamber sweep did not terminate")
        if active in seen:
            raise ChamberError(f"active set {list(active)} repeated along the sweep")
        seen = seen | {active}
        N, P = self.solve(active)
        vol = ParamPoly.lift(pair(P, P, self.L))

        bounds: list[tuple[ParamPoly, str]] = []
        lower_checks: list[tuple[ParamPoly, str]] = []
        constraints = [(c, f"leave:{C}") for C, c in N.items()]
        constraints += [(ParamPoly.lift(pair(P, self.L.curve(C), self.L)), f"enter:{C}") for C in self.cands if C not in N]
        for g, tag in constraints:
            g0, gamma = _split_affine_v(g)
            if gamma < 0:
                bounds.append((-g0 / gamma, tag))
            else:
                lower_checks.append((g, tag))

        if vol.is_zero():
            self._terminal(a, b, lower, lower, active, N, P, vol, ("vol",))
            return
        roots, exact = _vol_roots(vol)
        if not exact and _irrational_root_matters(vol, a, b, lower, [f for f, _ in bounds]):
            raise IrrationalWall(f"volume {vol} vanishes along an irrational curve for u in [{a}, {b}]")
        bounds += [(r, "vol") for r in roots]

        breaks = [a] + _crossings([lower] + [f for f, _ in bounds], a, b) + [b]
        if a == b:
            breaks = [a, a]
        for lo_u, hi_u in zip(breaks, breaks[1:]):
            m = (lo_u + hi_u) / 2
            lo_m = lower(m)
            for g, tag in lower_checks:
                for uu in (lo_u, hi_u, m):
                    if g(uu, lower(uu)) < 0:
                        raise ChamberError(f"constraint {tag} violated on the lower wall at u={uu}")
            vm = vol(m, lo_m)
            if vm < 0:
                raise NotPseudoeffective(f"volume negative at u={m}, v={lo_m}")
            live = []
            for f, tag in bounds:
                fm = f(m)
                if fm < lo_m:
                    if tag != "vol":
                        raise ChamberError(f"constraint {tag} already violated at u={m}, v={lo_m}")
                    continue
                live.append((fm, f, tag))
            if not live:
                raise ChamberError(f"no upper wall above v={lo_m} at u={m}; family never leaves the big cone")
            best = min(fm for fm, _, _ in live)
            tied = [(f, tag) for fm, f, tag in live if fm == best]
            upper = tied[0][0]
            tags = tuple(sorted({tag for _, tag in tied}))
            if vm == 0 and upper(m) == lo_m:
                tags = tuple(sorted(set(tags) | {"vol"}))
            if "vol" in tags:
                self._terminal(lo_u, hi_u, lower, upper, active, N, P, vol, tags)
                continue
            self._record(lo_u, hi_u, lower, upper, active, N, P, vol, tags)
            entering = {t.split(":", 1)[1] for t in tags if t.startswith("enter:")}
            leaving = {t.split(":", 1)[1] for t in tags if t.startswith("leave:")}
            nxt = tuple(C for C in self.cands if (C in N or C in entering) and C not in leaving)
            self.run(lo_u, hi_u, upper, nxt, depth + 1, seen)

    def _record(self, a, b, lower, upper, active, N, P, vol, tags):
        region = _cell_polygon(a, b, lower, upper)
        if region.degenerate:
            return
        self.cells.append(ZariskiCell(a, b, lower, upper, tuple(active), N, P, vol, region, tags))

    def _terminal(self, a, b, lower, upper, active, N, P, vol, tags):
        self._record(a, b, lower, upper, active, N, P, vol, tags)
        self.threshold.append(ThresholdPiece(a, b, upper))


def _merge_cells(cells: list[ZariskiCell]) -> list[ZariskiCell]:
    cells = sorted(cells, key=lambda c: (c.u_lo, c.lower(c.u_lo), c.upper(c.u_lo)))
    changed = True
    while changed:
        changed = False
        for i, c in enumerate(cells):
            for j, d in enumerate(cells):
                if (i != j and c.u_hi == d.u_lo and c.active == d.active
                        and c.lower == d.lower and c.upper == d.upper):
                    merged = ZariskiCell(c.u_lo, d.u_hi, c.lower, c.upper, c.active, c.N_coeffs, c.P, c.vol,
                                         _cell_polygon(c.u_lo, d.u_hi, c.lower, c.upper),
                                         tuple(sorted(set(c.upper_kind) | set(d.upper_kind))))
                    cells = [x for k, x in enumerate(cells) if k not in (i, j)] + [merged]
                    changed = True
                    break
            if changed:
                break
    return sorted(cells, key=lambda c: (c.u_lo, c.lower((c.u_lo + c.u_hi) / 2)))


def _merge_threshold(pieces: list[ThresholdPiece]) -> list[ThresholdPiece]:
    out: list[ThresholdPiece] = []
    for p in sorted(pieces, key=lambda p: p.u_lo):
        if out and out[-1].u_hi == p.u_lo and out[-1].t == p.t:
            out[-1] = ThresholdPiece(out[-1].u_lo, p.u_hi, p.t)
        else:
            out.append(p)
    return out


def chamber_complex(L: SurfaceLattice, D: ParamDivisor, ample: ClassVector | None = None) -> ChamberedDecomposition:
    """Chamber decomposition of ``{(u, v): u_lo <= u <= u_hi, 0 <= v <= t(u)}``.

    Sweeps upward in v from ``v = 0``: inside a chamber the negative part is
    supported on a fixed active set, so its coefficients and the pairings
    ``P·C`` are affine; the first of these to hit zero is the next wall.
    The sweep stops where the volume vanishes, which is ``t(u)``.
    """
    sweep = _Sweep(L, D, ample)
    sweep.run(D.u_lo, D.u_hi, ParamPoly(), (), 0, frozenset())
    cells = _merge_cells(sweep.cells)
    threshold = _merge_threshold(sweep.threshold)
    if not cells:
        P = ClassVector(c.restrict_v(0) for c in D.base.coeffs)
        cells = [ZariskiCell(D.u_lo, D.u_hi, ParamPoly(), ParamPoly(), (), {}, P, ParamPoly(),
                             Polygon([(D.u_lo, 0), (D.u_hi, 0)]), ("vol",))]
    for c in cells:
        log.debug("cell u in [%s, %s], v in [%s, %s], active %s", c.u_lo, c.u_hi, c.lower, c.upper, c.active)
    return ChamberedDecomposition(L, D, cells, threshold)


def volume_function(dec: ChamberedDecomposition) -> list[tuple[Polygon, ParamPoly]]:
    """The piecewise volume ``P(u, v)^2`` on each non-degenerate cell."""
    return [(c.region, c.vol) for c in dec.cells if not c.degenerate]


# ---------------------------------------------------------------------------
# threefold decompositions (input data, verified)


@dataclass(frozen=True)
class NComponent:
    """One prime component of ``N(u)`` with its coefficient and order data.

    ``ord_along_flag_curve`` is the order along the flag curve of the
    (pulled back) restriction of one unit of the component; likewise
    ``ord_at_points`` at each marked point.
    """

    name: str
    divisor: ClassVector
    coeff: ParamPoly
    ord_along_flag_curve: Fraction = Fraction(0)
    ord_at_points: Mapping[str, Fraction] = field(default_factory=dict)
    restriction: ClassVector | None = None


@dataclass(frozen=True)
class ThreefoldChamber:
    u_lo: Fraction
    u_hi: Fraction
    P: ClassVector
    N: tuple[NComponent, ...] = ()

    def N_total(self, rank: int) -> ClassVector:
        out = ClassVector.zero(rank).as_polys()
        for comp in self.N:
            out = out + comp.divisor.as_polys() * comp.coeff
        return out


@dataclass(frozen=True)
class ThreefoldDecomposition:
    chambers: tuple[ThreefoldChamber, ...]

    @property
    def tau(self) -> Fraction:
        return self.chambers[-1].u_hi

    def volume(self, T: ThreefoldData, i: int) -> ParamPoly:
        P = self.chambers[i].P.as_polys()
        return ParamPoly.lift(triple(P, P, P, T))


def verify_threefold_decomposition(T: ThreefoldData, Y: ClassVector, dec: ThreefoldDecomposition) -> VerificationReport:
    """Check the numerical axioms of a supplied decomposition of ``-K_X - uY``."""
    report = VerificationReport("threefold decomposition")
    report.notes.append("nefness of P(u) is checked only against the supplied test curves")
    computed = T.degree()
    if T.anticanonical_cube is not None:
        report.add("(-K_X)^3 matches stored value", computed == T.anticanonical_cube,
                   f"{format_rational(computed)} vs {format_rational(T.anticanonical_cube)}")
    ch = dec.chambers
    if not ch:
        report.add("chambers present", False, "no chambers")
        return report
    report.add("chambers start at u=0", ch[0].u_lo == 0, f"first chamber starts at {format_rational(ch[0].u_lo)}")
    for prev, nxt in zip(ch, ch[1:]):
        report.add(f"chambers contiguous at u={format_rational(prev.u_hi)}", prev.u_hi == nxt.u_lo,
                   f"{format_rational(prev.u_hi)} vs {format_rational(nxt.u_lo)}")
    u = ParamPoly.u()
    target = T.anticanonical.as_polys() - Y.as_polys() * u
    for k, c in enumerate(ch):
        where = f"[{format_rational(c.u_lo)}, {format_rational(c.u_hi)}]"
        report.add(f"chamber {where} nonempty", c.u_lo < c.u_hi)
        P = c.P.as_polys()
        total = P + c.N_total(T.rank)
        report.add(f"P + N = -K_X - uY on {where}", total == target,
                   "" if total == target else f"P + N = {total.format(T.basis)}, expected {target.format(T.basis)}")
        affine = all(p.degree_u() <= 1 for p in P.coeffs) and all(comp.coeff.degree_u() <= 1 for comp in c.N)
        report.add(f"coefficients affine on {where}", affine)
        for curve in T.test_curves:
            deg = ParamPoly.lift(T.curve_degree(P, curve))
            vals = [(e, deg(e)) for e in (c.u_lo, c.u_hi)]
            bad = [(e, x) for e, x in vals if x < 0]
            report.add(f"P(u)·{curve} >= 0 on {where}", not bad,
                       ", ".join(f"u={format_rational(e)}: {format_rational(x)}" for e, x in bad))
        for comp in c.N:
            vals = [(e, comp.coeff(e)) for e in (c.u_lo, c.u_hi)]
            bad = [(e, x) for e, x in vals if x < 0]
            report.add(f"coefficient of {comp.name} >= 0 on {where}", not bad,
                       ", ".join(f"u={format_rational(e)}: {format_rational(x)}" for e, x in bad))
    for k in range(len(ch) - 1):
        b = ch[k].u_hi
        Pl, Pr = ch[k].P.at(b), ch[k + 1].P.at(b)
        report.add(f"P continuous at u={format_rational(b)}", Pl == Pr,
                   f"{Pl.format(T.basis)} vs {Pr.format(T.basis)}")
        vl, vr = dec.volume(T, k)(b), dec.volume(T, k + 1)(b)
        report.add(f"vol continuous at u={format_rational(b)}", vl == vr,
                   f"{format_rational(vl)} vs {format_rational(vr)}")
    vt = dec.volume(T, len(ch) - 1)(dec.tau)
    report.add(f"vol vanishes at tau={format_rational(dec.tau)}", vt == 0, f"vol(tau) = {format_rational(vt)}")
    return report


def peff_threshold_u(T: ThreefoldData, dec: ThreefoldDecomposition) -> Fraction:
    """The pseudoeffective threshold tau: right end of the last chamber, where vol must vanish."""
    tau = dec.tau
    vt = dec.volume(T, len(dec.chambers) - 1)(tau)
    if vt != 0:
        raise VolumeNotVanishing(f"vol(-K_X - {format_rational(tau)}Y) = {format_rational(vt)}")
    return tau
