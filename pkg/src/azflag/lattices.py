"""Intersection data on the flag surface and on the threefold.

Classes are coefficient vectors over a named basis.  Coefficients may be
Fractions or :class:`ParamPoly` so the same code handles fixed classes and
families such as ``P(u)|_Y - vZ``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations_with_replacement, permutations
from typing import Iterable, Mapping, Sequence

from .errors import RankMismatch
from .exactnum import ParamPoly, format_rational


def _zero():
    return Fraction(0)


class ClassVector:
    """A divisor or curve class: coefficients over an ordered basis."""

    __slots__ = ("coeffs",)

    def __init__(self, coeffs: Iterable):
        self.coeffs = tuple(c if isinstance(c, ParamPoly) else Fraction(c) for c in coeffs)

    @classmethod
    def zero(cls, rank: int) -> "ClassVector":
        return cls([0] * rank)

    @classmethod
    def basis_vector(cls, rank: int, i: int) -> "ClassVector":
        return cls([1 if j == i else 0 for j in range(rank)])

    @classmethod
    def from_mapping(cls, basis: Sequence[str], m: Mapping[str, object]) -> "ClassVector":
        unknown = set(m) - set(basis)
        if unknown:
            raise KeyError(f"unknown basis names {sorted(unknown)}")
        return cls([m.get(name, 0) for name in basis])

    def __len__(self):
        return len(self.coeffs)

    def __iter__(self):
        return iter(self.coeffs)

    def __getitem__(self, i):
        return self.coeffs[i]

    def _check(self, other: "ClassVector"):
        if len(self) != len(other):
            raise RankMismatch(f"rank {len(self)} vs rank {len(other)}")

    def __add__(self, other: "ClassVector") -> "ClassVector":
        self._check(other)
        return ClassVector(a + b for a, b in zip(self.coeffs, other.coeffs))

    def __sub__(self, other: "ClassVector") -> "ClassVector":
        self._check(other)
        return ClassVector(a - b for a, b in zip(self.coeffs, other.coeffs))

    def __neg__(self) -> "ClassVector":
        return ClassVector(-a for a in self.coeffs)

    def __mul__(self, scalar) -> "ClassVector":
        if isinstance(scalar, ClassVector):
            return NotImplemented
        return ClassVector(scalar * a for a in self.coeffs)

    __rmul__ = __mul__

    def __eq__(self, other):
        if not isinstance(other, ClassVector) or len(self) != len(other):
            return False
        return all(ParamPoly.lift(a) == ParamPoly.lift(b) for a, b in zip(self.coeffs, other.coeffs))

    def __hash__(self):
        return hash(tuple(ParamPoly.lift(c) for c in self.coeffs))

    def is_zero(self) -> bool:
        return all(ParamPoly.lift(c).is_zero() for c in self.coeffs)

    def is_parametric(self) -> bool:
        return any(isinstance(c, ParamPoly) and not c.is_constant() for c in self.coeffs)

    def at(self, u0, v0=0) -> "ClassVector":
        """Evaluate parametric coefficients at ``(u0, v0)``."""
        return ClassVector(c(u0, v0) if isinstance(c, ParamPoly) else c for c in self.coeffs)

    def as_polys(self) -> "ClassVector":
        return ClassVector(ParamPoly.lift(c) for c in self.coeffs)

    def format(self, basis: Sequence[str]) -> str:
        parts = []
        for name, c in zip(basis, self.coeffs):
            p = ParamPoly.lift(c)
            if p.is_zero():
                continue
            if p == 1:
                parts.append(name)
            elif p.is_constant():
                parts.append(f"{format_rational(p.constant_value())}*{name}")
            else:
                parts.append(f"({p})*{name}")
        return " + ".join(parts) if parts else "0"

    def __repr__(self):
        return f"ClassVector({[str(c) if isinstance(c, ParamPoly) else format_rational(c) for c in self.coeffs]})"


# aliases that read better at call sites
SurfaceClass = ClassVector
DivisorClass = ClassVector


@dataclass(frozen=True)
class SurfaceLattice:
    """Curve classes on a (possibly singular or blown-up) surface with their pairing.

    ``curves`` names classes that are not basis elements (``h - e1 - e2``,
    the conic ``2h - e1 - ... - e5``).  Basis elements are curves too.
    """

    basis: tuple[str, ...]
    pairing: tuple[tuple[Fraction, ...], ...]
    negative_candidates: tuple[str, ...] = ()
    curves: Mapping[str, ClassVector] = field(default_factory=dict)

    def __post_init__(self):
        n = len(self.basis)
        object.__setattr__(self, "basis", tuple(self.basis))
        object.__setattr__(self, "pairing", tuple(tuple(Fraction(x) for x in row) for row in self.pairing))
        object.__setattr__(self, "negative_candidates", tuple(self.negative_candidates))
        object.__setattr__(self, "curves", dict(self.curves))
        if len(set(self.basis)) != n:
            raise ValueError("duplicate basis names")
        if len(self.pairing) != n or any(len(r) != n for r in self.pairing):
            raise RankMismatch(f"pairing matrix does not match basis of rank {n}")
        for i in range(n):
            for j in range(i):
                if self.pairing[i][j] != self.pairing[j][i]:
                    raise ValueError(f"pairing not symmetric at ({self.basis[i]}, {self.basis[j]})")
        for name, cls in self.curves.items():
            if name in self.basis:
                raise ValueError(f"curve {name!r} shadows a basis name")
            if len(cls) != n:
                raise RankMismatch(f"curve {name!r} has rank {len(cls)}, lattice has {n}")
        for name in self.negative_candidates:
            if name not in self.basis and name not in self.curves:
                raise ValueError(f"negative candidate {name!r} is not a known curve")

    @property
    def rank(self) -> int:
        return len(self.basis)

    def curve_names(self) -> list[str]:
        return list(self.basis) + [c for c in self.curves]

    def curve(self, name: str) -> ClassVector:
        if name in self.curves:
            return self.curves[name]
        try:
            return ClassVector.basis_vector(self.rank, self.basis.index(name))
        except ValueError:
            raise KeyError(f"unknown curve {name!r}") from None

    def gram(self, names: Sequence[str]) -> list[list[Fraction]]:
        vecs = [self.curve(n) for n in names]
        return [[pair(a, b, self) for b in vecs] for a in vecs]

    def class_of(self, m: Mapping[str, object]) -> ClassVector:
        return ClassVector.from_mapping(self.basis, m)


def pair(a: ClassVector, b: ClassVector, L: SurfaceLattice):
    """Intersection number ``a·b``; a polynomial when either class is parametric."""
    if len(a) != L.rank or len(b) != L.rank:
        raise RankMismatch(f"classes of rank {len(a)}, {len(b)} on lattice of rank {L.rank}")
    total = Fraction(0)
    M = L.pairing
    for i, ai in enumerate(a.coeffs):
        if _is_zero(ai):
            continue
        row = M[i]
        for j, bj in enumerate(b.coeffs):
            if row[j] and not _is_zero(bj):
                total = total + ai * row[j] * bj
    if isinstance(total, ParamPoly) and total.is_constant():
        return total.constant_value()
    return total


def _is_zero(x) -> bool:
    return x.is_zero() if isinstance(x, ParamPoly) else x == 0


@dataclass(frozen=True)
class ThreefoldData:
    """Divisor classes on a threefold with their triple intersection form.

    ``triple_form`` maps sorted index triples ``(i, j, k)`` to the number
    ``D_i·D_j·D_k``; missing triples are zero.  Curves are stored only as
    their degree vectors against the divisor basis.
    """

    basis: tuple[str, ...]
    triple_form: Mapping[tuple[int, int, int], Fraction]
    anticanonical: ClassVector
    test_curves: Mapping[str, tuple[Fraction, ...]] = field(default_factory=dict)
    classes: Mapping[str, ClassVector] = field(default_factory=dict)
    anticanonical_cube: Fraction | None = None

    def __post_init__(self):
        n = len(self.basis)
        object.__setattr__(self, "basis", tuple(self.basis))
        tf: dict[tuple[int, int, int], Fraction] = {}
        for key, val in self.triple_form.items():
            if len(key) != 3 or any(not 0 <= i < n for i in key):
                raise RankMismatch(f"triple-form index {key} outside basis of rank {n}")
            skey = tuple(sorted(key))
            val = Fraction(val)
            if skey in tf and tf[skey] != val:
                raise ValueError(f"triple form not symmetric at {key}")
            tf[skey] = val
        object.__setattr__(self, "triple_form", tf)
        if len(self.anticanonical) != n:
            raise RankMismatch("anticanonical class has wrong rank")
        object.__setattr__(self, "test_curves", {k: tuple(Fraction(x) for x in v) for k, v in self.test_curves.items()})
        for name, vec in self.test_curves.items():
            if len(vec) != n:
                raise RankMismatch(f"test curve {name!r} has wrong rank")
        object.__setattr__(self, "classes", dict(self.classes))
        for name, cls in self.classes.items():
            if len(cls) != n:
                raise RankMismatch(f"class {name!r} has wrong rank")
        if self.anticanonical_cube is not None:
            object.__setattr__(self, "anticanonical_cube", Fraction(self.anticanonical_cube))
        if self.degree() <= 0:
            raise ValueError("anticanonical class must have positive cube")

    @property
    def rank(self) -> int:
        return len(self.basis)

    def t(self, i: int, j: int, k: int) -> Fraction:
        return self.triple_form.get(tuple(sorted((i, j, k))), Fraction(0))

    def degree(self) -> Fraction:
        """``(-K_X)^3`` computed from the triple form."""
        return triple(self.anticanonical, self.anticanonical, self.anticanonical, self)

    def divisor(self, name_or_map) -> ClassVector:
        if isinstance(name_or_map, ClassVector):
            return name_or_map
        if isinstance(name_or_map, str):
            if name_or_map in self.classes:
                return self.classes[name_or_map]
            if name_or_map in self.basis:
                return ClassVector.basis_vector(self.rank, self.basis.index(name_or_map))
            raise KeyError(f"unknown divisor {name_or_map!r}")
        return ClassVector.from_mapping(self.basis, name_or_map)

    def curve_degree(self, D: ClassVector, curve: str):
        vec = self.test_curves[curve]
        return sum((c * d for c, d in zip(D.coeffs, vec)), Fraction(0))

    def triples(self):
        """All symmetric index triples, sorted."""
        return combinations_with_replacement(range(self.rank), 3)


def triple(a: ClassVector, b: ClassVector, c: ClassVector, T: ThreefoldData):
    n = T.rank
    if len(a) != n or len(b) != n or len(c) != n:
        raise RankMismatch(f"classes of rank {len(a)}, {len(b)}, {len(c)} on basis of rank {n}")
    total = Fraction(0)
    for (i, j, k), val in T.triple_form.items():
        if not val:
            continue
        # sum over distinct orderings of the sorted index triple
        for (x, y, z) in set(permutations((i, j, k))):
            term = a.coeffs[x] * b.coeffs[y] * c.coeffs[z]
            if not _is_zero(term):
                total = total + val * term
    if isinstance(total, ParamPoly) and total.is_constant():
        return total.constant_value()
    return total


@dataclass(frozen=True)
class RestrictionMap:
    """Image on the flag surface of each threefold basis divisor.

    In pullback mode the images are ``σ*(D|_Y)`` on the blown-up surface.
    """

    images: tuple[ClassVector, ...]

    def __post_init__(self):
        object.__setattr__(self, "images", tuple(self.images))
        ranks = {len(im) for im in self.images}
        if len(ranks) > 1:
            raise RankMismatch("restriction images have different ranks")


def restrict(D: ClassVector, M: RestrictionMap) -> ClassVector:
    if len(D) != len(M.images):
        raise RankMismatch(f"divisor of rank {len(D)}, map defined on rank {len(M.images)}")
    if not M.images:
        return ClassVector([])
    out = ClassVector.zero(len(M.images[0]))
    for c, im in zip(D.coeffs, M.images):
        if not _is_zero(c):
            out = out + im * c
    return out


# ---------------------------------------------------------------------------
# verification reports


@dataclass(frozen=True)
class Check:
    name: str
    ok: bool
    detail: str = ""

    def describe(self) -> str:
        return f"{'PASS' if self.ok else 'FAIL'} {self.name}" + (f": {self.detail}" if self.detail else "")


@dataclass
class VerificationReport:
    title: str
    checks: list[Check] = field(default_factory=list)
    notes: list[str] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return all(c.ok for c in self.checks)

    def add(self, name: str, ok: bool, detail: str = "") -> None:
        self.checks.append(Check(name, bool(ok), detail))

    def failures(self) -> list[Check]:
        return [c for c in self.checks if not c.ok]

    def extend(self, other: "VerificationReport") -> None:
        self.checks.extend(other.checks)
        self.notes.extend(other.notes)

    def lines(self) -> list[str]:
        return [c.describe() for c in self.checks] + [f"note: {n}" for n in self.notes]


def verify_restriction(M: RestrictionMap, T: ThreefoldData, Y: ClassVector, L: SurfaceLattice) -> VerificationReport:
    """Check ``D_i·D_j·Y == M(D_i)·M(D_j)`` for every pair of basis divisors."""
    report = VerificationReport("restriction")
    if len(M.images) != T.rank:
        report.add("map rank", False, f"{len(M.images)} images for {T.rank} basis divisors")
        return report
    if any(len(im) != L.rank for im in M.images):
        report.add("image rank", False, f"images do not live on the rank-{L.rank} lattice")
        return report
    for i in range(T.rank):
        ei = ClassVector.basis_vector(T.rank, i)
        for j in range(i, T.rank):
            ej = ClassVector.basis_vector(T.rank, j)
            lhs = triple(ei, ej, Y, T)
            rhs = pair(M.images[i], M.images[j], L)
            name = f"({T.basis[i]}·{T.basis[j]}·Y) = {T.basis[i]}|·{T.basis[j]}|"
            report.add(name, lhs == rhs, f"{format_rational(lhs)} vs {format_rational(rhs)}")
    return report
