"""Exact rational arithmetic: polynomials in (u, v), linear algebra, polygon integration.

Rationals are :class:`fractions.Fraction`.  Every routine here is exact; there
is no floating-point path.
"""

from __future__ import annotations

import math
from fractions import Fraction
from functools import reduce
from typing import Iterable, Mapping, Sequence, Union

from .errors import DegenerateCell, SingularMatrix

Rational = Fraction
Number = Union[int, Fraction]


def as_rational(x) -> Fraction:
    """Coerce an int, Fraction or ``"p/q"`` string to a Fraction.

    Floats are refused: a float in an exact pipeline is always a bug.
    """
    if isinstance(x, bool):
        raise TypeError("bool is not a rational")
    if isinstance(x, Fraction):
        return x
    if isinstance(x, int):
        return Fraction(x)
    if isinstance(x, str):
        s = x.strip()
        if not s or any(c in s for c in ".eE_ "):
            raise ValueError(f"not a rational string: {x!r}")
        return Fraction(s)
    raise TypeError(f"cannot use {type(x).__name__} as an exact rational")


def format_rational(x: Number) -> str:
    x = Fraction(x)
    if x.denominator == 1:
        return str(x.numerator)
    return f"{x.numerator}/{x.denominator}"


# ---------------------------------------------------------------------------
# polynomials


class ParamPoly:
    """Polynomial in the parameters ``u`` and ``v`` with rational coefficients.

    Stored as ``{(a, b): coeff}`` for the monomial ``u**a * v**b``; zero
    coefficients are never stored.  Instances are immutable and hashable.
    """

    __slots__ = ("_terms", "_hash")

    def __init__(self, terms: Mapping[tuple[int, int], Number] | None = None):
        clean: dict[tuple[int, int], Fraction] = {}
        for (a, b), c in (terms or {}).items():
            if a < 0 or b < 0:
                raise ValueError("negative exponent")
            c = as_rational(c)
            if c:
                clean[(int(a), int(b))] = clean.get((int(a), int(b)), Fraction(0)) + c
        self._terms = {k: c for k, c in clean.items() if c}
        self._hash = None

    # constructors
    @classmethod
    def const(cls, c: Number) -> "ParamPoly":
        return cls({(0, 0): c})

    @classmethod
    def u(cls) -> "ParamPoly":
        return cls({(1, 0): 1})

    @classmethod
    def v(cls) -> "ParamPoly":
        return cls({(0, 1): 1})

    @classmethod
    def affine(cls, c0: Number = 0, cu: Number = 0, cv: Number = 0) -> "ParamPoly":
        return cls({(0, 0): c0, (1, 0): cu, (0, 1): cv})

    @classmethod
    def from_u_coeffs(cls, coeffs: Sequence[Number]) -> "ParamPoly":
        """Univariate polynomial in u from ``[c0, c1, ...]``."""
        return cls({(i, 0): c for i, c in enumerate(coeffs)})

    @classmethod
    def lift(cls, x) -> "ParamPoly":
        if isinstance(x, ParamPoly):
            return x
        return cls.const(x)

    # inspection
    @property
    def terms(self) -> dict[tuple[int, int], Fraction]:
        return dict(self._terms)

    def coeff(self, a: int, b: int = 0) -> Fraction:
        return self._terms.get((a, b), Fraction(0))

    def is_zero(self) -> bool:
        return not self._terms

    def is_constant(self) -> bool:
        return all(k == (0, 0) for k in self._terms)

    def constant_value(self) -> Fraction:
        if not self.is_constant():
            raise ValueError(f"{self} is not constant")
        return self.coeff(0, 0)

    def degree_u(self) -> int:
        return max((a for a, _ in self._terms), default=-1)

    def degree_v(self) -> int:
        return max((b for _, b in self._terms), default=-1)

    def total_degree(self) -> int:
        return max((a + b for a, b in self._terms), default=-1)

    def u_coeffs(self) -> list[Fraction]:
        """Coefficient list in u; the polynomial must not involve v."""
        if self.degree_v() > 0:
            raise ValueError(f"{self} depends on v")
        return [self.coeff(i, 0) for i in range(self.degree_u() + 1)]

    # arithmetic
    def __add__(self, other):
        if not isinstance(other, (ParamPoly, int, Fraction)):
            return NotImplemented
        other = ParamPoly.lift(other)
        t = dict(self._terms)
        for k, c in other._terms.items():
            t[k] = t.get(k, Fraction(0)) + c
        return ParamPoly(t)

    __radd__ = __add__

    def __neg__(self):
        return ParamPoly({k: -c for k, c in self._terms.items()})

    def __sub__(self, other):
        if not isinstance(other, (ParamPoly, int, Fraction)):
            return NotImplemented
        return self + (-ParamPoly.lift(other))

    def __rsub__(self, other):
        return ParamPoly.lift(other) - self

    def __mul__(self, other):
        if isinstance(other, (int, Fraction)):
            return ParamPoly({k: c * other for k, c in self._terms.items()})
        if not isinstance(other, ParamPoly):
            return NotImplemented
        t: dict[tuple[int, int], Fraction] = {}
        for (a1, b1), c1 in self._terms.items():
            for (a2, b2), c2 in other._terms.items():
                k = (a1 + a2, b1 + b2)
                t[k] = t.get(k, Fraction(0)) + c1 * c2
        return ParamPoly(t)

    __rmul__ = __mul__

    def __truediv__(self, other):
        if isinstance(other, (int, Fraction)):
            return self * (Fraction(1) / Fraction(other))
        if isinstance(other, ParamPoly) and other.is_constant():
            return self / other.constant_value()
        return NotImplemented

    def __pow__(self, n: int):
        if not isinstance(n, int) or n < 0:
            return NotImplemented
        result = ParamPoly.const(1)
        base = self
        while n:
            if n & 1:
                result = result * base
            base = base * base
            n >>= 1
        return result

    def __eq__(self, other):
        if isinstance(other, (int, Fraction)):
            other = ParamPoly.const(other)
        if not isinstance(other, ParamPoly):
            return NotImplemented
        return self._terms == other._terms

    def __hash__(self):
        if self._hash is None:
            self._hash = hash(frozenset(self._terms.items()))
        return self._hash

    # calculus and substitution
    def __call__(self, u0: Number = 0, v0: Number = 0) -> Fraction:
        return poly_eval(self, u0, v0)

    def substitute_v(self, q: "ParamPoly") -> "ParamPoly":
        """Replace v by the polynomial ``q`` (Horner in v)."""
        deg = self.degree_v()
        if deg < 0:
            return ParamPoly()
        rows = [ParamPoly({(a, 0): c for (a, b), c in self._terms.items() if b == k}) for k in range(deg + 1)]
        result = rows[deg]
        for k in range(deg - 1, -1, -1):
            result = result * q + rows[k]
        return result

    def restrict_v(self, v0: Number) -> "ParamPoly":
        return self.substitute_v(ParamPoly.const(v0))

    def restrict_u(self, u0: Number) -> "ParamPoly":
        u0 = Fraction(u0)
        t: dict[tuple[int, int], Fraction] = {}
        for (a, b), c in self._terms.items():
            t[(0, b)] = t.get((0, b), Fraction(0)) + c * u0**a
        return ParamPoly(t)

    def antiderivative_v(self) -> "ParamPoly":
        return ParamPoly({(a, b + 1): c / (b + 1) for (a, b), c in self._terms.items()})

    def antiderivative_u(self) -> "ParamPoly":
        return ParamPoly({(a + 1, b): c / (a + 1) for (a, b), c in self._terms.items()})

    def derivative_v(self) -> "ParamPoly":
        return ParamPoly({(a, b - 1): c * b for (a, b), c in self._terms.items() if b})

    def integrate_v(self, lo: "ParamPoly", hi: "ParamPoly") -> "ParamPoly":
        """``∫_{lo(u)}^{hi(u)} p(u, v) dv`` as a polynomial in u."""
        F = self.antiderivative_v()
        return F.substitute_v(ParamPoly.lift(hi)) - F.substitute_v(ParamPoly.lift(lo))

    def integrate_u(self, a: Number, b: Number) -> Fraction:
        """Definite integral in u of a polynomial that does not involve v."""
        F = self.antiderivative_u()
        return F(b, 0) - F(a, 0)

    # display
    def __repr__(self):
        return f"ParamPoly({self})"

    def __str__(self):
        if not self._terms:
            return "0"
        parts = []
        for (a, b) in sorted(self._terms, key=lambda k: (k[0] + k[1], -k[0], k)):
            c = self._terms[(a, b)]
            mono = "*".join(
                x for x in (
                    ("u" if a == 1 else f"u^{a}") if a else "",
                    ("v" if b == 1 else f"v^{b}") if b else "",
                ) if x
            )
            mag = abs(c)
            if mono:
                body = mono if mag == 1 else f"{format_rational(mag)}*{mono}"
            else:
                body = format_rational(mag)
            parts.append(("-" if c < 0 else "+", body))
        sign, body = parts[0]
        out = ("-" if sign == "-" else "") + body
        for sign, body in parts[1:]:
            out += f" {sign} {body}"
        return out

    def to_json(self) -> list:
        """Coefficient table indexed ``[u-degree][v-degree]``."""
        du, dv = max(self.degree_u(), 0), max(self.degree_v(), 0)
        return [[format_rational(self.coeff(a, b)) for b in range(dv + 1)] for a in range(du + 1)]

    @classmethod
    def from_json(cls, table) -> "ParamPoly":
        return cls({(a, b): as_rational(c) for a, row in enumerate(table) for b, c in enumerate(row)})


def poly_eval(p: ParamPoly, u0: Number, v0: Number = 0) -> Fraction:
    u0, v0 = Fraction(u0), Fraction(v0)
    return sum((c * u0**a * v0**b for (a, b), c in p._terms.items()), Fraction(0))


def rational_roots(p: ParamPoly) -> list[Fraction]:
    """All rational roots of a univariate polynomial, with multiplicity.

    The polynomial may be in u or in v but not both.  Irrational roots are
    simply absent from the result.
    """
    if p.is_zero():
        raise ValueError("zero polynomial has every number as a root")
    if p.degree_u() > 0 and p.degree_v() > 0:
        raise ValueError(f"{p} is not univariate")
    if p.degree_v() > 0:
        coeffs = [p.coeff(0, b) for b in range(p.degree_v() + 1)]
    else:
        coeffs = p.u_coeffs()
    # primitive integer form
    den = reduce(math.lcm, (c.denominator for c in coeffs), 1)
    ints = [int(c * den) for c in coeffs]
    g = reduce(math.gcd, ints)
    ints = [c // g for c in ints]

    roots: list[Fraction] = []
    while len(ints) > 1 and ints[0] == 0:
        roots.append(Fraction(0))
        ints = ints[1:]
    while len(ints) > 1:
        found = None
        for cand in _root_candidates(ints[0], ints[-1]):
            if _horner_int(ints, cand) == 0:
                found = cand
                break
        if found is None:
            break
        roots.append(found)
        ints = _deflate(ints, found)
    return sorted(roots)


def _divisors(n: int) -> list[int]:
    n = abs(n)
    small, large = [], []
    d = 1
    while d * d <= n:
        if n % d == 0:
            small.append(d)
            if d * d != n:
                large.append(n // d)
        d += 1
    return small + large[::-1]


def _root_candidates(const: int, lead: int):
    seen = set()
    for p in _divisors(const):
        for q in _divisors(lead):
            for s in (1, -1):
                r = Fraction(s * p, q)
                if r not in seen:
                    seen.add(r)
                    yield r


def _horner_int(coeffs: list[int], x: Fraction) -> Fraction:
    acc = Fraction(0)
    for c in reversed(coeffs):
        acc = acc * x + c
    return acc


def _deflate(coeffs: list[int], r: Fraction) -> list[int]:
    # synthetic division of a primitive integer polynomial by (q x - p)
    p_, q_ = r.numerator, r.denominator
    n = len(coeffs) - 1
    out = [0] * n
    rem = coeffs[n]
    out[n - 1] = rem // q_
    for k in range(n - 1, 0, -1):
        rem = coeffs[k] + out[k] * p_
        out[k - 1] = rem // q_
    g = reduce(math.gcd, out) or 1
    return [c // g for c in out]


# ---------------------------------------------------------------------------
# linear algebra


def _check_square(M: Sequence[Sequence]) -> int:
    n = len(M)
    if any(len(row) != n for row in M):
        raise ValueError("matrix is not square")
    return n


def determinant(M: Sequence[Sequence[Number]]) -> Fraction:
    n = _check_square(M)
    A = [[Fraction(x) for x in row] for row in M]
    det = Fraction(1)
    for col in range(n):
        pivot = next((r for r in range(col, n) if A[r][col] != 0), None)
        if pivot is None:
            return Fraction(0)
        if pivot != col:
            A[col], A[pivot] = A[pivot], A[col]
            det = -det
        det *= A[col][col]
        for r in range(col + 1, n):
            f = A[r][col] / A[col][col]
            if f:
                for c in range(col, n):
                    A[r][c] -= f * A[col][c]
    return det


def rat_solve_symmetric(M: Sequence[Sequence[Number]], b: Sequence[Number]) -> list[Fraction]:
    """Solve ``M x = b`` exactly by Gauss-Jordan elimination."""
    n = _check_square(M)
    if len(b) != n:
        raise ValueError("right-hand side has wrong length")
    A = [[Fraction(x) for x in row] + [Fraction(b[i])] for i, row in enumerate(M)]
    for col in range(n):
        pivot = next((r for r in range(col, n) if A[r][col] != 0), None)
        if pivot is None:
            raise SingularMatrix(f"matrix of size {n} is singular")
        A[col], A[pivot] = A[pivot], A[col]
        inv = 1 / A[col][col]
        A[col] = [x * inv for x in A[col]]
        for r in range(n):
            if r != col and A[r][col]:
                f = A[r][col]
                A[r] = [x - f * y for x, y in zip(A[r], A[col])]
    return [A[i][n] for i in range(n)]


def solve_poly_rhs(M: Sequence[Sequence[Number]], b: Sequence[ParamPoly]) -> list[ParamPoly]:
    """Solve ``M x = b`` with a constant matrix and polynomial right-hand side."""
    n = len(b)
    if n == 0:
        return []
    if determinant(M) == 0:
        raise SingularMatrix(f"matrix of size {n} is singular")
    monomials = sorted({k for p in b for k in ParamPoly.lift(p).terms})
    cols = {k: rat_solve_symmetric(M, [ParamPoly.lift(p).coeff(*k) for p in b]) for k in monomials}
    return [ParamPoly({k: cols[k][i] for k in monomials}) for i in range(n)]


def is_negative_definite(M: Sequence[Sequence[Number]]) -> bool:
    """Sylvester's criterion: leading minors alternate in sign starting negative."""
    n = _check_square(M)
    for k in range(1, n + 1):
        d = determinant([row[:k] for row in M[:k]])
        if (-1) ** k * d <= 0:
            return False
    return True


# ---------------------------------------------------------------------------
# polygons


Point = tuple[Fraction, Fraction]


def _cross(o: Point, a: Point, b: Point) -> Fraction:
    return (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])


class Polygon:
    """Convex polygon with rational vertices in counterclockwise order.

    Points are given in any order; the constructor takes their convex hull,
    drops repeats and collinear midpoints.  A hull of zero area is kept but
    flagged ``degenerate``.
    """

    __slots__ = ("vertices", "degenerate")

    def __init__(self, points: Iterable[tuple[Number, Number]]):
        pts = sorted({(Fraction(x), Fraction(y)) for x, y in points})
        if len(pts) < 3:
            hull = pts
        else:
            lower: list[Point] = []
            for p in pts:
                while len(lower) >= 2 and _cross(lower[-2], lower[-1], p) <= 0:
                    lower.pop()
                lower.append(p)
            upper: list[Point] = []
            for p in reversed(pts):
                while len(upper) >= 2 and _cross(upper[-2], upper[-1], p) <= 0:
                    upper.pop()
                upper.append(p)
            hull = lower[:-1] + upper[:-1]
        self.vertices: tuple[Point, ...] = tuple(hull)
        self.degenerate = len(hull) < 3

    def area(self) -> Fraction:
        vs = self.vertices
        if len(vs) < 3:
            return Fraction(0)
        s = sum((vs[i][0] * vs[(i + 1) % len(vs)][1] - vs[(i + 1) % len(vs)][0] * vs[i][1]
                 for i in range(len(vs))), Fraction(0))
        return s / 2

    def contains(self, pt: tuple[Number, Number]) -> bool:
        p = (Fraction(pt[0]), Fraction(pt[1]))
        vs = self.vertices
        return all(_cross(vs[i], vs[(i + 1) % len(vs)], p) >= 0 for i in range(len(vs)))

    def u_range(self) -> tuple[Fraction, Fraction]:
        us = [x for x, _ in self.vertices]
        return min(us), max(us)

    def __eq__(self, other):
        return isinstance(other, Polygon) and self.vertices == other.vertices

    def __hash__(self):
        return hash(self.vertices)

    def __repr__(self):
        inner = ", ".join(f"({format_rational(x)}, {format_rational(y)})" for x, y in self.vertices)
        return f"Polygon([{inner}])"


def _edge_line(p: Point, q: Point) -> ParamPoly:
    """The line through two points with distinct u, as v = alpha + beta*u."""
    beta = (q[1] - p[1]) / (q[0] - p[0])
    return ParamPoly.from_u_coeffs([p[1] - beta * p[0], beta])


def poly_integrate_region(p: ParamPoly, cell: Polygon) -> Fraction:
    """Exact double integral of ``p(u, v)`` over a convex polygon.

    The polygon is cut into vertical slabs at its vertices; inside each slab
    the lower and upper boundaries are single edges, so the inner integral
    in v has affine limits.
    """
    if cell.degenerate or cell.area() == 0:
        raise DegenerateCell(f"{cell!r} has zero area")
    vs = cell.vertices
    edges = [(vs[i], vs[(i + 1) % len(vs)]) for i in range(len(vs))]
    xs = sorted({x for x, _ in vs})
    total = Fraction(0)
    for a, b in zip(xs, xs[1:]):
        mid = (a + b) / 2
        spanning = [
            _edge_line(e0, e1)
            for e0, e1 in edges
            if e0[0] != e1[0] and min(e0[0], e1[0]) <= a and max(e0[0], e1[0]) >= b
        ]
        if len(spanning) != 2:
            raise DegenerateCell(f"slab [{a}, {b}] of {cell!r} is not bounded by two edges")
        lo, hi = sorted(spanning, key=lambda ln: ln(mid))
        total += p.integrate_v(lo, hi).integrate_u(a, b)
    return total


def integrate_between(p: ParamPoly, a: Number, b: Number, lo: ParamPoly, hi: ParamPoly) -> Fraction:
    """``∫_a^b ∫_{lo(u)}^{hi(u)} p dv du`` for affine (or any polynomial) limits."""
    return p.integrate_v(ParamPoly.lift(lo), ParamPoly.lift(hi)).integrate_u(a, b)
