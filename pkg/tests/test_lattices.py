from fractions import Fraction as F

import pytest
from hypothesis import given, settings, strategies as st

from azflag.errors import RankMismatch
from azflag.exactnum import ParamPoly
from azflag.lattices import (
    ClassVector,
    RestrictionMap,
    SurfaceLattice,
    ThreefoldData,
    pair,
    restrict,
    triple,
    verify_restriction,
)

from conftest import small_fractions

u = ParamPoly.u()

QUADRIC = SurfaceLattice(("L1", "L2"), [[0, 1], [1, 0]])
X = ThreefoldData(("H", "E"), {(0, 0, 0): 1, (0, 0, 1): 0, (0, 1, 1): -5, (1, 1, 1): -22},
                  ClassVector([4, -1]), anticanonical_cube=26)
QT = ClassVector([2, -1])
Q_MAP = RestrictionMap((ClassVector([1, 1]), ClassVector([2, 3])))


def test_pair_examples():
    D = ClassVector([ParamPoly.const(2), 1 + u])
    assert pair(D, ClassVector([1, 0]), QUADRIC) == 1 + u
    E_lat = SurfaceLattice(("s", "f"), [[-2, 1], [1, 0]])
    for n in (1, 2, 3):
        Z = ClassVector([n, 2 * n])
        assert pair(Z, ClassVector([1, 0]), E_lat) == 0  # Z misses the negative section
        assert pair(Z, Z, E_lat) == 2 * n * n
    assert pair(ClassVector.zero(2), ClassVector([5, F(1, 3)]), QUADRIC) == 0


def test_pair_rank_mismatch():
    with pytest.raises(RankMismatch):
        pair(ClassVector([1, 2, 3]), ClassVector([1, 0]), QUADRIC)


def test_triple_examples():
    K = ClassVector([4, -1])
    assert triple(K, K, K, X) == 26
    A = ClassVector([3, -1])
    assert triple(A, A, QT, X) == 0
    H = ClassVector([1, 0])
    assert triple(H, H, H, X) == 1
    assert X.degree() == X.anticanonical_cube == 26


def test_restrict_examples():
    P = ClassVector([4 - 2 * u, u - 1])
    assert restrict(P, Q_MAP).as_polys() == ClassVector([ParamPoly.const(2), 1 + u])
    assert restrict(ClassVector([1, 0]), Q_MAP) == ClassVector([1, 1])
    # on the five-point blow-up of the plane: Qt restricts to the conic through the points
    s_map = RestrictionMap((ClassVector([1, 0, 0, 0, 0, 0]), ClassVector([0, 1, 1, 1, 1, 1])))
    N = ClassVector([2 * (u - 1), -(u - 1)])
    assert restrict(N, s_map).as_polys() == ClassVector([2 * (u - 1)] + [1 - u] * 5)


def test_verify_restriction_examples():
    rep = verify_restriction(Q_MAP, X, QT, QUADRIC)
    assert rep.ok
    bad = RestrictionMap((ClassVector([1, 1]), ClassVector([2, 2])))
    rep = verify_restriction(bad, X, QT, QUADRIC)
    assert not rep.ok
    assert any("H" in c.name and "E" in c.name for c in rep.failures())
    empty = SurfaceLattice((), [])
    zero = RestrictionMap((ClassVector([]), ClassVector([])))
    flat = ThreefoldData(("H", "E"), {(0, 0, 0): 1}, ClassVector([1, 0]))
    assert verify_restriction(zero, flat, ClassVector([0, 0]), empty).ok


def test_lattice_validation():
    with pytest.raises(ValueError):
        SurfaceLattice(("a", "b"), [[0, 1], [2, 0]])
    with pytest.raises(RankMismatch):
        SurfaceLattice(("a", "b"), [[0, 1, 0], [1, 0, 0]])
    with pytest.raises(ValueError):
        SurfaceLattice(("a",), [[-1]], negative_candidates=("b",))
    with pytest.raises(ValueError):
        ThreefoldData(("H",), {(0, 0, 0): -1}, ClassVector([1]))


def test_named_curves():
    L = SurfaceLattice(("h", "e1", "e2"), [[1, 0, 0], [0, -1, 0], [0, 0, -1]],
                       negative_candidates=("e1", "L12"), curves={"L12": ClassVector([1, -1, -1])})
    assert pair(L.curve("L12"), L.curve("L12"), L) == -1
    assert L.gram(["e1", "L12"]) == [[-1, 1], [1, -1]]


def _vec(n):
    return st.lists(small_fractions(), min_size=n, max_size=n).map(ClassVector)


@given(_vec(3), _vec(3), _vec(3), small_fractions(), small_fractions())
@settings(max_examples=60, deadline=None)
def test_pair_bilinear_symmetric(a, b, c, x, y):
    L = SurfaceLattice(("G", "L1h", "L2h"), [[F(-1, 3), 1, F(1, 3)], [1, -3, 0], [F(1, 3), 0, F(-1, 3)]])
    assert pair(a, b, L) == pair(b, a, L)
    assert pair(a * x + b * y, c, L) == x * pair(a, c, L) + y * pair(b, c, L)


@given(_vec(2), _vec(2), _vec(2), _vec(2), small_fractions())
@settings(max_examples=60, deadline=None)
def test_triple_multilinear_symmetric(a, b, c, d, x):
    t = triple(a, b, c, X)
    assert t == triple(b, c, a, X) == triple(c, a, b, X) == triple(b, a, c, X)
    assert triple(a * x + d, b, c, X) == x * t + triple(d, b, c, X)


def test_corpus_restrictions_pass(cases):
    for name, case in cases.items():
        ctx = case.context
        if ctx.has_curve:
            rep = verify_restriction(ctx.restriction, ctx.threefold, ctx.Y, ctx.surface)
            assert rep.ok, name


def test_corpus_restrictions_detect_every_single_entry_perturbation(cases):
    for name, case in cases.items():
        ctx = case.context
        if not ctx.has_curve:
            continue
        for i, im in enumerate(ctx.restriction.images):
            for j in range(len(im)):
                coeffs = list(im.coeffs)
                coeffs[j] += 1
                images = list(ctx.restriction.images)
                images[i] = ClassVector(coeffs)
                rep = verify_restriction(RestrictionMap(tuple(images)), ctx.threefold, ctx.Y, ctx.surface)
                assert not rep.ok, (name, i, j)


def test_corpus_anticanonical_cube(cases):
    for case in cases.values():
        T = case.context.threefold
        K = T.anticanonical
        assert triple(K, K, K, T) == T.anticanonical_cube == 26
