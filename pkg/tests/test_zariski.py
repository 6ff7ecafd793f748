import random
from fractions import Fraction as F

import pytest
from hypothesis import given, settings, strategies as st

from azflag.errors import IndefiniteSupport, NotPseudoeffective, VolumeNotVanishing
from azflag.exactnum import ParamPoly, is_negative_definite
from azflag.lattices import ClassVector, SurfaceLattice, pair
from azflag.zariski import (
    NComponent,
    ParamDivisor,
    ThreefoldChamber,
    ThreefoldDecomposition,
    chamber_complex,
    peff_threshold_u,
    verify_threefold_decomposition,
    volume_function,
    zariski_decompose_at,
)

from conftest import positive_fractions

u, v = ParamPoly.u(), ParamPoly.v()
QUADRIC = SurfaceLattice(("L1", "L2"), [[0, 1], [1, 0]])


def _complexes(cases):
    for name, case in cases.items():
        if case.context.has_curve:
            for i, cd in enumerate(case.context.chambers):
                yield name, i, case.context, cd


# --- pointwise decomposition ---------------------------------------------------


def test_nef_class_is_its_own_positive_part():
    P, N = zariski_decompose_at(QUADRIC, ClassVector([2, 3]))
    assert P == ClassVector([2, 3]) and N == {}


def test_five_point_blowup_examples(cases):
    ctx = cases["flag_D"].context
    base = ctx.chambers[0].divisor.base
    # v in [1, 2-u]: only the exceptional curves over the two points on Z
    P, N = zariski_decompose_at(ctx.surface, base.at(F(1, 2), F(5, 4)))
    assert N == {"e1": F(1, 4), "e2": F(1, 4)}
    # at (1/2, 7/4) the three lines through the other points have joined: (v-1)(e1+e2) + (u+v-2)(L34+L35+L45)
    P, N = zariski_decompose_at(ctx.surface, base.at(F(1, 2), F(7, 4)))
    assert N == {"e1": F(3, 4), "e2": F(3, 4), "L34": F(1, 4), "L35": F(1, 4), "L45": F(1, 4)}


def test_weighted_blowup_example(cases):
    ctx = cases["flag_C"].context
    D = ctx.chambers[0].divisor.base.at(0, F(13, 2))
    P, N = zariski_decompose_at(ctx.surface, D)
    assert N == {"L1h": F(11, 6), "L2h": F(1, 2)}


def test_indefinite_support():
    L = SurfaceLattice(("L1", "L2"), [[0, 1], [1, 0]], negative_candidates=("L1",))
    with pytest.raises(IndefiniteSupport):
        zariski_decompose_at(L, ClassVector([3, -1]))


def test_not_pseudoeffective():
    P2 = SurfaceLattice(("h",), [[1]])
    with pytest.raises(NotPseudoeffective):
        zariski_decompose_at(P2, ClassVector([-1]), ample=ClassVector([1]))
    L = SurfaceLattice(("h", "e"), [[1, 0], [0, -1]], negative_candidates=("e",))
    with pytest.raises(NotPseudoeffective):
        zariski_decompose_at(L, ClassVector([1, -3]))


def _random_points(cases, k, seed):
    rng = random.Random(seed)
    cells = [(ctx, cd, c) for _, _, ctx, cd in _complexes(cases) for c in cd.cells if not c.degenerate]
    for _ in range(k):
        ctx, cd, cell = rng.choice(cells)
        r1 = F(rng.randint(1, 999), 1000)
        r2 = F(rng.randint(1, 999), 1000)
        u0 = cell.u_lo + r1 * (cell.u_hi - cell.u_lo)
        lo, hi = cell.lower(u0), cell.upper(u0)
        yield ctx, cd, cell, u0, lo + r2 * (hi - lo)


def test_pointwise_agrees_with_chambers(cases):
    n = 0
    for ctx, cd, cell, u0, v0 in _random_points(cases, 200, seed=2024):
        P, N = zariski_decompose_at(ctx.surface, cd.divisor.base.at(u0, v0), ctx.polarization())
        want = {C: c(u0, v0) for C, c in cell.N_coeffs.items()}
        assert {C: c for C, c in N.items() if c} == {C: c for C, c in want.items() if c}
        assert P == cell.P.at(u0, v0)
        n += 1
    assert n == 200


def test_homogeneity_idempotence_orthogonality(cases):
    for ctx, cd, cell, u0, v0 in _random_points(cases, 60, seed=7):
        L, A = ctx.surface, ctx.polarization()
        D = cd.divisor.base.at(u0, v0)
        P, N = zariski_decompose_at(L, D, A)
        for lam in (F(1, 3), F(5, 2), 7):
            P2, N2 = zariski_decompose_at(L, D * lam, A)
            assert P2 == P * lam and N2 == {C: c * lam for C, c in N.items()}
        assert zariski_decompose_at(L, P, A) == (P, {})
        Nc = ClassVector.zero(L.rank)
        for C, c in N.items():
            Nc = Nc + L.curve(C) * c
        assert pair(P, Nc, L) == 0


@given(positive_fractions(), positive_fractions(), positive_fractions(9, 4))
@settings(max_examples=40, deadline=None)
def test_homogeneity_random_classes(a, b, lam):
    L = SurfaceLattice(("h", "e1", "e2"), [[1, 0, 0], [0, -1, 0], [0, 0, -1]],
                       negative_candidates=("e1", "e2", "L12"), curves={"L12": ClassVector([1, -1, -1])})
    D = ClassVector([3, a - 2, b - 2])
    try:
        P, N = zariski_decompose_at(L, D)
    except NotPseudoeffective:
        return
    P2, N2 = zariski_decompose_at(L, D * lam)
    assert P2 == P * lam and N2 == {C: c * lam for C, c in N.items()}


# --- chamber complexes ---------------------------------------------------------


def test_cell_invariants_on_corpus(cases):
    for name, i, ctx, cd in _complexes(cases):
        L = ctx.surface
        for cell in cd.cells:
            if cell.degenerate:
                continue
            assert is_negative_definite(L.gram(list(cell.active))) if cell.active else True
            for C in cell.active:
                assert ParamPoly.lift(pair(cell.P, L.curve(C).as_polys(), L)).is_zero(), (name, C)
            for (uu, vv) in cell.region.vertices:
                for C, c in cell.N_coeffs.items():
                    assert c(uu, vv) >= 0, (name, C)
                for C in L.negative_candidates:
                    assert ParamPoly.lift(pair(cell.P, L.curve(C).as_polys(), L))(uu, vv) >= 0, (name, C)
            assert cell.vol == ParamPoly.lift(pair(cell.P, cell.P, L))


def _edges(cell):
    vs = cell.region.vertices
    return [(vs[k], vs[(k + 1) % len(vs)]) for k in range(len(vs))]


def _on_edge(cell, a, b, vol):
    """vol restricted to the line through a, b, as a polynomial in one variable."""
    (u1, v1), (u2, v2) = a, b
    if u1 == u2:
        return "u", u1, vol.restrict_u(u1)
    slope = (v2 - v1) / (u2 - u1)
    line = ParamPoly.affine(v1 - slope * u1, slope)
    return "v", line, vol.substitute_v(line)


def test_volume_continuous_across_walls(cases):
    walls = 0
    for name, i, ctx, cd in _complexes(cases):
        cells = [c for c in cd.cells if not c.degenerate]
        for c1 in cells:
            for a, b in _edges(c1):
                mid = ((a[0] + b[0]) / 2, (a[1] + b[1]) / 2)
                for c2 in cells:
                    if c2 is c1 or not c2.region.contains(mid):
                        continue
                    k1, line1, r1 = _on_edge(c1, a, b, c1.vol)
                    k2, line2, r2 = _on_edge(c1, a, b, c2.vol)
                    assert r1 == r2, (name, i)
                    walls += 1
    assert walls > 0


def test_volume_vanishes_on_threshold_and_decreases_in_v(cases):
    for name, i, ctx, cd in _complexes(cases):
        for piece in cd.threshold:
            for k in range(1, 4):
                u0 = piece.u_lo + (piece.u_hi - piece.u_lo) * F(k, 4)
                top = [c for c in cd.cells if not c.degenerate and c.u_lo <= u0 <= c.u_hi and c.upper(u0) == piece.t(u0)]
                assert top and all(c.vol(u0, piece.t(u0)) == 0 for c in top), name
        for cell in cd.cells:
            if cell.degenerate:
                continue
            dv = cell.vol.derivative_v()
            for u0, v0 in cell.sample_points(3):
                assert dv(u0, v0) <= 0, name


def test_quadric_flag_chambers(cases):
    ctx = cases["flag_B_m0"].context
    assert [(c.u_lo, c.u_hi) for c in ctx.dec3.chambers] == [(0, 1), (1, 2)]
    first, second = ctx.chambers
    assert len(first.cells) == len(second.cells) == 1
    assert first.cells[0].N_coeffs == {} and second.cells[0].N_coeffs == {}
    assert first.threshold[0].t == ParamPoly.const(2)
    assert second.threshold[0].t == 4 - 2 * u
    assert first.cells[0].vol == 2 * (2 - v) * (u + 1)
    assert second.cells[0].vol == 4 * (4 - 2 * u - v) * (2 - u)
    assert [vol for _, vol in volume_function(first)] == [2 * (2 - v) * (u + 1)]


def test_five_point_blowup_chambers(cases):
    cd = cases["flag_D"].context.chambers[0]
    assert {(str(c.lower), str(c.upper)) for c in cd.cells} == {("0", "1"), ("1", "2 - u"), ("2 - u", "5/2 - u")}


def test_weighted_blowup_chambers(cases):
    ctx = cases["flag_C"].context
    walls = [{(str(c.lower), str(c.upper)) for c in cd.cells} for cd in ctx.chambers]
    assert walls[0] == {("0", "1 + u"), ("1 + u", "6"), ("6", "7 + u")}
    assert walls[1] == {("0", "4 - 2*u"), ("4 - 2*u", "12 - 6*u"), ("12 - 6*u", "16 - 8*u")}


def test_zero_family_is_degenerate():
    D = ParamDivisor(ClassVector([ParamPoly(), ParamPoly()]), 0, 1)
    cd = chamber_complex(QUADRIC, D)
    assert len(cd.cells) == 1 and cd.cells[0].degenerate
    assert all(p.t.is_zero() for p in cd.threshold)


def test_param_divisor_must_be_affine():
    with pytest.raises(ValueError):
        ParamDivisor(ClassVector([u * v, ParamPoly()]), 0, 1)


# --- threefold decompositions --------------------------------------------------


def test_threefold_decompositions_verify(cases):
    for name, case in cases.items():
        ctx = case.context
        rep = verify_threefold_decomposition(ctx.threefold, ctx.Y, ctx.dec3)
        assert rep.ok, (name, [c.describe() for c in rep.failures()])
        assert any("test curves" in n for n in rep.notes)


def test_quadric_volumes(cases):
    ctx = cases["flag_B_m0"].context
    T, dec = ctx.threefold, ctx.dec3
    assert dec.volume(T, 0) == -6 * u ** 2 - 12 * u + 26
    assert dec.volume(T, 1) == -8 * u ** 3 + 48 * u ** 2 - 96 * u + 64
    assert peff_threshold_u(T, dec) == 2


def test_flipped_negative_part_fails(cases):
    ctx = cases["flag_B_m0"].context
    ch = ctx.dec3.chambers[1]
    comp = ch.N[0]
    flipped = NComponent(comp.name, comp.divisor, 1 - u, comp.ord_along_flag_curve, comp.ord_at_points)
    dec = ThreefoldDecomposition((ctx.dec3.chambers[0], ThreefoldChamber(ch.u_lo, ch.u_hi, ch.P, (flipped,))))
    rep = verify_threefold_decomposition(ctx.threefold, ctx.Y, dec)
    assert not rep.ok
    assert any(c.name.startswith("coefficient of E") and "u=2" in c.detail for c in rep.failures())


def test_plane_decomposition(cases):
    ctx = cases["flag_D"].context
    T, dec = ctx.threefold, ctx.dec3
    assert peff_threshold_u(T, dec) == 2
    at_one = [ch.P.at(1) for ch in dec.chambers]
    assert at_one[0] == at_one[1] == ClassVector([3, -1])


def test_exceptional_threshold(cases):
    ctx = cases["flag_A_n1"].context
    assert peff_threshold_u(ctx.threefold, ctx.dec3) == 1


def test_truncated_decomposition_does_not_vanish(cases):
    ctx = cases["flag_B_m0"].context
    dec = ThreefoldDecomposition(ctx.dec3.chambers[:1])
    with pytest.raises(VolumeNotVanishing):
        peff_threshold_u(ctx.threefold, dec)
