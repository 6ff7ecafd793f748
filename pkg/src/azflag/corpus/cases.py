"""Builders for the bundled corpus.

Each builder returns a JSON-ready dict in the ``azflag/1`` format.  The
parametrized families (the degree ``n`` of the section curve, the contact
order ``m`` of the point with ``E``) are expanded into one dict per value.
Run ``python3 -m azflag.corpus.cases DIR`` to rewrite the files.
"""

from __future__ import annotations

import json
import sys
from fractions import Fraction
from pathlib import Path

from ..exactnum import format_rational as fr


def _threefold() -> dict:
    """Blow-up of P3 along a genus 2 quintic curve on a smooth quadric, in the basis H, E."""
    return {
        "basis": ["H", "E"],
        "triple_form": {"E.E.E": "-22", "E.E.H": "-5", "E.H.H": "0", "H.H.H": "1"},
        "anticanonical": {"H": "4", "E": "-1"},
        "anticanonical_cube": "26",
        "classes": {"Qt": {"H": "2", "E": "-1"}, "St": {"H": "1"}},
        "test_curves": {"l1": {"H": "1", "E": "3"}, "l2": {"H": "1", "E": "2"}, "f": {"E": "-1"}},
    }


def _dec_qt(ord_along: str, ord_at: dict[str, str], restriction: dict[str, str] | None) -> dict:
    """Decomposition of ``-K - uQt``: E splits off once u passes 1."""
    n = {"divisor": "E", "coeff": ["-1", "1"], "ord_along_flag_curve": ord_along}
    if ord_at:
        n["ord_at_points"] = ord_at
    if restriction is not None:
        n["restriction_class"] = restriction
    return {"chambers": [
        {"u": ["0", "1"], "P": {"H": ["4", "-2"], "E": ["-1", "1"]}},
        {"u": ["1", "2"], "P": {"H": ["4", "-2"]}, "N": [n]},
    ]}


def _dec_st(restriction: dict[str, str]) -> dict:
    """Decomposition of ``-K - uSt``: Qt splits off once u passes 1."""
    return {"chambers": [
        {"u": ["0", "1"], "P": {"H": ["4", "-1"], "E": ["-1"]}},
        {"u": ["1", "2"], "P": {"H": ["6", "-3"], "E": ["-2", "1"]},
         "N": [{"divisor": "Qt", "coeff": ["-1", "1"], "ord_along_flag_curve": "0",
                "restriction_class": restriction}]},
    ]}


def _dec_e(restriction: dict[str, str] | None) -> dict:
    """Decomposition of ``-K - uE``: Qt splits off once u passes 1/3."""
    n = {"divisor": "Qt", "coeff": ["-1", "3"], "ord_along_flag_curve": "0"}
    if restriction is not None:
        n["restriction_class"] = restriction
    return {"chambers": [
        {"u": ["0", "1/3"], "P": {"H": ["4"], "E": ["-1", "-1"]}},
        {"u": ["1/3", "1"], "P": {"H": ["6", "-6"], "E": ["-2", "2"]}, "N": [n]},
    ]}


def _base(name, mode, hyp, region=None) -> dict:
    d = {"schema": "azflag/1", "name": name, "mode": mode}
    if region is not None:
        d["region"] = region
    d["hypotheses"] = hyp
    d["threefold"] = _threefold()
    return d


S_E = Fraction(133, 468)
S_QT = Fraction(10, 13)
S_ST = Fraction(57, 104)


def case_a(n: int) -> dict:
    s_v = Fraction(241, 468 * n)
    d = _base(f"flag_A_n{n}", "curve",
              f"Flag E ⊃ Z on the exceptional ruled surface, with Z ~ {n}s + {2 * n}f "
              f"(n = {n}), so that Z·s = 0.")
    d["flag_divisor"] = "E"
    d["threefold_decomposition"] = _dec_e({"s": "1"})
    d["flag_surface"] = {
        "kind": "on_surface",
        "basis": ["s", "f"],
        "pairing": [["-2", "1"], ["1", "0"]],
        "curves": {"Z": {"s": str(n), "f": str(2 * n)}},
        "negative_candidates": ["s"],
        "restriction": {"H": {"f": "5"}, "E": {"s": "-1", "f": "10"}},
        "flag_curve": "Z",
        "log_discrepancy": "1",
    }
    d["expected"] = {"S_X_Y": fr(S_E), "S_V_Z": fr(s_v), "delta_bound": fr(min(1 / s_v, 1 / S_E)),
                     "witness": "curve" if 1 / s_v <= 1 / S_E else "divisor"}
    return d


REGION_INFLECTION = "Qt ∩ E, contact order 3"


def case_b(m: int) -> dict:
    region = {0: "Qt minus E", 1: "Qt ∩ E, contact order 1", 2: "Qt ∩ E, contact order 2",
              3: REGION_INFLECTION}[m]
    d = _base(f"flag_B_m{m}", "point",
              f"p on Qt ≅ P1×P1 and Z the ruling line L1 through p; the line meets E|Qt "
              f"(class (2,3)) with multiplicity {m} at p.", region)
    d["flag_divisor"] = "Qt"
    d["threefold_decomposition"] = _dec_qt("0", {"p": str(m)}, {"L1": "2", "L2": "3"})
    d["flag_surface"] = {
        "kind": "on_surface",
        "basis": ["L1", "L2"],
        "pairing": [["0", "1"], ["1", "0"]],
        "negative_candidates": [],
        "restriction": {"H": {"L1": "1", "L2": "1"}, "E": {"L1": "2", "L2": "3"}},
        "flag_curve": "L1",
        "log_discrepancy": "1",
    }
    d["marked_points"] = [{"name": "p", "different_ord": "0", "local_mults": {}}]
    s_w = Fraction(10 + m, 13)
    s_v = Fraction(12, 13)
    terms = [("point:p", 1 / s_w), ("curve", 1 / s_v), ("divisor", 1 / S_QT)]
    best = min(x for _, x in terms)
    d["expected"] = {
        "S_X_Y": fr(S_QT), "S_V_Z": fr(s_v),
        "points": {"p": {"F_p": fr(Fraction(m, 13)), "S_W_p": fr(s_w)}},
        "delta_bound": fr(best), "witness": next(w for w, x in terms if x == best),
    }
    return d


def case_c() -> dict:
    d = _base("flag_C", "point",
              "p ∈ Qt ∩ E where the ruling line L1 has contact order 3 with E|Qt.  Weighted blow-up "
              "of Qt at p with weights (1,3); G is the exceptional curve, L1h and L2h the strict "
              "transforms of the two ruling lines.  Log discrepancy of G is 4.", REGION_INFLECTION)
    d["flag_divisor"] = "Qt"
    d["threefold_decomposition"] = _dec_qt("3", {"q_Zhat": "1"}, {"G": "9", "L1h": "2", "L2h": "3"})
    third = "1/3"
    d["flag_surface"] = {
        "kind": "pullback",
        "basis": ["G", "L1h", "L2h"],
        "pairing": [["-1/3", "1", third], ["1", "-3", "0"], [third, "0", "-1/3"]],
        "negative_candidates": ["L1h", "L2h"],
        "restriction": {"H": {"G": "4", "L1h": "1", "L2h": "1"}, "E": {"G": "9", "L1h": "2", "L2h": "3"}},
        "flag_curve": "G",
        "log_discrepancy": "4",
    }
    d["marked_points"] = [
        {"name": "q_general", "different_ord": "0", "local_mults": {}},
        {"name": "q_Zhat", "different_ord": "0", "local_mults": {}},
        {"name": "q_L1hat", "different_ord": "0", "local_mults": {"L1h": "1"}},
        {"name": "q_L2hat", "different_ord": "2/3", "local_mults": {"L2h": third}},
    ]
    w = Fraction(217, 936)
    f = {"q_general": Fraction(0), "q_Zhat": Fraction(1, 13), "q_L1hat": Fraction(647, 936),
         "q_L2hat": Fraction(23, 936)}
    d["expected"] = {
        "S_X_Y": fr(S_QT), "S_V_Z": fr(Fraction(49, 13)),
        "points": {k: {"F_p": fr(v), "S_W_p": fr(w + v)} for k, v in f.items()},
        "delta_bound": "52/49", "witness": "curve",
    }
    return d


def _lines(idx, skip=()) -> dict:
    out = {}
    for a in range(len(idx)):
        for b in range(a + 1, len(idx)):
            i, j = idx[a], idx[b]
            if (i, j) in skip:
                continue
            out[f"L{i}{j}"] = {"h": "1", f"e{i}": "-1", f"e{j}": "-1"}
    return out


def case_d() -> dict:
    d = _base("flag_D", "point",
              "p off E and Qt, on a 2-secant line of the curve.  St is the strict transform of a plane "
              "through p and the secant, i.e. P2 blown up in five points e1..e5; Z is the line L12.", "St minus (E ∪ Qt), on a secant")
    d["flag_divisor"] = "St"
    es = [f"e{i}" for i in range(1, 6)]
    d["threefold_decomposition"] = _dec_st({"h": "2", **{e: "-1" for e in es}})
    curves = _lines([1, 2, 3, 4, 5])
    curves["C0"] = {"h": "2", **{e: "-1" for e in es}}
    basis = ["h"] + es
    pairing = [["1" if i == j == 0 else ("-1" if i == j else "0") for j in range(6)] for i in range(6)]
    d["flag_surface"] = {
        "kind": "on_surface",
        "basis": basis,
        "pairing": pairing,
        "curves": curves,
        "negative_candidates": es + [c for c in curves if c != "L12"],
        "restriction": {"H": {"h": "1"}, "E": {e: "1" for e in es}},
        "flag_curve": "L12",
        "log_discrepancy": "1",
    }
    d["marked_points"] = [
        {"name": "p_general", "different_ord": "0", "local_mults": {}},
        {"name": "p_on_L34", "different_ord": "0", "local_mults": {"L34": "1"}},
    ]
    d["expected"] = _expected_st()
    return d


def case_e() -> dict:
    d = _base("flag_E", "point",
              "p on St, off E and Qt, on no secant line.  St is singular; its minimal resolution is "
              "modelled by the lattice h, e1..e4 with e1^2 = -1/2 and the line through p is the "
              "tangent line Lt = h - 2e1.", "St minus (E ∪ Qt), no secant")
    d["flag_divisor"] = "St"
    es = [f"e{i}" for i in range(1, 5)]
    d["threefold_decomposition"] = _dec_st({"h": "2", "e1": "-2", "e2": "-1", "e3": "-1", "e4": "-1"})
    curves = {"Lt": {"h": "1", "e1": "-2"}}
    curves.update(_lines([2, 3, 4]))
    curves.update({f"L1{j}": {"h": "1", "e1": "-1", f"e{j}": "-1"} for j in (2, 3, 4)})
    curves["C0"] = {"h": "2", "e1": "-2", "e2": "-1", "e3": "-1", "e4": "-1"}
    diag = ["1", "-1/2", "-1", "-1", "-1"]
    d["flag_surface"] = {
        "kind": "on_surface",
        "basis": ["h"] + es,
        "pairing": [[diag[i] if i == j else "0" for j in range(5)] for i in range(5)],
        "curves": curves,
        "negative_candidates": es + [c for c in curves if c != "Lt"],
        "restriction": {"H": {"h": "1"}, "E": {"e1": "2", "e2": "1", "e3": "1", "e4": "1"}},
        "flag_curve": "Lt",
        "log_discrepancy": "1",
    }
    d["marked_points"] = [
        {"name": "p_general", "different_ord": "0", "local_mults": {}},
        {"name": "p_on_L23", "different_ord": "0", "local_mults": {"L23": "1"}},
    ]
    d["expected"] = _expected_st()
    d["expected"]["points"] = {"p_general": d["expected"]["points"]["p_general"],
                               "p_on_L23": d["expected"]["points"]["p_on_L34"]}
    d["expected"]["witness"] = "point:p_on_L23"
    return d


def _expected_st() -> dict:
    return {
        "S_X_Y": fr(S_ST), "S_V_Z": "183/208",
        "points": {"p_general": {"F_p": "0", "S_W_p": "25/26"},
                   "p_on_L34": {"F_p": "5/208", "S_W_p": "205/208"}},
        "delta_bound": "208/205", "witness": "point:p_on_L34",
    }


def case_f() -> dict:
    d = _base("flag_F", "divisor", "Divisor-only term for the exceptional divisor E.")
    d["flag_divisor"] = "E"
    d["threefold_decomposition"] = _dec_e(None)
    d["expected"] = {"S_X_Y": fr(S_E), "delta_bound": fr(1 / S_E), "witness": "divisor"}
    return d


def all_cases() -> list[dict]:
    return ([case_a(n) for n in (1, 2, 3)] + [case_b(m) for m in range(4)]
            + [case_c(), case_d(), case_e(), case_f()])


def write_all(directory) -> list[Path]:
    out = Path(directory)
    out.mkdir(parents=True, exist_ok=True)
    paths = []
    for d in all_cases():
        p = out / f"{d['name']}.json"
        p.write_text(json.dumps(d, indent=2, ensure_ascii=False) + "\n", encoding="utf-8")
        paths.append(p)
    return paths


if __name__ == "__main__":  # pragma: no cover
    for p in write_all(sys.argv[1] if len(sys.argv) > 1 else Path(__file__).parent / "data"):
        print(p)
