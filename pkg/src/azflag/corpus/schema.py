"""The ``azflag/1`` flag-case file format: loading, validation, serialization.

A file is UTF-8 JSON.  Every number is a rational string (``"10/13"``,
``"-5"``); univariate polynomials in u are arrays ``[c0, c1, ...]``; the
triple form is keyed by alphabetically sorted basis names joined with ``.``.
Unknown keys are rejected everywhere.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Any

from ..azpipe import ON_SURFACE, PULLBACK, FlagContext, MarkedPoint
from ..errors import ParseError, ValidationError
from ..exactnum import ParamPoly, as_rational, format_rational
from ..lattices import ClassVector, RestrictionMap, SurfaceLattice, ThreefoldData
from ..zariski import NComponent, ThreefoldChamber, ThreefoldDecomposition

SCHEMA = "azflag/1"
MODES = ("point", "curve", "divisor")


@dataclass
class Expected:
    S_X_Y: Fraction | None = None
    S_V_Z: Fraction | None = None
    points: dict[str, dict[str, Fraction]] = field(default_factory=dict)
    delta_bound: Fraction | None = None
    witness: str | None = None

    def is_empty(self) -> bool:
        return not (self.S_X_Y is not None or self.S_V_Z is not None or self.points
                    or self.delta_bound is not None or self.witness is not None)


@dataclass
class FlagCase:
    name: str
    mode: str
    context: FlagContext
    points: list[MarkedPoint]
    expected: Expected
    hypotheses: str = ""
    region: str | None = None

    # the threefold-level names are needed to write the file back out
    divisor_names: dict[str, ClassVector] = field(default_factory=dict)
    flag_divisor_name: str | None = None

    def __eq__(self, other):
        if not isinstance(other, FlagCase):
            return NotImplemented
        return dump_case(self) == dump_case(other)


# ---------------------------------------------------------------------------
# validation helpers


def _obj(d: Any, path: str, required: tuple[str, ...], optional: tuple[str, ...] = ()) -> dict:
    if not isinstance(d, dict):
        raise ValidationError(path, "expected an object")
    missing = [k for k in required if k not in d]
    if missing:
        raise ValidationError(path, f"missing field(s) {missing}")
    unknown = sorted(set(d) - set(required) - set(optional))
    if unknown:
        raise ValidationError(path, f"unknown field(s) {unknown}")
    return d


def _list(d: Any, path: str) -> list:
    if not isinstance(d, list):
        raise ValidationError(path, "expected an array")
    return d


def _str(d: Any, path: str) -> str:
    if not isinstance(d, str):
        raise ValidationError(path, "expected a string")
    return d


def _rat(d: Any, path: str) -> Fraction:
    if not isinstance(d, str):
        raise ValidationError(path, f"expected a rational string, got {type(d).__name__}")
    try:
        return as_rational(d)
    except (ValueError, ZeroDivisionError):
        raise ValidationError(path, f"not a rational: {d!r}") from None


def _upoly(d: Any, path: str) -> ParamPoly:
    return ParamPoly.from_u_coeffs([_rat(c, f"{path}[{i}]") for i, c in enumerate(_list(d, path))])


def _names(d: Any, path: str) -> list[str]:
    names = [_str(x, f"{path}[{i}]") for i, x in enumerate(_list(d, path))]
    if len(set(names)) != len(names):
        raise ValidationError(path, "duplicate names")
    return names


def _class(d: Any, basis: list[str], path: str, poly: bool = False) -> ClassVector:
    if not isinstance(d, dict):
        raise ValidationError(path, "expected a map from basis names to coefficients")
    unknown = sorted(set(d) - set(basis))
    if unknown:
        raise ValidationError(path, f"unknown basis name(s) {unknown}")
    conv = _upoly if poly else _rat
    zero = ParamPoly() if poly else Fraction(0)
    return ClassVector([conv(d[b], f"{path}.{b}") if b in d else zero for b in basis])


# ---------------------------------------------------------------------------
# loading


def load_flag(path) -> FlagCase:
    """Read and fully validate a flag-case file."""
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ParseError(f"{path}: {exc.strerror or exc}") from None
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"{path}: invalid JSON: {exc}") from None
    return parse_case(data)


def parse_case(data: Any) -> FlagCase:
    top = _obj(data, "", ("schema", "name", "mode", "threefold", "flag_divisor", "threefold_decomposition"),
               ("flag_surface", "marked_points", "expected", "hypotheses", "region"))
    if top["schema"] != SCHEMA:
        raise ValidationError("schema", f"expected {SCHEMA!r}, got {top['schema']!r}")
    name = _str(top["name"], "name")
    mode = _str(top["mode"], "mode")
    if mode not in MODES:
        raise ValidationError("mode", f"must be one of {MODES}")

    T, divisor_names = _parse_threefold(top["threefold"], "threefold")
    fd = top["flag_divisor"]
    if isinstance(fd, str):
        if fd not in divisor_names:
            raise ValidationError("flag_divisor", f"unknown divisor {fd!r}")
        Y, fd_name = divisor_names[fd], fd
    else:
        Y, fd_name = _class(fd, list(T.basis), "flag_divisor"), None

    points_raw = _list(top.get("marked_points", []), "marked_points")
    point_names = []
    for i, p in enumerate(points_raw):
        point_names.append(_str(_obj(p, f"marked_points[{i}]", ("name",), ("different_ord", "local_mults"))["name"],
                                f"marked_points[{i}].name"))
    if len(set(point_names)) != len(point_names):
        raise ValidationError("marked_points", "duplicate point names")

    dec3 = _parse_decomposition(top["threefold_decomposition"], T, divisor_names, point_names,
                                "threefold_decomposition")

    surface = restriction = None
    Z = None
    lam = Fraction(1)
    kind = ON_SURFACE
    if mode == "divisor":
        if "flag_surface" in top:
            raise ValidationError("flag_surface", "not allowed in divisor mode")
        if points_raw:
            raise ValidationError("marked_points", "not allowed in divisor mode")
    else:
        if "flag_surface" not in top:
            raise ValidationError("flag_surface", f"required in {mode} mode")
        surface, restriction, Z, lam, kind = _parse_surface(top["flag_surface"], T, "flag_surface")
        if mode == "curve" and points_raw:
            raise ValidationError("marked_points", "not allowed in curve mode")
        # restriction classes of N components live on the flag surface
        dec3 = _attach_restrictions(top["threefold_decomposition"], dec3, surface, "threefold_decomposition")

    points = []
    for i, p in enumerate(points_raw):
        path = f"marked_points[{i}]"
        mults_raw = p.get("local_mults", {})
        if not isinstance(mults_raw, dict):
            raise ValidationError(f"{path}.local_mults", "expected an object")
        for c in mults_raw:
            if surface is None or c not in surface.negative_candidates:
                raise ValidationError(f"{path}.local_mults.{c}", "not a negative-part candidate of the flag surface")
        mults = {c: _rat(v, f"{path}.local_mults.{c}") for c, v in mults_raw.items()}
        try:
            points.append(MarkedPoint(p["name"], _rat(p.get("different_ord", "0"), f"{path}.different_ord"), mults))
        except ValueError as exc:
            raise ValidationError(path, str(exc)) from None

    try:
        ctx = FlagContext(T, Y, dec3, surface, restriction, Z, lam, kind)
    except (ValueError, KeyError) as exc:
        raise ValidationError("flag_surface", str(exc)) from None

    expected = _parse_expected(top.get("expected", {}), point_names, "expected")
    hyp = _str(top.get("hypotheses", ""), "hypotheses")
    region = top.get("region")
    if region is not None:
        region = _str(region, "region")
    return FlagCase(name, mode, ctx, points, expected, hyp, region, divisor_names, fd_name)


def _parse_threefold(d, path):
    d = _obj(d, path, ("basis", "triple_form", "anticanonical"), ("anticanonical_cube", "classes", "test_curves"))
    basis = _names(d["basis"], f"{path}.basis")
    tf_raw = d["triple_form"]
    if not isinstance(tf_raw, dict):
        raise ValidationError(f"{path}.triple_form", "expected an object")
    tf = {}
    for key, val in tf_raw.items():
        kp = f"{path}.triple_form.{key}"
        parts = key.split(".")
        if len(parts) != 3:
            raise ValidationError(kp, "key must name three basis divisors")
        for p in parts:
            if p not in basis:
                raise ValidationError(kp, f"unknown basis name {p!r}")
        if parts != sorted(parts):
            raise ValidationError(kp, "names must be sorted")
        tf[tuple(sorted(basis.index(p) for p in parts))] = _rat(val, kp)
    anti = _class(d["anticanonical"], basis, f"{path}.anticanonical")
    classes = {}
    for cname, cval in (d.get("classes") or {}).items():
        if cname in basis:
            raise ValidationError(f"{path}.classes.{cname}", "shadows a basis name")
        classes[cname] = _class(cval, basis, f"{path}.classes.{cname}")
    curves = {}
    for cname, cval in (d.get("test_curves") or {}).items():
        curves[cname] = tuple(_class(cval, basis, f"{path}.test_curves.{cname}").coeffs)
    cube = _rat(d["anticanonical_cube"], f"{path}.anticanonical_cube") if "anticanonical_cube" in d else None
    try:
        T = ThreefoldData(tuple(basis), tf, anti, curves, classes, cube)
    except ValueError as exc:
        raise ValidationError(path, str(exc)) from None
    names = {b: ClassVector.basis_vector(len(basis), i) for i, b in enumerate(basis)}
    names.update(classes)
    return T, names


def _parse_decomposition(d, T, divisor_names, point_names, path):
    d = _obj(d, path, ("chambers",))
    chambers = []
    for i, ch in enumerate(_list(d["chambers"], f"{path}.chambers")):
        cp = f"{path}.chambers[{i}]"
        ch = _obj(ch, cp, ("u", "P"), ("N",))
        u = _list(ch["u"], f"{cp}.u")
        if len(u) != 2:
            raise ValidationError(f"{cp}.u", "expected [u_lo, u_hi]")
        u_lo, u_hi = _rat(u[0], f"{cp}.u[0]"), _rat(u[1], f"{cp}.u[1]")
        P = _class(ch["P"], list(T.basis), f"{cp}.P", poly=True)
        comps = []
        for j, c in enumerate(_list(ch.get("N", []), f"{cp}.N")):
            np_ = f"{cp}.N[{j}]"
            c = _obj(c, np_, ("divisor", "coeff"), ("ord_along_flag_curve", "ord_at_points", "restriction_class"))
            dname = _str(c["divisor"], f"{np_}.divisor")
            if dname not in divisor_names:
                raise ValidationError(f"{np_}.divisor", f"unknown divisor {dname!r}")
            ords_raw = c.get("ord_at_points", {})
            if not isinstance(ords_raw, dict):
                raise ValidationError(f"{np_}.ord_at_points", "expected an object")
            for pn in ords_raw:
                if pn not in point_names:
                    raise ValidationError(f"{np_}.ord_at_points.{pn}", "unknown marked point")
            ords = {pn: _rat(v, f"{np_}.ord_at_points.{pn}") for pn, v in ords_raw.items()}
            comps.append(NComponent(dname, divisor_names[dname], _upoly(c["coeff"], f"{np_}.coeff"),
                                    _rat(c.get("ord_along_flag_curve", "0"), f"{np_}.ord_along_flag_curve"), ords))
        chambers.append(ThreefoldChamber(u_lo, u_hi, P, tuple(comps)))
    if not chambers:
        raise ValidationError(f"{path}.chambers", "at least one chamber required")
    return ThreefoldDecomposition(tuple(chambers))


def _attach_restrictions(raw, dec3, surface, path):
    chambers = []
    for i, (ch_raw, ch) in enumerate(zip(raw["chambers"], dec3.chambers)):
        comps = []
        for j, (c_raw, comp) in enumerate(zip(ch_raw.get("N", []), ch.N)):
            rc = None
            if "restriction_class" in c_raw:
                rc = _class(c_raw["restriction_class"], list(surface.basis),
                            f"{path}.chambers[{i}].N[{j}].restriction_class")
            comps.append(NComponent(comp.name, comp.divisor, comp.coeff, comp.ord_along_flag_curve,
                                    comp.ord_at_points, rc))
        chambers.append(ThreefoldChamber(ch.u_lo, ch.u_hi, ch.P, tuple(comps)))
    return ThreefoldDecomposition(tuple(chambers))


def _parse_surface(d, T, path):
    d = _obj(d, path, ("kind", "basis", "pairing", "restriction", "flag_curve"),
             ("curves", "negative_candidates", "log_discrepancy"))
    kind = _str(d["kind"], f"{path}.kind")
    if kind not in (ON_SURFACE, PULLBACK):
        raise ValidationError(f"{path}.kind", f"must be {ON_SURFACE!r} or {PULLBACK!r}")
    basis = _names(d["basis"], f"{path}.basis")
    rows = _list(d["pairing"], f"{path}.pairing")
    if len(rows) != len(basis):
        raise ValidationError(f"{path}.pairing", f"expected {len(basis)} rows for the basis, got {len(rows)}")
    M = []
    for i, row in enumerate(rows):
        row = _list(row, f"{path}.pairing[{i}]")
        if len(row) != len(basis):
            raise ValidationError(f"{path}.pairing[{i}]", f"expected {len(basis)} entries, got {len(row)}")
        M.append([_rat(x, f"{path}.pairing[{i}][{j}]") for j, x in enumerate(row)])
    for i in range(len(M)):
        for j in range(i):
            if M[i][j] != M[j][i]:
                raise ValidationError(f"{path}.pairing", f"asymmetric at ({basis[i]}, {basis[j]})")
    curves = {}
    for cname, cval in (d.get("curves") or {}).items():
        if cname in basis:
            raise ValidationError(f"{path}.curves.{cname}", "shadows a basis name")
        curves[cname] = _class(cval, basis, f"{path}.curves.{cname}")
    cands = _names(d.get("negative_candidates", []), f"{path}.negative_candidates")
    for c in cands:
        if c not in basis and c not in curves:
            raise ValidationError(f"{path}.negative_candidates", f"unknown curve {c!r}")
    L = SurfaceLattice(tuple(basis), M, tuple(cands), curves)
    r = _obj(d["restriction"], f"{path}.restriction", tuple(T.basis))
    images = [_class(r[b], basis, f"{path}.restriction.{b}") for b in T.basis]
    Z = _str(d["flag_curve"], f"{path}.flag_curve")
    if Z not in basis and Z not in curves:
        raise ValidationError(f"{path}.flag_curve", f"unknown curve {Z!r}")
    lam = _rat(d.get("log_discrepancy", "1"), f"{path}.log_discrepancy")
    return L, RestrictionMap(tuple(images)), Z, lam, kind


def _parse_expected(d, point_names, path):
    d = _obj(d, path, (), ("S_X_Y", "S_V_Z", "points", "delta_bound", "witness"))
    e = Expected()
    if "S_X_Y" in d:
        e.S_X_Y = _rat(d["S_X_Y"], f"{path}.S_X_Y")
    if "S_V_Z" in d:
        e.S_V_Z = _rat(d["S_V_Z"], f"{path}.S_V_Z")
    if "delta_bound" in d:
        e.delta_bound = _rat(d["delta_bound"], f"{path}.delta_bound")
    if "witness" in d:
        e.witness = _str(d["witness"], f"{path}.witness")
    pts = d.get("points", {})
    if not isinstance(pts, dict):
        raise ValidationError(f"{path}.points", "expected an object")
    for pn, vals in pts.items():
        if pn not in point_names:
            raise ValidationError(f"{path}.points.{pn}", "unknown marked point")
        vals = _obj(vals, f"{path}.points.{pn}", (), ("F_p", "S_W_p", "quotient"))
        e.points[pn] = {k: _rat(v, f"{path}.points.{pn}.{k}") for k, v in vals.items()}
    return e


# ---------------------------------------------------------------------------
# serialization


def _class_json(c: ClassVector, basis) -> dict:
    return {b: format_rational(x) for b, x in zip(basis, c.coeffs) if x != 0}


def _upoly_json(p: ParamPoly) -> list[str]:
    return [format_rational(c) for c in p.u_coeffs()] or ["0"]


def dump_case(case: FlagCase) -> dict:
    """Canonical JSON-ready dict for a case; ``parse_case`` inverts it."""
    ctx = case.context
    T = ctx.threefold
    basis = list(T.basis)
    tf = {}
    for (i, j, k), val in sorted(T.triple_form.items()):
        key = ".".join(sorted((basis[i], basis[j], basis[k])))
        tf[key] = format_rational(val)
    three: dict[str, Any] = {
        "basis": basis,
        "triple_form": dict(sorted(tf.items())),
        "anticanonical": _class_json(T.anticanonical, basis),
    }
    if T.anticanonical_cube is not None:
        three["anticanonical_cube"] = format_rational(T.anticanonical_cube)
    if T.classes:
        three["classes"] = {n: _class_json(c, basis) for n, c in T.classes.items()}
    if T.test_curves:
        three["test_curves"] = {n: _class_json(ClassVector(v), basis) for n, v in T.test_curves.items()}

    def div_name(comp):
        return comp.name

    chambers = []
    for ch in ctx.dec3.chambers:
        entry: dict[str, Any] = {
            "u": [format_rational(ch.u_lo), format_rational(ch.u_hi)],
            "P": {b: _upoly_json(p) for b, p in zip(basis, ch.P.as_polys().coeffs) if not p.is_zero()},
        }
        if ch.N:
            comps = []
            for comp in ch.N:
                c: dict[str, Any] = {"divisor": div_name(comp), "coeff": _upoly_json(comp.coeff)}
                c["ord_along_flag_curve"] = format_rational(comp.ord_along_flag_curve)
                if comp.ord_at_points:
                    c["ord_at_points"] = {k: format_rational(v) for k, v in comp.ord_at_points.items()}
                if comp.restriction is not None:
                    c["restriction_class"] = _class_json(comp.restriction, ctx.surface.basis)
                comps.append(c)
            entry["N"] = comps
        chambers.append(entry)

    out: dict[str, Any] = {"schema": SCHEMA, "name": case.name, "mode": case.mode}
    if case.region is not None:
        out["region"] = case.region
    if case.hypotheses:
        out["hypotheses"] = case.hypotheses
    out["threefold"] = three
    out["flag_divisor"] = case.flag_divisor_name or _class_json(ctx.Y, basis)
    out["threefold_decomposition"] = {"chambers": chambers}
    if ctx.has_curve:
        L = ctx.surface
        sb = list(L.basis)
        surf: dict[str, Any] = {
            "kind": ctx.mode,
            "basis": sb,
            "pairing": [[format_rational(x) for x in row] for row in L.pairing],
        }
        if L.curves:
            surf["curves"] = {n: _class_json(c, sb) for n, c in L.curves.items()}
        surf["negative_candidates"] = list(L.negative_candidates)
        surf["restriction"] = {b: _class_json(im, sb) for b, im in zip(basis, ctx.restriction.images)}
        surf["flag_curve"] = ctx.Z
        surf["log_discrepancy"] = format_rational(ctx.log_discrepancy)
        out["flag_surface"] = surf
    if case.points:
        out["marked_points"] = [
            {"name": p.name, "different_ord": format_rational(p.different_ord),
             "local_mults": {k: format_rational(v) for k, v in p.local_mults.items()}}
            for p in case.points
        ]
    e = case.expected
    if not e.is_empty():
        ex: dict[str, Any] = {}
        if e.S_X_Y is not None:
            ex["S_X_Y"] = format_rational(e.S_X_Y)
        if e.S_V_Z is not None:
            ex["S_V_Z"] = format_rational(e.S_V_Z)
        if e.points:
            ex["points"] = {pn: {k: format_rational(v) for k, v in vals.items()} for pn, vals in e.points.items()}
        if e.delta_bound is not None:
            ex["delta_bound"] = format_rational(e.delta_bound)
        if e.witness is not None:
            ex["witness"] = e.witness
        out["expected"] = ex
    return out


def dumps_case(case_or_dict) -> str:
    d = dump_case(case_or_dict) if isinstance(case_or_dict, FlagCase) else case_or_dict
    return json.dumps(d, indent=2, ensure_ascii=False) + "\n"
