import copy
import json
from fractions import Fraction as F

import pytest

from azflag.corpus import (
    bundled_dir,
    case_files,
    compare_oracle,
    corpus_dir,
    dump_case,
    load_flag,
    numeric_oracle,
    parse_case,
    regional_summary,
    resolve_case,
    run_case,
    run_path,
)
from azflag.corpus.cases import all_cases
from azflag.azpipe import delta_bound
from azflag.errors import ParseError, ValidationError


def _raw(name):
    return json.loads((bundled_dir() / f"{name}.json").read_text(encoding="utf-8"))


def _write(tmp_path, data, name="case.json"):
    p = tmp_path / name
    p.write_text(json.dumps(data), encoding="utf-8")
    return p


def test_load_quadric_case():
    c = load_flag(bundled_dir() / "flag_B_m0.json")
    assert c.context.threefold.basis == ("H", "E")
    assert c.context.surface.basis == ("L1", "L2")
    assert c.context.Z == "L1" and c.mode == "point"


def test_bundled_files_match_generator():
    on_disk = {p.stem: json.loads(p.read_text(encoding="utf-8")) for p in case_files(bundled_dir())}
    generated = {d["name"]: d for d in all_cases()}
    assert on_disk == generated


def test_round_trip(cases):
    for name, case in cases.items():
        d = dump_case(case)
        again = parse_case(json.loads(json.dumps(d)))
        assert again == case, name
        assert dump_case(again) == d


def _expect_invalid(tmp_path, data, path_part):
    with pytest.raises(ValidationError) as exc:
        load_flag(_write(tmp_path, data))
    assert path_part in exc.value.path, exc.value.path
    return exc.value


def test_rejects_asymmetric_pairing(tmp_path):
    d = _raw("flag_B_m0")
    d["flag_surface"]["pairing"] = [["0", "1"], ["2", "0"]]
    _expect_invalid(tmp_path, d, "flag_surface.pairing")


def test_rejects_unknown_local_mult_curve(tmp_path):
    d = _raw("flag_D")
    d["marked_points"][1]["local_mults"] = {"L99": "1"}
    _expect_invalid(tmp_path, d, "marked_points[1].local_mults.L99")


def test_rejects_rank_mismatch(tmp_path):
    d = _raw("flag_C")
    d["flag_surface"]["pairing"] = d["flag_surface"]["pairing"][:2]
    _expect_invalid(tmp_path, d, "flag_surface.pairing")
    d = _raw("flag_C")
    d["flag_surface"]["pairing"][1] = ["1", "-3"]
    _expect_invalid(tmp_path, d, "flag_surface.pairing[1]")


@pytest.mark.parametrize("bad", [0.5, 3, "abc", "1/0", None])
def test_rejects_non_rational(tmp_path, bad):
    d = _raw("flag_B_m0")
    d["threefold"]["triple_form"]["E.E.E"] = bad
    _expect_invalid(tmp_path, d, "threefold.triple_form.E.E.E")


def test_rejects_unknown_names_and_fields(tmp_path):
    d = _raw("flag_B_m0")
    d["colour"] = "blue"
    _expect_invalid(tmp_path, d, "")
    d = _raw("flag_B_m0")
    d["flag_surface"]["restriction"]["H"]["L3"] = "1"
    _expect_invalid(tmp_path, d, "flag_surface.restriction.H")
    d = _raw("flag_B_m0")
    d["flag_divisor"] = "Q"
    _expect_invalid(tmp_path, d, "flag_divisor")
    d = _raw("flag_B_m0")
    d["threefold"]["triple_form"] = {"H.E.E": "-5"}
    _expect_invalid(tmp_path, d, "threefold.triple_form.H.E.E")
    d = _raw("flag_D")
    d["flag_surface"]["flag_curve"] = "L99"
    _expect_invalid(tmp_path, d, "flag_surface.flag_curve")
    d = _raw("flag_B_m0")
    d["expected"]["points"]["q"] = {"F_p": "0"}
    _expect_invalid(tmp_path, d, "expected.points.q")
    d = _raw("flag_B_m0")
    d["threefold_decomposition"]["chambers"][1]["N"][0]["ord_at_points"] = {"q": "1"}
    _expect_invalid(tmp_path, d, "threefold_decomposition.chambers[1].N[0].ord_at_points.q")


def test_rejects_schema_and_mode_errors(tmp_path):
    d = _raw("flag_B_m0")
    d["schema"] = "azflag/2"
    _expect_invalid(tmp_path, d, "schema")
    d = _raw("flag_F")
    d["mode"] = "point"
    _expect_invalid(tmp_path, d, "flag_surface")
    d = _raw("flag_B_m0")
    del d["threefold"]
    _expect_invalid(tmp_path, d, "")
    d = _raw("flag_B_m0")
    d["marked_points"][0]["different_ord"] = "1"
    _expect_invalid(tmp_path, d, "marked_points[0]")


def test_parse_errors(tmp_path):
    p = tmp_path / "broken.json"
    p.write_text("{not json", encoding="utf-8")
    with pytest.raises(ParseError):
        load_flag(p)
    with pytest.raises(ParseError):
        load_flag(tmp_path / "missing.json")


def test_run_case_examples(cases):
    r = run_case(cases["flag_B_m3"])
    assert r.passed and r.report.delta_bound == 1
    r = run_case(cases["flag_C"])
    assert r.passed and r.report.delta_bound == F(52, 49)
    r = run_case(cases["flag_A_n2"])
    assert r.passed and 1 / r.report.S_V_Z == F(936, 241)


def test_every_case_passes(cases):
    for name, case in cases.items():
        r = run_case(case)
        assert r.passed, (name, r.failures())
        assert r.comparisons and all(c.ok for c in r.comparisons)


def test_run_case_reports_mismatch(tmp_path):
    d = _raw("flag_D")
    d["expected"]["S_V_Z"] = "184/208"
    r = run_path(_write(tmp_path, d))
    assert not r.passed
    assert any("S_V_Z" in msg for msg in r.failures())


def test_run_case_turns_errors_into_failures(tmp_path):
    d = _raw("flag_B_m0")
    d["threefold_decomposition"]["chambers"][1]["P"]["E"] = ["1"]
    r = run_path(_write(tmp_path, d))
    assert not r.passed and r.report is None
    assert r.verification is not None and not r.verification.ok
    d = _raw("flag_C")
    d["flag_surface"]["negative_candidates"] = ["L2h"]  # L1h missing: the sweep cannot finish
    r = run_path(_write(tmp_path, d))
    assert not r.passed
    r = run_path(tmp_path / "nope.json")
    assert not r.passed and r.error.startswith("ParseError")


def test_regional_summary(cases):
    reports = [run_case(c) for c in cases.values()]
    summary, regions = regional_summary(reports)
    assert summary == F(208, 205)
    by_region = {x.region: x for x in regions}
    infl = next(x for x in regions if "contact order 3" in x.region)
    assert infl.bound == F(52, 49) and sorted(infl.cases) == ["flag_B_m3", "flag_C"]
    assert sorted(x.bound for x in regions) == [F(208, 205), F(208, 205), F(52, 49)] + [F(13, 12)] * 3
    assert len(by_region) == 6


def test_oracle_examples(cases):
    o = numeric_oracle(cases["flag_B_m0"], 400)
    assert abs(o.S_V_Z - 12 / 13) <= 1e-5 * 12 / 13
    o = numeric_oracle(cases["flag_D"], 400)
    assert abs(o.S_X_Y - 57 / 104) <= 1e-5 * 57 / 104
    assert o.points["p_general"][0] == 0.0
    o = numeric_oracle(cases["flag_F"], 50)
    assert o.S_V_Z is None and o.points == {}
    with pytest.raises(ValueError):
        numeric_oracle(cases["flag_F"], 0)


def test_oracle_error_shrinks_with_grid(cases):
    for name in ("flag_C", "flag_D"):
        c = cases[name]
        exact = delta_bound(c.context, c.points)
        coarse = compare_oracle(exact, numeric_oracle(c, 100))
        fine = compare_oracle(exact, numeric_oracle(c, 200))
        for a, b in zip(coarse, fine):
            if a.gating and a.abs_error > 1e-12:
                assert a.abs_error / b.abs_error >= 1.8, (name, a.quantity)


def test_corpus_location(monkeypatch, tmp_path):
    monkeypatch.delenv("AZFLAG_CORPUS_DIR", raising=False)
    assert corpus_dir() == bundled_dir()
    monkeypatch.setenv("AZFLAG_CORPUS_DIR", str(tmp_path))
    assert corpus_dir() == tmp_path
    assert resolve_case("flag_D", bundled_dir()) == bundled_dir() / "flag_D.json"
    assert resolve_case(str(bundled_dir() / "flag_C.json")) == bundled_dir() / "flag_C.json"
