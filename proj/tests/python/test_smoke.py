import os
from pathlib import Path

import pytest

import owhile

CORPUS = Path(os.environ.get("OWHILE_CORPUS_DIR", Path(__file__).resolve().parents[2] / "corpus"))

COPY = "x = true; y = x"
BRANCH = "x = {}; x.f = {}; if false then { y = x.f } else { y = {} }"


def test_parse_round_trip():
    text = owhile.parse("x = true;   y = x")
    assert text == "x = true; y = x"
    assert owhile.parse(text) == text


def test_parse_error_is_a_value_error():
    with pytest.raises(owhile.ParseError):
        owhile.parse("x = ")
    with pytest.raises(ValueError):
        owhile.parse("x = ")


def test_run_branch_program():
    r = owhile.run(BRANCH)
    assert r["status"] == "ok"
    assert r["env"] == {"x": "l0", "y": "l2"}
    assert r["heap"] == {"l0": {"f": "l1"}, "l1": {}, "l2": {}}
    assert r["error"] is None


def test_run_error_and_fuel():
    r = owhile.run((CORPUS / "err_del_absent.ow").read_text())
    assert r["status"] == "err"
    assert r["error"] == ("Del", "field absent")
    assert r["env"] == {"x": "l0"}
    assert owhile.run("while true do { skip }", fuel=100)["status"] == "exhausted"


def test_trace_and_flows():
    atoms = owhile.trace(COPY)
    assert len(atoms) == 16
    assert atoms[:3] == ["i:Seq", "i:Asg", "i:Cst"]
    assert owhile.flows(COPY, pp=True) == [("x@Seq1", "y@Seq2")]
    assert owhile.trace("while true do { skip }", fuel=10) is None


def test_analyze_branch_program():
    r = owhile.analyze(BRANCH)
    assert r["env"]["x"] == {"locs": ["Seq1/AsgE/Obj"], "deps": []}
    assert r["env"]["y"]["locs"] == ["Seq2/Seq1/FldAsg2/Obj", "Seq2/Seq2/If2/AsgE/Obj"]
    assert r["heap"][("Seq1/AsgE/Obj", "f")]["locs"] == ["Seq2/Seq1/FldAsg2/Obj"]
    assert ("obj@Seq1/AsgE/Obj", "x@Seq1") in r["flows"]
    assert len(r["flows"]) == 6


def test_checks_pass_on_generated_programs():
    for seed in range(20):
        text = owhile.generate(seed)
        assert owhile.generate(seed) == text
        reports = owhile.check(text, fuel=10_000, name=f"seed {seed}")
        assert [r["check"] for r in reports] == ["prop1", "prop2", "prop3", "prop4", "soundness"]
        assert all(r["status"] != "fail" for r in reports), reports
