import json

import numpy as np
import pytest

from sasakilift.report import (SCHEMA_VERSION, VerificationReport, emit_report, parse_report,
                               strip_timestamps)


def test_empty_report():
    d = json.loads(emit_report(VerificationReport()))
    assert d["schema"] == SCHEMA_VERSION and d["entries"] == [] and d["summary"]["total"] == 0


def test_single_entry():
    r = VerificationReport()
    r.add("x.y", "a = b", 1e-12, 1e-8, 3)
    d = json.loads(emit_report(r))
    assert d["entries"][0]["pass"] is True
    assert d["summary"] == {"total": 1, "passed": 1, "failed": 0}


def test_pass_is_strict_and_nan_fails():
    r = VerificationReport()
    assert not r.add("eq", "a", 1e-8, 1e-8).passed
    assert not r.add("nan", "a", np.nan, 1.0).passed
    assert not r.add("inf", "a", np.inf, 1.0).passed
    assert r.summary == {"total": 3, "passed": 0, "failed": 3}


def test_anchor_required():
    with pytest.raises(ValueError):
        VerificationReport().add("x", "", 0.0, 1.0)


def test_round_trip():
    r = VerificationReport(meta={"manifold": "flat(n=1)", "seed": 3})
    r.add("a", "g = h", 0.1 + 0.2, 1.0, 5, value=1 / 3)
    r.add("b", "plumbing", np.inf, 1.0)
    r.add_finding("f", "text", fitted=[1.0, 0.5], winner="slot_derived")
    doc = emit_report(r)
    back = parse_report(doc)
    assert emit_report(back) == doc
    assert back["a"].residual == 0.1 + 0.2  # 17 significant digits survive
    assert not back["b"].passed


def test_numbers_17_digits():
    r = VerificationReport()
    r.add("a", "x", np.float64(1) / 3, 1.0)
    d = json.loads(emit_report(r))
    assert d["entries"][0]["max_residual"] == 1 / 3


def test_strip_timestamps_and_text():
    r = VerificationReport(meta={"timestamp": "2020-01-01T00:00:00+00:00", "seed": 1})
    r.add("a", "x", 0.0, 1.0)
    assert "timestamp" not in strip_timestamps(emit_report(r))
    txt = emit_report(r, "text")
    assert "PASS" in txt and "timestamp" not in txt and txt.endswith("1/1 passed, 0 failed\n")
    with pytest.raises(ValueError):
        emit_report(r, "xml")


def test_schema_check():
    with pytest.raises(ValueError):
        parse_report(json.dumps({"schema": "0", "entries": [], "findings": []}))
