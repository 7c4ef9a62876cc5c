"""Verification reports: named residual entries, findings, and serialization."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np

SCHEMA_VERSION = "1"


def _num(x):
    """Round-trippable float with 17 significant digits (None for NaN/inf)."""
    if isinstance(x, (bool, np.bool_)):
        return bool(x)
    if isinstance(x, (int, np.integer)):
        return int(x)
    if isinstance(x, (float, np.floating)):
        x = float(x)
        if not math.isfinite(x):
            return None
        return float(f"{x:.17g}")
    if isinstance(x, dict):
        return {str(k): _num(v) for k, v in x.items()}
    if isinstance(x, (list, tuple, np.ndarray)):
        return [_num(v) for v in x]
    return x


@dataclass
class Entry:
    label: str
    anchor: str
    samples: int
    residual: float
    tolerance: float
    value: float | None = None

    def __post_init__(self):
        if not self.anchor:
            raise ValueError("report entries need an anchor string")
        self.residual = float(self.residual)
        self.tolerance = float(self.tolerance)

    @property
    def passed(self) -> bool:
        # NaN residuals fail
        return bool(self.residual < self.tolerance)

    def to_dict(self) -> dict:
        d = {
            "label": self.label,
            "anchor": self.anchor,
            "samples": int(self.samples),
            "max_residual": _num(self.residual),
            "tolerance": _num(self.tolerance),
            "pass": self.passed,
        }
        if self.value is not None:
            d["value"] = _num(self.value)
        return d


@dataclass
class Finding:
    label: str
    text: str
    values: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {"label": self.label, "text": self.text, "values": _num(self.values)}


@dataclass
class VerificationReport:
    entries: list = field(default_factory=list)
    findings: list = field(default_factory=list)
    meta: dict = field(default_factory=dict)

    def add(self, label, anchor, residual, tolerance, samples=1, value=None) -> Entry:
        e = Entry(label, anchor, samples, residual, tolerance, value)
        self.entries.append(e)
        return e

    def add_finding(self, label, text, **values) -> Finding:
        f = Finding(label, text, values)
        self.findings.append(f)
        return f

    def extend(self, other: "VerificationReport", prefix: str = "") -> None:
        for e in other.entries:
            self.entries.append(Entry(prefix + e.label, e.anchor, e.samples, e.residual, e.tolerance, e.value))
        self.findings.extend(other.findings)

    def __getitem__(self, label: str) -> Entry:
        for e in self.entries:
            if e.label == label:
                return e
        raise KeyError(label)

    @property
    def summary(self) -> dict:
        passed = sum(e.passed for e in self.entries)
        return {"total": len(self.entries), "passed": passed, "failed": len(self.entries) - passed}

    @property
    def ok(self) -> bool:
        return all(e.passed for e in self.entries)

    def to_dict(self) -> dict:
        return {
            "schema": SCHEMA_VERSION,
            "meta": _num(self.meta),
            "summary": self.summary,
            "entries": [e.to_dict() for e in self.entries],
            "findings": [f.to_dict() for f in self.findings],
        }

    def failures(self) -> list:
        return [e for e in self.entries if not e.passed]


def emit_report(r: VerificationReport, format: str = "json") -> str:
    if format == "json":
        return json.dumps(r.to_dict(), indent=2, ensure_ascii=False) + "\n"
    if format == "text":
        return _text(r)
    raise ValueError(f"unknown report format {format!r}")


def _text(r: VerificationReport) -> str:
    lines = []
    if r.meta:
        lines.append("  ".join(f"{k}={v}" for k, v in r.meta.items() if k != "timestamp"))
    width = max((len(e.label) for e in r.entries), default=10)
    for e in r.entries:
        tag = "PASS" if e.passed else "FAIL"
        val = "" if e.value is None else f"  value={e.value:.12g}"
        lines.append(f"{tag}  {e.label:<{width}}  max={e.residual:.3e}  tol={e.tolerance:.0e}  n={e.samples}{val}")
    for f in r.findings:
        lines.append(f"FINDING {f.label}: {f.text}")
        for k, v in f.values.items():
            lines.append(f"    {k} = {v}")
    s = r.summary
    lines.append(f"{s['passed']}/{s['total']} passed, {s['failed']} failed")
    return "\n".join(lines) + "\n"


def parse_report(text: str) -> VerificationReport:
    d = json.loads(text)
    if d.get("schema") != SCHEMA_VERSION:
        raise ValueError(f"unsupported report schema {d.get('schema')!r}")
    r = VerificationReport(meta=d.get("meta", {}))
    for e in d["entries"]:
        res = e["max_residual"]
        r.add(e["label"], e["anchor"], math.nan if res is None else res, e["tolerance"],
              e["samples"], e.get("value"))
    for f in d["findings"]:
        r.add_finding(f["label"], f["text"], **f["values"])
    return r


def strip_timestamps(doc: str) -> str:
    """JSON report text with the volatile ``meta.timestamp`` removed."""
    d = json.loads(doc)
    d.get("meta", {}).pop("timestamp", None)
    return json.dumps(d, indent=2, ensure_ascii=False) + "\n"
