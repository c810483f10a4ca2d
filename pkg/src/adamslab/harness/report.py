"""Verification reports with a versioned JSON schema and CSV tables."""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

SCHEMA = "adamslab.report/1"
PROVENANCE = ("PAPER", "TRIVIAL", "DERIVED")


def _clean(x):
    """JSON-ready copy: numpy scalars and arrays become Python values, and
    non-finite floats become the strings 'inf', '-inf', 'nan'."""
    if isinstance(x, dict):
        return {str(k): _clean(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_clean(v) for v in x]
    if isinstance(x, np.ndarray):
        return [_clean(v) for v in x.tolist()]
    if isinstance(x, (bool, np.bool_)):
        return bool(x)
    if isinstance(x, (int, np.integer)):
        return int(x)
    if isinstance(x, (float, np.floating)):
        f = float(x)
        if math.isnan(f):
            return "nan"
        if math.isinf(f):
            return "inf" if f > 0 else "-inf"
        return f
    return x


def _restore(x):
    if isinstance(x, dict):
        return {k: _restore(v) for k, v in x.items()}
    if isinstance(x, list):
        return [_restore(v) for v in x]
    if x in ("inf", "-inf", "nan"):
        return float(x)
    return x


@dataclass
class CaseRecord:
    name: str
    inputs: dict
    measured: dict
    relation: str
    passed: bool
    tolerance: float
    provenance: str
    note: str = ""

    def __post_init__(self) -> None:
        if self.provenance not in PROVENANCE:
            raise ValueError(f"provenance must be one of {PROVENANCE}")
        self.passed = bool(self.passed)
        # plain Python values in memory, non-finite floats kept as floats
        self.inputs = _restore(_clean(self.inputs))
        self.measured = _restore(_clean(self.measured))
        self.tolerance = float(self.tolerance)

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "inputs": _clean(self.inputs),
            "measured": _clean(self.measured),
            "relation": self.relation,
            "pass": self.passed,
            "tolerance": _clean(self.tolerance),
            "provenance": self.provenance,
            "note": self.note,
        }

    @staticmethod
    def from_dict(d: dict) -> "CaseRecord":
        return CaseRecord(
            name=d["name"],
            inputs=_restore(d["inputs"]),
            measured=_restore(d["measured"]),
            relation=d["relation"],
            passed=d["pass"],
            tolerance=float(d["tolerance"]),
            provenance=d["provenance"],
            note=d.get("note", ""),
        )


@dataclass
class VerificationReport:
    suite: str
    cases: list[CaseRecord] = field(default_factory=list)
    wall_time: float = 0.0
    grid: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.cases)

    def add(self, case: CaseRecord) -> CaseRecord:
        self.cases.append(case)
        return case

    def extend(self, other: "VerificationReport", prefix: str = "") -> None:
        for c in other.cases:
            self.cases.append(CaseRecord(**{**c.__dict__, "name": prefix + c.name}))

    def failures(self) -> list[CaseRecord]:
        return [c for c in self.cases if not c.passed]

    def case(self, name: str) -> CaseRecord:
        for c in self.cases:
            if c.name == name:
                return c
        raise KeyError(name)

    def to_dict(self, include_timing: bool = True) -> dict:
        d = {
            "schema": SCHEMA,
            "suite": self.suite,
            "pass": self.passed,
            "grid": _clean(self.grid),
            "cases": [c.to_dict() for c in self.cases],
        }
        if include_timing:
            d["wall_time_s"] = _clean(self.wall_time)
        return d

    @staticmethod
    def from_dict(d: dict) -> "VerificationReport":
        if d.get("schema") != SCHEMA:
            raise ValueError(f"unsupported report schema {d.get('schema')!r}")
        return VerificationReport(
            suite=d["suite"],
            cases=[CaseRecord.from_dict(c) for c in d["cases"]],
            wall_time=float(_restore(d.get("wall_time_s", 0.0))),
            grid=_restore(d.get("grid", {})),
        )

    def __eq__(self, other) -> bool:
        if not isinstance(other, VerificationReport):
            return NotImplemented
        return to_json(self) == to_json(other)


def to_json(report: VerificationReport, include_timing: bool = True) -> str:
    return json.dumps(report.to_dict(include_timing), sort_keys=True, indent=2, allow_nan=False) + "\n"


CSV_COLUMNS = ["suite", "case", "provenance", "pass", "tolerance", "relation", "value", "measured", "inputs"]


def to_csv(report: VerificationReport) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_COLUMNS)
    for c in report.cases:
        value = c.measured.get("value", "")
        w.writerow(
            [
                report.suite,
                c.name,
                c.provenance,
                "true" if c.passed else "false",
                repr(c.tolerance),
                c.relation,
                repr(value) if isinstance(value, float) else value,
                json.dumps(c.measured, sort_keys=True, separators=(",", ":")),
                json.dumps(c.inputs, sort_keys=True, separators=(",", ":")),
            ]
        )
    return buf.getvalue()


def emit(report: VerificationReport, fmt: str, path: str | Path, include_timing: bool = True) -> None:
    if fmt == "json":
        text = to_json(report, include_timing)
    elif fmt == "csv":
        text = to_csv(report)
    else:
        raise ValueError(f"unknown format {fmt!r}")
    p = Path(path)
    try:
        p.write_text(text)
    except OSError as exc:
        raise OSError(f"cannot write report to {p}: {exc}") from exc


def parse(path: str | Path) -> VerificationReport:
    p = Path(path)
    try:
        text = p.read_text()
    except OSError as exc:
        raise OSError(f"cannot read report {p}: {exc}") from exc
    return VerificationReport.from_dict(json.loads(text))
