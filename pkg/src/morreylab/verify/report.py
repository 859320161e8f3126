"""Experiment reports and the verdict rule."""

from __future__ import annotations

import csv
import hashlib
import io
import json
import math
import operator
from dataclasses import dataclass, field
from typing import Any

_OPS = {"<=": operator.le, ">=": operator.ge, "<": operator.lt, ">": operator.gt, "==": operator.eq}

LADDER_GROWTH = 1.1
LADDER_FLOOR = 1e-12


def _clean(v):
    """JSON-safe scalar (inf/nan become strings)."""
    if isinstance(v, float):
        if math.isnan(v):
            return "nan"
        if math.isinf(v):
            return "inf" if v > 0 else "-inf"
        return v
    if isinstance(v, dict):
        return {str(k): _clean(x) for k, x in v.items()}
    if isinstance(v, (list, tuple)):
        return [_clean(x) for x in v]
    if hasattr(v, "item") and callable(v.item):
        return _clean(v.item())
    return v


def _num(v) -> float:
    if isinstance(v, str):
        return float(v)
    return float(v)


def evaluate_check(value, op: str, bound) -> bool:
    value, bound = _num(value), _num(bound)
    if math.isnan(value) or math.isnan(bound):
        return False
    return bool(_OPS[op](value, bound))


def make_check(name: str, value, op: str, bound) -> dict:
    if op not in _OPS:
        raise ValueError(f"unknown comparison {op!r}")
    return {"name": name, "value": _clean(float(value)), "op": op, "bound": _clean(float(bound)),
            "passed": evaluate_check(value, op, bound)}


def ladder_ok(ladder: list[dict]) -> bool:
    """Resolution ladder rule: last headline <= 1.1 * first (+ tiny floor)."""
    if len(ladder) < 2:
        return True
    first, last = _num(ladder[0]["headline"]), _num(ladder[-1]["headline"])
    if math.isnan(first) or math.isnan(last):
        return False
    return last <= LADDER_GROWTH * first + LADDER_FLOOR


def verdict_from_checks(checks: list[dict], ladder: list[dict]) -> str:
    """pass iff every check holds and the ladder shows no growth;
    inconclusive when there is nothing to check."""
    if not checks:
        return "inconclusive"
    ok = all(evaluate_check(c["value"], c["op"], c["bound"]) for c in checks)
    return "pass" if ok and ladder_ok(ladder) else "fail"


@dataclass
class ExperimentReport:
    id: str
    type: str
    config: dict = field(default_factory=dict)
    rows: list[dict] = field(default_factory=list)
    headline: float = math.nan
    ladder: list[dict] = field(default_factory=list)
    checks: list[dict] = field(default_factory=list)
    verdict: str = "inconclusive"
    notes: list[str] = field(default_factory=list)
    timing: dict = field(default_factory=dict)

    def add_check(self, name: str, value, op: str, bound) -> dict:
        c = make_check(name, value, op, bound)
        self.checks.append(c)
        return c

    def finalize(self) -> "ExperimentReport":
        self.verdict = verdict_from_checks(self.checks, self.ladder)
        return self

    @property
    def passed(self) -> bool:
        return self.verdict == "pass"

    def check(self, name: str) -> dict:
        for c in self.checks:
            if c["name"] == name:
                return c
        raise KeyError(name)

    def content(self) -> dict:
        """Everything except wall-clock data."""
        return _clean(
            {
                "id": self.id,
                "type": self.type,
                "config": self.config,
                "rows": self.rows,
                "headline": self.headline,
                "ladder": self.ladder,
                "checks": self.checks,
                "verdict": self.verdict,
                "notes": self.notes,
            }
        )

    def content_hash(self) -> str:
        blob = json.dumps(self.content(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(blob.encode()).hexdigest()

    def to_dict(self) -> dict:
        d = self.content()
        d["content_hash"] = self.content_hash()
        d["timing"] = _clean(self.timing)
        return d

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, indent=2)

    def rows_csv(self) -> str:
        buf = io.StringIO()
        if not self.rows:
            return ""
        keys = sorted({k for r in self.rows for k in r})
        w = csv.DictWriter(buf, fieldnames=keys)
        w.writeheader()
        for r in self.rows:
            w.writerow({k: _clean(r.get(k, "")) for k in keys})
        return buf.getvalue()

    @classmethod
    def from_dict(cls, d: dict) -> "ExperimentReport":
        return cls(
            id=d["id"],
            type=d["type"],
            config=d.get("config", {}),
            rows=d.get("rows", []),
            headline=_num(d.get("headline", math.nan)),
            ladder=d.get("ladder", []),
            checks=d.get("checks", []),
            verdict=d.get("verdict", "inconclusive"),
            notes=d.get("notes", []),
            timing=d.get("timing", {}),
        )


def recompute_verdict(d: dict[str, Any]) -> str:
    """Verdict recomputed from a serialized report's checks and ladder."""
    return verdict_from_checks(d.get("checks", []), d.get("ladder", []))
