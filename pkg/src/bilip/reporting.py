"""Checks, run reports and deterministic CSV/JSON writers."""

from __future__ import annotations

import csv
import json
import math
import operator
import os
from dataclasses import dataclass, field
from typing import Any

import numpy as np

_OPS = {"<": operator.lt, "<=": operator.le, ">": operator.gt, ">=": operator.ge, "==": operator.eq}


@dataclass(frozen=True)
class Check:
    """``value op tol``; the tolerance travels with the verdict."""

    name: str
    value: Any
    op: str
    tol: Any

    @property
    def passed(self) -> bool:
        v = self.value
        if v is None or (isinstance(v, float) and math.isnan(v)):
            return False
        return bool(_OPS[self.op](v, self.tol))

    def line(self) -> str:
        mark = "PASS" if self.passed else "FAIL"
        return f"{mark}  {self.name:<44s} {_fmt(self.value)} {self.op} {_fmt(self.tol)}"

    def to_dict(self) -> dict:
        return {"name": self.name, "value": _plain(self.value), "op": self.op, "tol": _plain(self.tol),
                "passed": self.passed}


def _fmt(v):
    if isinstance(v, bool) or not isinstance(v, (float, np.floating)):
        return str(v)
    return f"{v:.6g}"


@dataclass
class RunReport:
    command: str
    config: dict
    results: dict = field(default_factory=dict)
    checks: list[Check] = field(default_factory=list)

    def check(self, name, value, op, tol) -> Check:
        c = Check(name, _scalar(value), op, _scalar(tol))
        self.checks.append(c)
        return c

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def to_dict(self) -> dict:
        return {
            "command": self.command,
            "config": self.config,
            "results": self.results,
            "checks": [c.to_dict() for c in self.checks],
            "passed": self.passed,
        }

    def table(self) -> str:
        return "\n".join(c.line() for c in self.checks)


def _scalar(v):
    if isinstance(v, np.bool_):
        return bool(v)
    if isinstance(v, np.integer):
        return int(v)
    if isinstance(v, np.floating):
        return float(v)
    return v


def _plain(obj):
    """Convert numpy scalars/arrays and non-finite floats into JSON-safe values."""
    if isinstance(obj, dict):
        return {str(k): _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_plain(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [_plain(v) for v in obj.tolist()]
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, (np.floating, float)):
        f = float(obj)
        return f if math.isfinite(f) else None
    return obj


def write_json(path, obj):
    """UTF-8, insertion-ordered keys, shortest round-trip float repr."""
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(_plain(obj), fh, indent=2, ensure_ascii=False, allow_nan=False)
        fh.write("\n")


def write_csv(path, header, rows):
    """RFC-4180 CSV with 17-significant-digit floats."""
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\r\n")
        w.writerow(header)
        for r in rows:
            w.writerow([f"{v:.17g}" if isinstance(v, (float, np.floating)) else v for v in r])


def ensure_dir(path):
    os.makedirs(path, exist_ok=True)
    return path
