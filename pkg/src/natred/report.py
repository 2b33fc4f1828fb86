"""Verification reports: per-check records, JSON and text rendering."""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Any

import numpy as np

from . import __version__

SCHEMA_VERSION = 1

__all__ = ["Check", "VerificationReport", "SCHEMA_VERSION"]


def _plain(v):
    """Convert numpy scalars/arrays to plain Python for serialization."""
    if isinstance(v, np.ndarray):
        return [_plain(x) for x in v.tolist()]
    if isinstance(v, (np.floating,)):
        return float(v)
    if isinstance(v, (np.integer,)):
        return int(v)
    if isinstance(v, np.bool_):
        return bool(v)
    if isinstance(v, (list, tuple)):
        return [_plain(x) for x in v]
    if isinstance(v, dict):
        return {str(k): _plain(x) for k, x in v.items()}
    return v


@dataclass
class Check:
    name: str
    value: Any
    expected: Any = None
    bound: float | None = None
    residual: float | None = None
    passed: bool = True
    note: str = ""

    def to_dict(self) -> dict:
        return {k: _plain(v) for k, v in self.__dict__.items()}


@dataclass
class VerificationReport:
    pipeline: str
    inputs: dict = field(default_factory=dict)
    checks: list[Check] = field(default_factory=list)
    info: dict = field(default_factory=dict)
    wall_time: float | None = None
    version: str = __version__

    # building ---------------------------------------------------------------
    def add(self, name, value, expected=None, bound=None, residual=None, passed=None, note="") -> Check:
        if passed is None:
            if residual is None or bound is None:
                raise ValueError(f"check {name}: need a pass flag or residual and bound")
            passed = bool(residual <= bound)
        c = Check(name, value, expected, bound, residual, bool(passed), note)
        self.checks.append(c)
        return c

    def compare(self, name, value, expected, rel: float = 0.0, abs_: float = 0.0, note="") -> Check:
        """Scalar comparison with |value - expected| <= abs_ + rel * max(|value|, |expected|)."""
        r = abs(value - expected)
        bound = abs_ + rel * max(abs(value), abs(expected))
        return self.add(name, value, expected, bound, r, r <= bound, note)

    def below(self, name, value, bound, note="") -> Check:
        return self.add(name, value, 0.0, bound, value, value <= bound, note)

    def equal(self, name, value, expected, note="") -> Check:
        return self.add(name, value, expected, None, None, value == expected, note)

    # queries ------------------------------------------------------------------
    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def __getitem__(self, name) -> Check:
        for c in self.checks:
            if c.name == name:
                return c
        raise KeyError(name)

    def failures(self) -> list[Check]:
        return [c for c in self.checks if not c.passed]

    # serialization -------------------------------------------------------------
    def to_dict(self, include_time: bool = True) -> dict:
        d = {
            "schema_version": SCHEMA_VERSION,
            "tool_version": self.version,
            "pipeline": self.pipeline,
            "inputs": _plain(self.inputs),
            "passed": self.passed,
            "checks": [c.to_dict() for c in self.checks],
            "info": _plain(self.info),
        }
        if include_time:
            d["wall_time"] = self.wall_time
        return d

    def to_json(self, include_time: bool = True) -> str:
        return dumps(self.to_dict(include_time))

    @classmethod
    def from_dict(cls, d: dict) -> "VerificationReport":
        if d.get("schema_version") != SCHEMA_VERSION:
            raise ValueError(f"unsupported report schema {d.get('schema_version')}")
        rep = cls(d["pipeline"], d["inputs"], [Check(**c) for c in d["checks"]],
                  d.get("info", {}), d.get("wall_time"), d["tool_version"])
        return rep

    @classmethod
    def from_json(cls, text: str) -> "VerificationReport":
        return cls.from_dict(json.loads(text))

    def to_text(self) -> str:
        lines = [f"pipeline: {self.pipeline}",
                 "inputs: " + ", ".join(f"{k}={_fmt(v)}" for k, v in self.inputs.items())]
        for c in self.checks:
            flag = "PASS" if c.passed else "FAIL"
            parts = [f"[{flag}] {c.name}: value={_fmt(c.value)}"]
            if c.expected is not None:
                parts.append(f"expected={_fmt(c.expected)}")
            if c.bound is not None:
                parts.append(f"bound={_fmt(c.bound)}")
            if c.residual is not None:
                parts.append(f"residual={_fmt(c.residual)}")
            if c.note:
                parts.append(f"({c.note})")
            lines.append(" ".join(parts))
        for k, v in self.info.items():
            lines.append(f"info {k}: {_fmt(v)}")
        lines.append(f"overall: {'PASS' if self.passed else 'FAIL'}")
        return "\n".join(lines)


def _fmt(v) -> str:
    v = _plain(v)
    if isinstance(v, float):
        return repr(v)
    if isinstance(v, list):
        return "[" + ", ".join(_fmt(x) for x in v) + "]"
    return str(v)


def _finite(o):
    if isinstance(o, float) and not math.isfinite(o):
        return str(o)
    if isinstance(o, dict):
        return {k: _finite(v) for k, v in o.items()}
    if isinstance(o, list):
        return [_finite(v) for v in o]
    return o


def dumps(obj) -> str:
    # float repr is the shortest string that round-trips (at most 17 significant digits)
    return json.dumps(_finite(_plain(obj)), sort_keys=True, indent=2)
