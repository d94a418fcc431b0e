"""Machine-readable reports: JSON with every real printed to 17 significant digits."""

from __future__ import annotations

import datetime as _dt
import json
import math
import time
import zlib
from dataclasses import dataclass, field
from typing import Any

import numpy as np

REPORT_SCHEMA = "finslerlab-report/1"
TOOL_VERSION = "0.1.0"


def _float(x: float) -> str:
    if math.isnan(x):
        return '"nan"'
    if math.isinf(x):
        return '"inf"' if x > 0 else '"-inf"'
    text = format(x, ".17g")
    if all(ch not in text for ch in ".eE"):
        text += ".0"
    return text


def dumps(obj: Any, indent: int = 2, _level: int = 0) -> str:
    """Deterministic JSON text; dict keys keep insertion order."""
    pad = " " * (indent * (_level + 1))
    end = " " * (indent * _level)
    if hasattr(obj, "to_dict"):
        obj = obj.to_dict()
    if isinstance(obj, np.ndarray):
        obj = obj.tolist()
    if isinstance(obj, (bool, np.bool_)):
        return "true" if obj else "false"
    if obj is None:
        return "null"
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        return _float(float(obj))
    if isinstance(obj, str):
        return json.dumps(obj)
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [f"{pad}{json.dumps(str(k))}: {dumps(v, indent, _level + 1)}" for k, v in obj.items()]
        return "{\n" + ",\n".join(items) + "\n" + end + "}"
    if isinstance(obj, (list, tuple)):
        if not obj:
            return "[]"
        if all(isinstance(v, (int, float, bool, np.floating, np.integer)) or v is None for v in obj):
            return "[" + ", ".join(dumps(v, indent, _level + 1) for v in obj) + "]"
        items = [f"{pad}{dumps(v, indent, _level + 1)}" for v in obj]
        return "[\n" + ",\n".join(items) + "\n" + end + "]"
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def check_rng(seed: int, name: str) -> np.random.Generator:
    """Independent stream per named check, derived from the scenario seed."""
    return np.random.default_rng([int(seed) & 0xFFFFFFFFFFFFFFFF, zlib.crc32(name.encode())])


@dataclass
class Check:
    name: str
    passed: bool
    max_deviation: float | None = None
    tolerance: float | None = None
    details: dict = field(default_factory=dict)
    failures: list = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "passed": bool(self.passed),
            "max_deviation": self.max_deviation,
            "tolerance": self.tolerance,
            "failures": self.failures,
            "details": self.details,
        }


@dataclass
class Report:
    command: str
    scenario: dict
    derivatives: str
    seed: int
    checks: list = field(default_factory=list)
    error: dict | None = None
    started: float = field(default_factory=time.perf_counter)
    timestamp: str = field(default_factory=lambda: _dt.datetime.now(_dt.timezone.utc).isoformat())

    @property
    def passed(self) -> bool:
        return self.error is None and all(c.passed for c in self.checks)

    def add(self, check: Check) -> Check:
        self.checks.append(check)
        return check

    def payload(self) -> dict:
        """Everything except the timing record; identical across reruns."""
        return {
            "schema": REPORT_SCHEMA,
            "tool": {"name": "finslerlab", "version": TOOL_VERSION},
            "command": self.command,
            "derivatives": self.derivatives,
            "seed": self.seed,
            "scenario": self.scenario,
            "passed": self.passed,
            "error": self.error,
            "checks": [c.to_dict() for c in self.checks],
        }

    def to_dict(self) -> dict:
        out = self.payload()
        out["timestamp"] = {"utc": self.timestamp, "wall_clock_seconds": time.perf_counter() - self.started}
        return out

    def to_json(self) -> str:
        return dumps(self.to_dict()) + "\n"


__all__ = ["dumps", "check_rng", "Check", "Report", "REPORT_SCHEMA", "TOOL_VERSION"]
