"""Declarative scenario files (JSON) and their resolution into library objects."""

from __future__ import annotations

import json
from dataclasses import dataclass
from dataclasses import field as dc_field
from pathlib import Path
from typing import Any

import numpy as np

from .calculus import ScalarField, VolumeForm
from .errors import ConfigurationError, UnsupportedOperation
from .isoparametric import field_from_dict
from .models import KropinaMetric, MetricModel, RiemannianMetric
from .surfaces import Immersion, immersion_from_dict
from .zoo import model_from_dict

SCENARIO_SCHEMA = "finslerlab-scenario/1"
DEFAULT_TOL = 1e-6


@dataclass
class Scenario:
    raw: dict
    model: MetricModel
    volume: VolumeForm | None = None
    surface: Immersion | None = None
    field: ScalarField | None = None
    seed: int = 0
    tol: float = DEFAULT_TOL
    extras: dict = dc_field(default_factory=dict)

    def samples(self) -> list:
        if self.surface is None:
            raise ConfigurationError("scenario has no surface")
        return self.surface.grid(self.raw.get("surface"))

    def get(self, key: str, default: Any = None) -> Any:
        return self.raw.get(key, default)


def _volume(spec, model: MetricModel) -> VolumeForm | None:
    if spec is None:
        return None
    try:
        if spec == "lebesgue":
            return VolumeForm.lebesgue()
        if spec == "riemannian":
            base = model if isinstance(model, RiemannianMetric) else getattr(model, "h", None) or getattr(model, "alpha", None)
            if base is None:
                raise ConfigurationError("riemannian volume needs an underlying Riemannian metric")
            return VolumeForm.riemannian(base)
        if spec in ("busemann-hausdorff", "bh"):
            return VolumeForm.busemann_hausdorff(model)
    except UnsupportedOperation as exc:
        raise ConfigurationError(str(exc)) from exc
    raise ConfigurationError(f"unknown volume form {spec!r}")


def default_volume(model: MetricModel) -> VolumeForm:
    if isinstance(model, (KropinaMetric, RiemannianMetric)):
        return VolumeForm.busemann_hausdorff(model)
    return VolumeForm.lebesgue()


def scenario_from_dict(raw: dict, seed: int | None = None, tol: float | None = None) -> Scenario:
    if not isinstance(raw, dict):
        raise ConfigurationError("scenario must be a JSON object")
    schema = raw.get("schema", SCENARIO_SCHEMA)
    if schema != SCENARIO_SCHEMA:
        raise ConfigurationError(f"unsupported scenario schema {schema!r}")
    if "metric" not in raw:
        raise ConfigurationError("scenario needs a 'metric'")
    model = model_from_dict(raw["metric"])
    volume = _volume(raw.get("volume"), model)
    surface = immersion_from_dict(raw["surface"], model.dim) if "surface" in raw else None
    fld = field_from_dict(raw["field"], model.dim) if "field" in raw else None
    sc = Scenario(
        raw=raw,
        model=model,
        volume=volume,
        surface=surface,
        field=fld,
        seed=int(raw.get("seed", 0) if seed is None else seed),
        tol=float(raw.get("tol", DEFAULT_TOL) if tol is None else tol),
    )
    if "box" in raw:
        box = np.asarray(raw["box"], dtype=float)
        if box.shape != (2, model.dim):
            raise ConfigurationError(f"box must be [[lo...], [hi...]] with {model.dim} entries each")
    return sc


def load_scenario(path: str | Path, seed: int | None = None, tol: float | None = None) -> Scenario:
    try:
        raw = json.loads(Path(path).read_text())
    except OSError as exc:
        raise ConfigurationError(f"cannot read scenario {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigurationError(f"scenario {path} is not valid JSON: {exc}") from exc
    return scenario_from_dict(raw, seed, tol)


__all__ = ["Scenario", "scenario_from_dict", "load_scenario", "default_volume", "SCENARIO_SCHEMA", "DEFAULT_TOL"]
