"""Transnormal and isoparametric checks of scalar fields on sampled level sets.

Points on a level {f = t} are found along random rays from a seed box by
bracketing and bisection, then kept only where df lies in the dual cone.
Constancy is tested per level; smoothness of a(t) and continuity of b(t)
cannot be certified from samples and every verdict says so.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from scipy.optimize import bisect

from . import jets
from .calculus import ScalarField, VolumeForm, gradient, laplacians
from .errors import (
    ConfigurationError,
    DualConeViolation,
    GeometryError,
    InsufficientSamples,
    OutOfDomain,
    UnsupportedOperation,
)
from .models import MetricModel
from .shape import level_set_shape
from .tensors import dual_tensor, eval_dual_metric, eval_metric

SCOPE_NOTE = "constancy verified on sampled levels only; smoothness of a(t) and continuity of b(t) are not certified"
MIN_SAMPLES = 5
LEVEL_TOL = 1e-10


# ---------------------------------------------------------------------------
# fields


def linear_field(coefficients: Sequence[float], offset: float = 0.0) -> ScalarField:
    c = [float(v) for v in coefficients]
    return ScalarField(lambda x: sum((ci * xi for ci, xi in zip(c, x)), float(offset)), "linear",
                       {"coefficients": c, "offset": float(offset)})


def norm_field(center: Sequence[float] | None = None, dim: int = 3) -> ScalarField:
    c = [0.0] * dim if center is None else [float(v) for v in center]
    return ScalarField(lambda x: jets.sqrt(sum(((xi - ci) ** 2 for xi, ci in zip(x, c)), 0.0)), "norm", {"center": c})


def quadratic_field(Q: Sequence, c: Sequence[float] | None = None, d: float = 0.0) -> ScalarField:
    """f = x^T Q x / 2 + c.x + d."""
    Q = [[float(v) for v in row] for row in Q]
    m = len(Q)
    c = [0.0] * m if c is None else [float(v) for v in c]

    def f(x):
        acc = float(d)
        for i in range(m):
            acc = acc + c[i] * x[i]
            for j in range(m):
                if Q[i][j]:
                    acc = acc + 0.5 * Q[i][j] * x[i] * x[j]
        return acc

    return ScalarField(f, "quadratic", {"Q": Q, "c": c, "d": float(d)})


def field_from_dict(spec: dict, dim: int) -> ScalarField:
    kind = spec.get("field") if isinstance(spec, dict) else None
    try:
        if kind == "linear":
            coef = spec["coefficients"]
            if len(coef) != dim:
                raise ConfigurationError(f"linear field needs {dim} coefficients")
            return linear_field(coef, spec.get("offset", 0.0))
        if kind in ("norm", "distance"):
            return norm_field(spec.get("center"), dim)
        if kind == "quadratic":
            return quadratic_field(spec["Q"], spec.get("c"), spec.get("d", 0.0))
    except KeyError as exc:
        raise ConfigurationError(f"field {kind!r} is missing {exc}") from exc
    raise ConfigurationError(f"unknown field family {kind!r}")


# ---------------------------------------------------------------------------
# level-set sampling


def _in_domain(model, field_, x) -> bool:
    try:
        gradient(model, field_, x)
    except (OutOfDomain, GeometryError):
        return False
    return True


def sample_level(model: MetricModel, field_: ScalarField, t: float, count: int, box, rng: np.random.Generator,
                 max_rays: int | None = None) -> list[np.ndarray]:
    """Up to ``count`` points with |f - t| <= 1e-10 and df in the dual cone."""
    lo = np.asarray(box[0], dtype=float)
    hi = np.asarray(box[1], dtype=float)
    reach = float(np.linalg.norm(hi - lo))
    pts: list[np.ndarray] = []
    max_rays = max_rays or 60 * count
    for _ in range(max_rays):
        if len(pts) >= count:
            break
        p = lo + (hi - lo) * rng.random(len(lo))
        d = rng.normal(size=len(lo))
        d /= np.linalg.norm(d)
        s_grid = np.linspace(0.0, reach, 65)
        vals = [field_(p + s * d) - t for s in s_grid]
        hit = None
        for k in range(len(s_grid) - 1):
            if vals[k] == 0.0:
                hit = s_grid[k]
                break
            if vals[k] * vals[k + 1] < 0:
                hit = bisect(lambda s: field_(p + s * d) - t, s_grid[k], s_grid[k + 1], xtol=1e-14, maxiter=200)
                break
        if hit is None:
            continue
        x = p + hit * d
        if abs(field_(x) - t) > LEVEL_TOL * max(1.0, abs(t)):
            continue
        if _in_domain(model, field_, x):
            pts.append(x)
    return pts


def sample_levels(model, field_, levels, count, box, rng) -> dict:
    out = {}
    for t in levels:
        pts = sample_level(model, field_, float(t), count, box, rng)
        if len(pts) < MIN_SAMPLES:
            raise InsufficientSamples(f"level t={t}: only {len(pts)} in-domain samples (need {MIN_SAMPLES})")
        out[float(t)] = pts
    return out


# ---------------------------------------------------------------------------
# verdicts


@dataclass
class LevelSetSample:
    level: float
    points: list
    F_grad: list
    hat: list = field(default_factory=list)
    sigma: list = field(default_factory=list)
    closure: list = field(default_factory=list)
    mean_curvature: list = field(default_factory=list)

    def to_dict(self) -> dict:
        return {k: ([list(map(float, p)) for p in v] if k == "points" else v) for k, v in self.__dict__.items()}


def _spread(vals) -> float:
    return float(max(vals) - min(vals)) if vals else 0.0


def _flat(vals, tol) -> bool:
    return _spread(vals) <= tol * (1.0 + abs(float(np.mean(vals))))


@dataclass
class IsoparametricVerdict:
    transnormal: bool
    isoparametric_hat: bool | None
    isoparametric_sigma: bool | None
    tol: float
    levels: list
    spreads: dict
    a: dict
    b_hat: dict
    b_sigma: dict
    max_closure_residual: float | None = None
    notes: list = field(default_factory=list)
    worst: dict = field(default_factory=dict)

    @property
    def isoparametric(self) -> bool:
        return bool(self.transnormal and self.isoparametric_hat and (self.isoparametric_sigma is not False))

    def to_dict(self) -> dict:
        out = {k: v for k, v in self.__dict__.items() if k != "levels"}
        out["levels"] = [lv.to_dict() for lv in self.levels]
        out["isoparametric"] = self.isoparametric
        return out


def _points_for(model, field_, levels, samples, box, rng):
    if isinstance(samples, dict):
        return {float(t): [np.asarray(p, dtype=float) for p in pts] for t, pts in samples.items()}
    rng = rng if rng is not None else np.random.default_rng(0)
    box = box if box is not None else (-2.0 * np.ones(model.dim), 2.0 * np.ones(model.dim))
    return sample_levels(model, field_, levels, int(samples), box, rng)


def transnormal_check(model: MetricModel, field_: ScalarField, levels, samples=10, tol: float = 1e-6,
                      box=None, rng=None) -> IsoparametricVerdict:
    """Pass iff F(grad f) is constant (relative spread <= tol) on every level."""
    pts = _points_for(model, field_, levels, samples, box, rng)
    out, spreads, a, worst = [], {}, {}, {}
    ok = True
    for t, P in pts.items():
        if len(P) < MIN_SAMPLES:
            raise InsufficientSamples(f"level t={t}: only {len(P)} samples (need {MIN_SAMPLES})")
        vals = [eval_metric(model, x, gradient(model, field_, x)) for x in P]
        out.append(LevelSetSample(t, P, vals))
        spreads[t] = {"F_grad": _spread(vals)}
        a[t] = float(np.mean(vals))
        if not _flat(vals, tol):
            ok = False
            i, j = int(np.argmin(vals)), int(np.argmax(vals))
            worst[t] = {"quantity": "F_grad", "x_min": P[i].tolist(), "min": vals[i], "x_max": P[j].tolist(), "max": vals[j]}
    return IsoparametricVerdict(ok, None, None, tol, out, spreads, a, {}, {}, notes=[SCOPE_NOTE], worst=worst)


def isoparametric_check(model: MetricModel, volume: VolumeForm, field_: ScalarField, levels, samples=10,
                        tol: float = 1e-6, box=None, rng=None, mean_curvature: bool = False) -> IsoparametricVerdict:
    """Transnormality plus constancy of both Laplacians on every level."""
    pts = _points_for(model, field_, levels, samples, box, rng)
    verdict = transnormal_check(model, field_, levels, pts, tol)
    ok_hat = ok_sig = True
    closure = 0.0
    s_vanishes = True
    for lv in verdict.levels:
        for x in lv.points:
            L = laplacians(model, volume, field_, x)
            lv.hat.append(L.hat)
            lv.sigma.append(L.sigma)
            lv.closure.append(L.closure_residual)
            closure = max(closure, L.closure_residual)
            s_vanishes = s_vanishes and abs(L.s_grad) <= 1e-9
            if mean_curvature:
                lv.mean_curvature.append(level_set_shape(model, field_, x, volume).mean)
        t = lv.level
        verdict.spreads[t].update({"hat": _spread(lv.hat), "sigma": _spread(lv.sigma)})
        if mean_curvature:
            verdict.spreads[t]["mean_curvature"] = _spread(lv.mean_curvature)
        verdict.b_hat[t] = float(np.mean(lv.hat))
        verdict.b_sigma[t] = float(np.mean(lv.sigma))
        for name, vals in (("hat", lv.hat), ("sigma", lv.sigma)):
            if not _flat(vals, tol):
                if name == "hat":
                    ok_hat = False
                else:
                    ok_sig = False
                i, j = int(np.argmin(vals)), int(np.argmax(vals))
                verdict.worst[t] = {"quantity": name, "x_min": lv.points[i].tolist(), "min": vals[i],
                                    "x_max": lv.points[j].tolist(), "max": vals[j]}
    verdict.isoparametric_hat = bool(verdict.transnormal and ok_hat)
    verdict.isoparametric_sigma = bool(verdict.transnormal and ok_sig)
    verdict.max_closure_residual = closure
    if s_vanishes:
        verdict.notes.append("S(grad f) vanishes at every sample, so both Laplacians coincide")
    return verdict


def minkowski_dual_check(model: MetricModel, field_: ScalarField, levels, samples=10, tol: float = 1e-6,
                         box=None, rng=None) -> IsoparametricVerdict:
    """The same verdict from the dual metric alone: F*(df) = a(f), g*^ij(df) f_ij = b(f)."""
    if not model.minkowski:
        raise UnsupportedOperation("the dual-form check applies to Minkowski models")
    if not model.has_dual:
        raise UnsupportedOperation(f"{model.kind} has no closed-form dual")
    pts = _points_for(model, field_, levels, samples, box, rng)
    out, spreads, a, b, worst = [], {}, {}, {}, {}
    ok_a = ok_b = True
    for t, P in pts.items():
        avals, bvals = [], []
        for x in P:
            df = field_.differential(x)
            if not model.in_dual_cone(x, df):
                raise DualConeViolation(f"df = {list(df)} is outside the dual cone at {list(x)}")
            avals.append(eval_dual_metric(model, x, df))
            bvals.append(float(np.sum(dual_tensor(model, x, df).g * field_.hessian(x))))
        lv = LevelSetSample(t, P, avals, hat=bvals, sigma=list(bvals))
        out.append(lv)
        spreads[t] = {"F_grad": _spread(avals), "hat": _spread(bvals), "sigma": _spread(bvals)}
        a[t], b[t] = float(np.mean(avals)), float(np.mean(bvals))
        for name, vals in (("F_grad", avals), ("hat", bvals)):
            if not _flat(vals, tol):
                if name == "F_grad":
                    ok_a = False
                else:
                    ok_b = False
                i, j = int(np.argmin(vals)), int(np.argmax(vals))
                worst[t] = {"quantity": name, "x_min": P[i].tolist(), "min": vals[i], "x_max": P[j].tolist(), "max": vals[j]}
    return IsoparametricVerdict(ok_a, ok_a and ok_b, ok_a and ok_b, tol, out, spreads, a, b, dict(b),
                                notes=[SCOPE_NOTE, "dual form: no Legendre inversion used"], worst=worst)


__all__ = [
    "linear_field",
    "norm_field",
    "quadratic_field",
    "field_from_dict",
    "sample_level",
    "sample_levels",
    "LevelSetSample",
    "IsoparametricVerdict",
    "transnormal_check",
    "isoparametric_check",
    "minkowski_dual_check",
    "SCOPE_NOTE",
]
