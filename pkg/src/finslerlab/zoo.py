"""Concrete metric families and the helpers built on top of them.

* the round three-sphere in its stereographic chart with the Hopf field,
* Kropina metrics from unit navigation data and the Killing test for the wind,
* the helicoid metric through its closed-form dual,
* the unit normal of models whose dual is of (alpha, beta) type,
* construction of any model from a JSON-style dictionary.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from . import jets
from .calculus import christoffel
from .engine import taylor
from .errors import ConeViolation, ConfigurationError, DomainViolation, NotUnitWind, UnsupportedOperation
from .models import (
    AlphaBetaMetric,
    DualAlphaBetaMetric,
    EuclideanMetric,
    HelicoidMetric,
    KropinaMetric,
    MetricModel,
    RiemannianMetric,
    UNIT_WIND_TOL,
    dot,
    euclidean_h,
    round_sphere_h,
)
from .phi import ConstantOne, phi_from_dict

# ---------------------------------------------------------------------------
# the three-sphere chart


def s3_point(z):
    """Stereographic parametrization R^3 -> S^3 minus the north pole (0,0,0,1)."""
    r2 = dot(z, z)
    d = 1.0 + r2
    return [2.0 * z[0] / d, 2.0 * z[1] / d, 2.0 * z[2] / d, (r2 - 1.0) / d]


def s3_chart(X) -> np.ndarray:
    """Inverse of :func:`s3_point`."""
    X = np.asarray(X, dtype=float)
    return X[:3] / (1.0 - X[3])


def hopf_field(z):
    """Chart components of the Hopf field V(X) = (-X2, X1, -X4, X3)."""
    X = s3_point(z)
    V = [-X[1], X[0], -X[3], X[2]]
    d = 1.0 - X[3]
    return [V[i] / d + X[i] * V[3] / (d * d) for i in range(3)]


def s3_hopf_kropina() -> KropinaMetric:
    return KropinaMetric(round_sphere_h(3), hopf_field, wind_name="hopf")


def s3_round() -> RiemannianMetric:
    return round_sphere_h(3)


# ---------------------------------------------------------------------------
# Kropina from navigation data


def kropina_from_navigation(h: RiemannianMetric, W: Callable, samples: Sequence | None = None,
                            wind_name="custom", constant_wind: bool = False) -> KropinaMetric:
    """F = h^2/(2 W_0) together with its dual F* = h* + W; the wind is checked on ``samples``."""
    model = KropinaMetric(h, W, wind_name=wind_name, constant_wind=constant_wind)
    pts = [np.zeros(h.dim)] if samples is None else samples
    for x in pts:
        model.check_point(np.asarray(x, dtype=float))
    return model


def wind_covariant_derivative(h: RiemannianMetric, W: Callable, x) -> np.ndarray:
    """D[i, j] = W_{i|j} = d_j W_i - Gamma^k_ij W_k with W_i = h_ik W^k."""
    x = np.asarray(x, dtype=float)
    m = h.dim
    jw = taylor(lambda z: np.array(h.flat(list(z), W(list(z))), dtype=object), x, 1)
    Wl = np.array([c.value for c in jw])
    dW = np.array([c.gradient() for c in jw])
    return dW - np.einsum("kij,k->ij", christoffel(h, x), Wl)


@dataclass
class KillingSample:
    x: list
    r_max: float
    s: np.ndarray
    s_lower: np.ndarray


@dataclass
class KillingReport:
    passed: bool
    max_r: float
    tol: float
    samples: list = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "passed": self.passed,
            "max_r": self.max_r,
            "tol": self.tol,
            "samples": [
                {"x": s.x, "r_max": s.r_max, "s_ij": s.s.tolist(), "s_j": s.s_lower.tolist()} for s in self.samples
            ],
        }


def killing_check(h: RiemannianMetric, W: Callable, samples, tol: float = 1e-8) -> KillingReport:
    """Largest entry of r_ij = (W_i|j + W_j|i)/2 over the samples, plus s_ij and s_j."""
    out = []
    worst = 0.0
    for x in samples:
        x = np.asarray(x, dtype=float)
        D = wind_covariant_derivative(h, W, x)
        r = 0.5 * (D + D.T)
        s = 0.5 * (D - D.T)
        Wv = np.asarray(jets.values(W(list(x))), dtype=float)
        rmax = float(np.abs(r).max())
        worst = max(worst, rmax)
        out.append(KillingSample(list(map(float, x)), rmax, s, Wv @ s))
    return KillingReport(worst <= tol, worst, tol, out)


def s_upper_zero(h: RiemannianMetric, W: Callable, x, y) -> np.ndarray:
    """s^i_0 = h^ik s_kj y^j."""
    D = wind_covariant_derivative(h, W, x)
    s = 0.5 * (D - D.T)
    return np.linalg.solve(h.h_matrix(x), s @ np.asarray(y, dtype=float))


def kropina_tensor_closed_form(model: KropinaMetric, x, y) -> np.ndarray:
    """g_ij = (F/W0)(h_ij - (y_i W_j + y_j W_i)/W0 + h^2 W_i W_j / W0^2) + F_i F_j.

    Here y_i = h_ik y^k = h h_{y^i} and W_i = h_ik W^k.
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    hm = model.h.h_matrix(x)
    Wl = hm @ np.asarray(jets.values(model.W(list(x))), dtype=float)
    yl = hm @ y
    h2 = float(y @ hm @ y)
    w0 = float(Wl @ y)
    F = h2 / (2.0 * w0)
    Fy = yl / w0 - h2 * Wl / (2.0 * w0 * w0)
    inner = hm - (np.outer(yl, Wl) + np.outer(Wl, yl)) / w0 + h2 * np.outer(Wl, Wl) / w0**2
    return F / w0 * inner + np.outer(Fy, Fy)


# ---------------------------------------------------------------------------
# helicoid dual metric


def helicoid_dual_metric(a: float) -> Callable:
    """xi -> sqrt(xi1^2+xi2^2-a^2 xi3^2) - a|xi3| atan(sqrt(...)/(a|xi3|)) on its cone."""
    a = float(a)

    def fstar(xi) -> float:
        xi = np.asarray(xi, dtype=float)
        rho2 = xi[0] ** 2 + xi[1] ** 2
        t = abs(xi[2])
        if not (rho2 > a * a * t * t and t > 0):
            raise ConeViolation(f"xi = {list(xi)} is outside the dual cone of the helicoid metric")
        q = math.sqrt(rho2 - a * a * t * t)
        return q - a * t * math.atan(q / (a * t))

    return fstar


# ---------------------------------------------------------------------------
# unit normal of dual-(alpha, beta) models


def _dual_ab_parts(model: MetricModel):
    """(alpha, b^i(x), (phi, phi') of s) for models with F* = alpha* phi(beta*/alpha*)."""
    if isinstance(model, DualAlphaBetaMetric):
        return model.alpha, model.beta_star, model.phi
    if isinstance(model, KropinaMetric):
        return model.h, model.W, _AffinePhi()
    if isinstance(model, RiemannianMetric):
        return model, lambda x: [0.0] * model.dim, ConstantOne()
    if isinstance(model, AlphaBetaMetric) and isinstance(model.phi, ConstantOne):
        return model.alpha, lambda x: [0.0] * model.dim, ConstantOne()
    raise UnsupportedOperation(f"{model.kind}: dual is not of (alpha, beta) form")


class _AffinePhi(ConstantOne):
    """phi(s) = 1 + s: the Kropina dual h* + W written in (alpha, beta) form."""

    name = "affine"

    def domain(self):
        return [(-1.0, math.inf)]

    def phi(self, s):
        return 1.0 + s

    def derivatives(self, s):
        return 1.0 + s, 1.0, 0.0


def alpha_beta_normal(model: MetricModel, nbar, x) -> np.ndarray:
    """n = (phi - s phi') nbar + phi' b with s = beta(nbar) for an alpha-unit normal nbar."""
    x = np.asarray(x, dtype=float)
    nbar = np.asarray(nbar, dtype=float)
    alpha, bfun, phi = _dual_ab_parts(model)
    b = np.asarray(jets.values(bfun(list(x))), dtype=float)
    s = float(alpha.inner(list(x), list(b), list(nbar)))
    if not phi.contains(s):
        raise DomainViolation(f"s = {s!r} lies outside the admissible domain of {phi.name}")
    b0 = getattr(model, "b0", None)
    if b0 is not None and abs(s) >= b0:
        raise DomainViolation(f"|s| = {abs(s)!r} >= b0 = {b0!r}")
    p, dp, _ = phi.derivatives(s)
    return (p - s * dp) * nbar + dp * b


# ---------------------------------------------------------------------------
# JSON construction


def _h_from_name(name, dim: int) -> RiemannianMetric:
    if name in (None, "euclidean"):
        return euclidean_h(dim)
    if name in ("round-sphere", "sphere"):
        return round_sphere_h(dim)
    raise ConfigurationError(f"unknown Riemannian chart metric {name!r}")


def _vector_field(spec, dim: int, h_name=None):
    """Constant list, 'hopf', or {'matrix': A, 'offset': c} giving W(x) = A x + c."""
    if isinstance(spec, str):
        if spec == "hopf":
            if dim != 3 or h_name not in ("round-sphere", "sphere"):
                raise ConfigurationError("the Hopf wind lives on the round S^3 chart (h='round-sphere', dim=3)")
            return hopf_field, True
        raise ConfigurationError(f"unknown vector field {spec!r}")
    if isinstance(spec, dict):
        A = np.asarray(spec.get("matrix", np.zeros((dim, dim))), dtype=float)
        c = [float(v) for v in spec.get("offset", [0.0] * dim)]
        if A.shape != (dim, dim) or len(c) != dim:
            raise ConfigurationError("affine vector field has the wrong shape")
        rows = A.tolist()
        return (lambda x: [sum((rows[i][j] * x[j] for j in range(dim)), c[i]) for i in range(dim)]), not np.any(A)
    vec = [float(v) for v in spec]
    if len(vec) != dim:
        raise ConfigurationError(f"vector has {len(vec)} components, expected {dim}")
    return (lambda x: vec), False


def model_from_dict(spec: dict) -> MetricModel:
    """Build a MetricModel from a JSON description."""
    if not isinstance(spec, dict) or "kind" not in spec:
        raise ConfigurationError("metric description needs a 'kind'")
    kind = spec["kind"]
    try:
        if kind == "euclidean":
            return EuclideanMetric(int(spec.get("dim", 3)))
        if kind == "riemannian":
            dim = int(spec.get("dim", 3))
            return _h_from_name(spec.get("h", "euclidean"), dim)
        if kind == "alpha-beta":
            dim = int(spec.get("dim", 3))
            alpha_name = spec.get("alpha", "euclidean")
            alpha = _h_from_name(alpha_name, dim)
            b, _ = _vector_field(spec["b"], dim, alpha_name)
            constant = not isinstance(spec["b"], (str, dict)) and alpha_name == "euclidean"
            return AlphaBetaMetric(alpha, b, phi_from_dict(spec["phi"]), float(spec["b0"]),
                                   b_name=spec["b"], constant=constant)
        if kind == "dual-alpha-beta":
            dim = int(spec.get("dim", 3))
            alpha_name = spec.get("alpha", "euclidean")
            beta, _ = _vector_field(spec["beta_star"], dim, alpha_name)
            constant = not isinstance(spec["beta_star"], (str, dict)) and alpha_name == "euclidean"
            return DualAlphaBetaMetric(_h_from_name(alpha_name, dim), beta, phi_from_dict(spec["phi"]),
                                       constant=constant, beta_name=spec["beta_star"])
        if kind == "helicoid":
            return HelicoidMetric(float(spec.get("a", 1.0)), float(spec.get("b", 1.0)),
                                  corrupt=bool(spec.get("corrupt", False)))
        if kind == "kropina":
            dim = int(spec.get("dim", 3))
            h_name = spec.get("h", "euclidean")
            h = _h_from_name(h_name, dim)
            W, _ = _vector_field(spec["W"], dim, h_name)
            constant = h_name == "euclidean" and not isinstance(spec["W"], (str, dict))
            model = KropinaMetric(h, W, wind_name=spec["W"], constant_wind=constant)
            if constant:
                model.check_point(np.zeros(dim))
            return model
    except KeyError as exc:
        raise ConfigurationError(f"metric description of kind {kind!r} is missing {exc}") from exc
    raise ConfigurationError(f"unknown metric kind {kind!r}")


__all__ = [
    "s3_point",
    "s3_chart",
    "hopf_field",
    "s3_hopf_kropina",
    "s3_round",
    "kropina_from_navigation",
    "killing_check",
    "KillingReport",
    "wind_covariant_derivative",
    "s_upper_zero",
    "helicoid_dual_metric",
    "kropina_tensor_closed_form",
    "alpha_beta_normal",
    "model_from_dict",
    "NotUnitWind",
    "UNIT_WIND_TOL",
]
