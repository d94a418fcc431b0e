"""Spray, Chern connection, curvature, S-curvature, gradients and Laplacians.

All coefficient formulas are evaluated on Taylor jets of F^2 in the 2m
variables (x, y); the spray coefficients are themselves carried as jets so
that their y- and x-derivatives come for free.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from . import jets
from .duality import legendre, legendre_inverse
from .engine import taylor
from .errors import (
    ConeViolation,
    DegenerateFlag,
    DualConeViolation,
    NewtonDivergence,
    OutOfDomain,
    UnsupportedOperation,
)
from .jets import Jet
from .models import KropinaMetric, MetricModel, RiemannianMetric, as_vector
from .tensors import (
    dual_sq_xxi,
    fundamental_tensor,
    primal_sq_xy,
    require_cone,
)

FLAG_EPS = 1e-14


# ---------------------------------------------------------------------------
# value types


@dataclass(frozen=True)
class SprayData:
    G: np.ndarray
    N: np.ndarray
    Gamma: np.ndarray


@dataclass(frozen=True)
class CurvatureData:
    R: np.ndarray
    K: float | None = None


class ScalarField:
    """A smooth function of the chart point written with jet-aware arithmetic."""

    def __init__(self, f: Callable, name: str = "custom", params: dict | None = None):
        self.f = f
        self.name = name
        self.params = params or {}

    def __call__(self, x) -> float:
        return float(self.f(list(np.asarray(x, dtype=float))))

    def differential(self, x) -> np.ndarray:
        j = taylor(lambda z: self.f(list(z)), np.asarray(x, dtype=float), 1)
        return j.gradient()

    def hessian(self, x) -> np.ndarray:
        j = taylor(lambda z: self.f(list(z)), np.asarray(x, dtype=float), 2)
        return j.hessian()

    def describe(self) -> dict:
        return {"field": self.name, **self.params}


class VolumeForm:
    """d mu = sigma(x) dx^1 ... dx^m."""

    def __init__(self, sigma: Callable, kind: str = "custom"):
        self.sigma = sigma
        self.kind = kind

    def __call__(self, x) -> float:
        return float(self.sigma(list(np.asarray(x, dtype=float))))

    def log_gradient(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        j = taylor(lambda z: jets.log(self.sigma(list(z))), x, 1)
        if j.value != j.value:
            raise OutOfDomain(f"volume density is not positive at {list(x)}")
        return j.gradient()

    @classmethod
    def lebesgue(cls) -> "VolumeForm":
        return cls(lambda x: 1.0 + 0.0 * x[0], "lebesgue")

    @classmethod
    def riemannian(cls, h: RiemannianMetric) -> "VolumeForm":
        return cls(h.volume_density, "riemannian")

    @classmethod
    def busemann_hausdorff(cls, model: MetricModel) -> "VolumeForm":
        # the Kropina unit ball is a translate of the h unit ball, so the densities coincide
        if isinstance(model, KropinaMetric):
            return cls(model.h.volume_density, "busemann-hausdorff")
        if isinstance(model, RiemannianMetric):
            return cls(model.volume_density, "busemann-hausdorff")
        if model.minkowski:
            raise UnsupportedOperation("Busemann-Hausdorff density of a general Minkowski norm is not implemented; use lebesgue")
        raise UnsupportedOperation(f"Busemann-Hausdorff volume not available for {model.kind}")


# ---------------------------------------------------------------------------
# spray machinery


def _spray_jets(model: MetricModel, x: np.ndarray, y: np.ndarray, order: int):
    """Jets (in (x, y), truncated at ``order - 2``) of g_ij and G^i."""
    if not model.has_primal:
        raise UnsupportedOperation(f"{model.kind}: spray of a non-Minkowski dual-only model is not implemented")
    m = model.dim
    Z = primal_sq_xy(model, x, y, order)
    low = order - 2
    dy = [Z.deriv(m + l) for l in range(m)]
    dx = [Z.deriv(k) for k in range(m)]
    g = [[0.5 * dy[i].deriv(m + j) for j in range(m)] for i in range(m)]
    yv = [Jet.variable(m + k, float(y[k]), 2 * m, low) for k in range(m)]
    rhs = []
    for l in range(m):
        acc = -dx[l].truncate(low)
        for k in range(m):
            acc = acc + dx[k].deriv(m + l) * yv[k]
        rhs.append(acc)
    G = [0.25 * c for c in jets.solve(g, rhs)]
    return g, G


def _zero_spray(m: int) -> SprayData:
    return SprayData(np.zeros(m), np.zeros((m, m)), np.zeros((m, m, m)))


def _prepare(model, x, y):
    x = as_vector(x, model.dim, "point")
    y = as_vector(y, model.dim, "tangent vector")
    model.check_point(x)
    require_cone(model, x, y)
    return x, y


def spray(model: MetricModel, x, y) -> SprayData:
    """G^i, N^i_j = dG^i/dy^j and the Chern coefficients with reference vector y."""
    x, y = _prepare(model, x, y)
    m = model.dim
    if model.minkowski:
        return _zero_spray(m)
    g, G = _spray_jets(model, x, y, 3)
    Gv = np.array([c.value for c in G])
    N = np.array([[G[i].partial(_unit(2 * m, m + j)) for j in range(m)] for i in range(m)])
    gv = np.array([[g[i][j].value for j in range(m)] for i in range(m)])
    # first derivatives of g in x and y
    gx = np.array([[[g[i][j].partial(_unit(2 * m, k)) for k in range(m)] for j in range(m)] for i in range(m)])
    gy = np.array([[[g[i][j].partial(_unit(2 * m, m + k)) for k in range(m)] for j in range(m)] for i in range(m)])
    # delta_k g_ij = d_{x^k} g_ij - N^r_k d_{y^r} g_ij
    dg = gx - np.einsum("rk,ijr->ijk", N, gy)
    ginv = np.linalg.inv(gv)
    # Gamma^i_jk = 1/2 g^il (delta_k g_lj + delta_j g_lk - delta_l g_jk)
    T = dg.transpose(0, 1, 2) + np.einsum("lkj->ljk", dg) - np.einsum("jkl->ljk", dg)
    Gamma = 0.5 * np.einsum("il,ljk->ijk", ginv, T)
    return SprayData(Gv, N, Gamma)


def _unit(n: int, i: int) -> list[int]:
    a = [0] * n
    a[i] = 1
    return a


def _pair(n: int, i: int, j: int) -> list[int]:
    a = [0] * n
    a[i] += 1
    a[j] += 1
    return a


def spray_curvature(model: MetricModel, x, y) -> np.ndarray:
    """R^i_k = 2 G^i_{x^k} - y^j G^i_{x^j y^k} + 2 G^j G^i_{y^j y^k} - G^i_{y^j} G^j_{y^k}."""
    x, y = _prepare(model, x, y)
    m = model.dim
    if model.minkowski:
        return np.zeros((m, m))
    _, G = _spray_jets(model, x, y, 4)
    n2 = 2 * m
    Gv = np.array([c.value for c in G])
    Gx = np.array([[G[i].partial(_unit(n2, k)) for k in range(m)] for i in range(m)])
    Gy = np.array([[G[i].partial(_unit(n2, m + k)) for k in range(m)] for i in range(m)])
    Gxy = np.array([[[G[i].partial(_pair(n2, j, m + k)) for k in range(m)] for j in range(m)] for i in range(m)])
    Gyy = np.array([[[G[i].partial(_pair(n2, m + j, m + k)) for k in range(m)] for j in range(m)] for i in range(m)])
    return (
        2.0 * Gx
        - np.einsum("j,ijk->ik", y, Gxy)
        + 2.0 * np.einsum("j,ijk->ik", Gv, Gyy)
        - Gy @ Gy
    )


def flag_curvature(model: MetricModel, x, y, v) -> float:
    """K(y, v) = g_y(R_y v, v) / (g_y(y, y) g_y(v, v) - g_y(y, v)^2)."""
    x, y = _prepare(model, x, y)
    v = as_vector(v, model.dim, "transverse vector")
    g = fundamental_tensor(model, x, y).g
    gyy, gvv, gyv = y @ g @ y, v @ g @ v, y @ g @ v
    denom = gyy * gvv - gyv * gyv
    if denom <= FLAG_EPS * gyy * gvv:
        raise DegenerateFlag(f"v = {list(v)} is (nearly) parallel to y = {list(y)}")
    R = spray_curvature(model, x, y)
    return float((R @ v) @ g @ v / denom)


def curvature(model: MetricModel, x, y, v=None) -> CurvatureData:
    R = spray_curvature(model, x, y)
    K = flag_curvature(model, x, y, v) if v is not None else None
    return CurvatureData(R, K)


def covariant_derivative(model: MetricModel, w, v, X: Callable, x) -> np.ndarray:
    """D^w_v X = v^j dX^i/dx^j + Gamma^i_jk(w) v^j X^k."""
    x = as_vector(x, model.dim, "point")
    v = as_vector(v, model.dim, "direction")
    Gamma = spray(model, x, w).Gamma
    jx = taylor(lambda z: X(list(z)), x, 1)
    Xv = np.array([c.value for c in jx])
    dX = np.array([c.gradient() for c in jx])
    return dX @ v + np.einsum("ijk,j,k->i", Gamma, v, Xv)


def s_curvature(model: MetricModel, volume: VolumeForm, x, y) -> float:
    """S = dG^i/dy^i - y^i d(ln sigma)/dx^i."""
    x, y = _prepare(model, x, y)
    N = spray(model, x, y).N
    return float(np.trace(N) - y @ volume.log_gradient(x))


# ---------------------------------------------------------------------------
# gradients and Laplacians


def gradient(model: MetricModel, field: ScalarField, x) -> np.ndarray:
    """nabla f = L^{-1}(df), defined where df lies in the dual cone."""
    x = as_vector(x, model.dim, "point")
    df = field.differential(x)
    if not np.any(df):
        raise OutOfDomain(f"df vanishes at {list(x)}")
    try:
        return legendre_inverse(model, x, df)
    except (DualConeViolation, NewtonDivergence) as exc:
        raise OutOfDomain(f"df = {list(df)} is outside the dual cone at {list(x)}") from exc


def _grad_jacobian_primal(model, x, y, hess_f) -> np.ndarray:
    """d(nabla f)/dx from differentiating L(x, nabla f(x)) = df(x)."""
    m = model.dim
    Z = primal_sq_xy(model, x, y, 2)
    H = 0.5 * Z.hessian()
    g = H[m:, m:]
    P = H[m:, :m]  # P[i, j] = d_{y^i} d_{x^j} (F^2 / 2)
    return np.linalg.solve(g, hess_f - P)


def _grad_jacobian_dual(model, x, xi, hess_f) -> np.ndarray:
    """d(nabla f)/dx from nabla f = d_xi (F*^2 / 2)(x, df(x))."""
    m = model.dim
    Z = dual_sq_xxi(model, x, xi, 2)
    H = 0.5 * Z.hessian()
    return H[m:, :m] + H[m:, m:] @ hess_f


@dataclass(frozen=True)
class LaplacianData:
    grad: np.ndarray
    hat: float
    sigma: float
    s_grad: float
    hessian: np.ndarray

    @property
    def closure_residual(self) -> float:
        return abs(self.sigma - (self.hat - self.s_grad))


def laplacians(model: MetricModel, volume: VolumeForm, field: ScalarField, x) -> LaplacianData:
    """Both Laplacians of f at x through independent routes.

    hat: trace of X -> D_X nabla f, i.e. div(nabla f) + N^i_i(nabla f), with the
    Jacobian of nabla f taken from the primal Legendre equation when possible.
    sigma: (1/sigma) d_i(sigma nabla f^i), Jacobian taken from the dual side when
    possible.  S(nabla f) comes from the spray, so the returned data also gives
    the closure residual of Delta_sigma = hat Delta - S(nabla f).
    """
    x = as_vector(x, model.dim, "point")
    y = gradient(model, field, x)
    xi = field.differential(x)
    hf = field.hessian(x)
    J1 = _grad_jacobian_primal(model, x, y, hf) if model.has_primal else _grad_jacobian_dual(model, x, xi, hf)
    J2 = _grad_jacobian_dual(model, x, xi, hf) if model.has_dual else J1
    sp = spray(model, x, y)
    Dgrad = J1 + sp.N  # (D_X nabla f)^i = J^i_j X^j + N^i_j X^j
    hat = float(np.trace(Dgrad))
    sig = float(np.trace(J2) + y @ volume.log_gradient(x))
    s_grad = float(np.trace(sp.N) - y @ volume.log_gradient(x))
    g = fundamental_tensor(model, x, y).g
    return LaplacianData(y, hat, sig, s_grad, g @ Dgrad)


# ---------------------------------------------------------------------------
# Riemannian oracles


def christoffel(h: RiemannianMetric, x) -> np.ndarray:
    """Levi-Civita symbols of h from first derivatives of h_ij."""
    x = np.asarray(x, dtype=float)
    m = h.dim
    jh = taylor(lambda z: np.array(h.h(list(z)), dtype=object), x, 1)
    hv = np.array([[jh[i, j].value for j in range(m)] for i in range(m)])
    dh = np.array([[jh[i, j].gradient() for j in range(m)] for i in range(m)])  # dh[l, j, k] = d_k h_lj
    T = np.einsum("lkj->ljk", dh) + dh - np.einsum("jkl->ljk", dh)
    return 0.5 * np.einsum("il,ljk->ijk", np.linalg.inv(hv), T)


__all__ = [
    "SprayData",
    "CurvatureData",
    "LaplacianData",
    "ScalarField",
    "VolumeForm",
    "spray",
    "spray_curvature",
    "flag_curvature",
    "curvature",
    "covariant_derivative",
    "s_curvature",
    "gradient",
    "laplacians",
    "christoffel",
    "ConeViolation",
]
