"""Pointwise metric evaluation: F, cone membership, fundamental and Cartan tensors."""

from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations_with_replacement, permutations

import numpy as np

from .engine import FD, current_mode, taylor
from .errors import ConeViolation, DualConeViolation, SingularTensor
from .models import MetricModel, as_vector


@dataclass(frozen=True)
class TensorPack:
    g: np.ndarray
    g_inv: np.ndarray
    cartan: np.ndarray


def derivative_tensor(jet, k: int, offset: int, m: int) -> np.ndarray:
    """Full symmetric array of k-th partials of ``jet`` in variables offset..offset+m-1."""
    out = np.zeros((m,) * k)
    for combo in combinations_with_replacement(range(m), k):
        alpha = [0] * jet.nvars
        for c in combo:
            alpha[offset + c] += 1
        val = jet.partial(alpha)
        for perm in set(permutations(combo)):
            out[perm] = val
    return out


def _points(model: MetricModel, x, y, what="tangent vector"):
    x = as_vector(x, model.dim, "point")
    y = as_vector(y, model.dim, what)
    return x, y


def require_cone(model: MetricModel, x, y) -> None:
    if not model.in_cone(x, y):
        raise ConeViolation(f"y = {list(map(float, y))} is outside the cone at x = {list(map(float, x))}")


def require_dual_cone(model: MetricModel, x, xi) -> None:
    if not model.in_dual_cone(x, xi):
        raise DualConeViolation(f"xi = {list(map(float, xi))} is outside the dual cone at x = {list(map(float, x))}")


def in_cone(model: MetricModel, x, y) -> bool:
    return model.in_cone(x, y)


def in_dual_cone(model: MetricModel, x, xi) -> bool:
    return model.in_dual_cone(x, xi)


# ---------------------------------------------------------------------------
# jets of the squared metrics


FIBER_STEP = 0.25
CHART_STEP = 0.5


def _step_scale(inside_xv, x, v):
    """Finite-difference step lengths for jets of F^2 around (x, v).

    F^2 is homogeneous along the fiber, so fiber steps follow |v|; conic
    metrics vary on the angular width of the cone, hence the factor below 1.
    Steps that leave the domain are halved by the engine, and third and fourth
    derivatives adapt their step by extrapolation.
    """
    if current_mode() != FD:
        return None
    x = np.asarray(x, dtype=float)
    n = max(float(np.linalg.norm(v)), 1e-300)
    fiber = np.full(len(v), FIBER_STEP * n)
    if len(x) == 0:
        return fiber
    return np.concatenate([CHART_STEP * np.maximum(1.0, np.abs(x)), fiber])


def _primal_inside(model):
    return lambda x, y: model.in_cone(x, y)


def _dual_inside(model):
    return lambda x, xi: model.in_dual_cone(x, xi)


def primal_sq_y(model: MetricModel, x, y, order: int):
    """Jet of F^2(x, .) around y (x frozen)."""
    xl = list(x)
    scale = _step_scale(lambda _x, w: model.in_cone(xl, w), [], y)
    return taylor(lambda z: model.primal(xl, list(z)) ** 2, y, order, scale=scale)


def primal_sq_xy(model: MetricModel, x, y, order: int):
    """Jet of F^2 in the 2m variables (x, y)."""
    m = model.dim
    return taylor(lambda z: model.primal(list(z[:m]), list(z[m:])) ** 2, np.concatenate([x, y]), order,
                  scale=_step_scale(_primal_inside(model), x, y))


def dual_sq_xi(model: MetricModel, x, xi, order: int):
    xl = list(x)
    scale = _step_scale(lambda _x, w: model.in_dual_cone(xl, w), [], xi)
    return taylor(lambda z: model.dual(xl, list(z)) ** 2, xi, order, scale=scale)


def dual_sq_xxi(model: MetricModel, x, xi, order: int):
    m = model.dim
    return taylor(lambda z: model.dual(list(z[:m]), list(z[m:])) ** 2, np.concatenate([x, xi]), order,
                  scale=_step_scale(_dual_inside(model), x, xi))


def _check_pd(g: np.ndarray, where: str) -> None:
    try:
        np.linalg.cholesky(0.5 * (g + g.T))
    except np.linalg.LinAlgError as exc:
        raise SingularTensor(f"tensor is not positive definite at {where}: eigenvalues {np.linalg.eigvalsh(g)}") from exc


def dual_tensor(model: MetricModel, x, xi) -> TensorPack:
    """g*^{ij} = Hessian of F*^2/2 in xi, its inverse and the dual Cartan tensor."""
    x, xi = _points(model, x, xi, "covector")
    model.check_point(x)
    require_dual_cone(model, x, xi)
    j = dual_sq_xi(model, x, xi, 3)
    gs = 0.5 * j.hessian()
    _check_pd(gs, f"x={list(x)}, xi={list(xi)}")
    cs = 0.25 * derivative_tensor(j, 3, 0, model.dim)
    return TensorPack(gs, np.linalg.inv(gs), cs)


# ---------------------------------------------------------------------------
# public operations


def eval_metric(model: MetricModel, x, y) -> float:
    """F(x, y) for y in the cone."""
    x, y = _points(model, x, y)
    model.check_point(x)
    require_cone(model, x, y)
    if model.has_primal:
        return float(model.primal(list(x), list(y)))
    from .duality import legendre

    xi = legendre(model, x, y, check_cone=False)
    return float(model.dual(list(x), list(xi)))


def eval_dual_metric(model: MetricModel, x, xi) -> float:
    x, xi = _points(model, x, xi, "covector")
    model.check_point(x)
    require_dual_cone(model, x, xi)
    if model.has_dual:
        return float(model.dual(list(x), list(xi)))
    from .duality import legendre_inverse

    y = legendre_inverse(model, x, xi, check_cone=False)
    return float(model.primal(list(x), list(y)))


def fundamental_tensor(model: MetricModel, x, y) -> TensorPack:
    """g_ij = Hessian of F^2/2 in y, with its inverse and C_ijk = (1/2) dg_ij/dy^k."""
    x, y = _points(model, x, y)
    model.check_point(x)
    require_cone(model, x, y)
    where = f"x={list(x)}, y={list(y)}"
    if model.has_primal:
        j = primal_sq_y(model, x, y, 3)
        g = 0.5 * j.hessian()
        _check_pd(g, where)
        cartan = 0.25 * derivative_tensor(j, 3, 0, model.dim)
        return TensorPack(g, np.linalg.inv(g), cartan)
    # dual-only model: g(y) = g*(L(y))^{-1}, C_ijk = -g_ia g_jb g_kc C*^{abc}
    from .duality import legendre

    xi = legendre(model, x, y, check_cone=False)
    d = dual_tensor(model, x, xi)
    g = d.g_inv
    _check_pd(g, where)
    cartan = -np.einsum("ia,jb,kc,abc->ijk", g, g, g, d.cartan)
    return TensorPack(g, d.g, cartan)


__all__ = [
    "TensorPack",
    "eval_metric",
    "eval_dual_metric",
    "in_cone",
    "in_dual_cone",
    "fundamental_tensor",
    "dual_tensor",
    "derivative_tensor",
    "require_cone",
    "require_dual_cone",
    "primal_sq_y",
    "primal_sq_xy",
    "dual_sq_xi",
    "dual_sq_xxi",
]
