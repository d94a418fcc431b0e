"""Legendre transformation between the cone and the dual cone.

Closed forms are used whenever the model provides the metric on the target
side; otherwise a damped Newton iteration inverts the transform (tolerance
1e-12, at most 50 steps, step halved whenever an iterate leaves the cone).
"""

from __future__ import annotations

import numpy as np

from .errors import NewtonDivergence, SingularTensor
from .models import MetricModel, as_vector
from .tensors import dual_sq_xi, primal_sq_y, require_cone, require_dual_cone

NEWTON_TOL = 1e-12
NEWTON_MAXITER = 50


def _grad_hess(jet):
    return 0.5 * jet.gradient(), 0.5 * jet.hessian()


def _newton(target: np.ndarray, start: np.ndarray, grad_hess, inside, what: str) -> np.ndarray:
    """Solve grad(z) = target for z, staying inside the admissible set."""
    z = np.asarray(start, dtype=float).copy()
    if not inside(z):
        raise NewtonDivergence(f"{what}: Newton seed {list(z)} is not admissible")
    scale = max(1.0, float(np.linalg.norm(target)))
    for _ in range(NEWTON_MAXITER):
        try:
            r, H = grad_hess(z)
        except (ArithmeticError, ValueError) as exc:
            raise NewtonDivergence(f"{what}: derivatives undefined at {list(z)}: {exc}") from exc
        r = r - target
        if np.linalg.norm(r) <= NEWTON_TOL * scale:
            return z
        try:
            step = np.linalg.solve(H, r)
        except np.linalg.LinAlgError as exc:
            raise NewtonDivergence(f"{what}: singular Jacobian at {list(z)}") from exc
        t = 1.0
        while not inside(z - t * step):
            t *= 0.5
            if t < 1e-12:
                raise NewtonDivergence(f"{what}: cannot stay inside the cone near {list(z)}")
        z = z - t * step
    r, _ = grad_hess(z)
    res = float(np.linalg.norm(r - target))
    if res <= 1e3 * NEWTON_TOL * scale:
        return z
    raise NewtonDivergence(f"{what}: no convergence after {NEWTON_MAXITER} iterations (residual {res:.3e})")


def legendre(model: MetricModel, x, y, check_cone: bool = True) -> np.ndarray:
    """xi_i = F F_{y^i}(x, y) = d(F^2/2)/dy^i."""
    x = as_vector(x, model.dim, "point")
    y = as_vector(y, model.dim, "tangent vector")
    if check_cone:
        model.check_point(x)
        require_cone(model, x, y)
    if model.has_primal:
        return 0.5 * primal_sq_y(model, x, y, 1).gradient()
    seed = model.dual_seed(x, y)
    return _newton(
        y,
        seed,
        lambda z: _grad_hess(dual_sq_xi(model, x, z, 2)),
        lambda z: model.in_dual_cone(x, z),
        "legendre",
    )


def legendre_inverse(model: MetricModel, x, xi, check_cone: bool = True) -> np.ndarray:
    """y^i = F* F*_{xi_i}(x, xi), or the Newton preimage when no dual is available."""
    x = as_vector(x, model.dim, "point")
    xi = as_vector(xi, model.dim, "covector")
    if check_cone:
        model.check_point(x)
        require_dual_cone(model, x, xi)
    if model.has_dual:
        return 0.5 * dual_sq_xi(model, x, xi, 1).gradient()
    seed = model.primal_seed(x, xi)
    try:
        return _newton(
            xi,
            seed,
            lambda z: _grad_hess(primal_sq_y(model, x, z, 2)),
            lambda z: model.in_cone(x, z),
            "legendre_inverse",
        )
    except SingularTensor as exc:  # pragma: no cover - defensive
        raise NewtonDivergence(str(exc)) from exc


__all__ = ["legendre", "legendre_inverse", "NEWTON_TOL", "NEWTON_MAXITER"]
