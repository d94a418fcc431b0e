"""Derivative engine: Taylor jets of plain functions, exact or finite-difference.

``taylor(fn, z0, order)`` returns the jets of ``fn`` around ``z0``.  In the
default ``exact`` mode ``fn`` is evaluated once on variable jets.  In ``fd``
mode ``fn`` is only ever called on floats and each Taylor coefficient is
assembled from fourth-order-accurate central difference stencils, so every
downstream computation (which only manipulates jets) runs unchanged.

The mode is a context variable so concurrent evaluations never share it.
"""

from __future__ import annotations

import contextlib
import contextvars
import math
from typing import Callable, Iterator, Sequence

import numpy as np

from .jets import Jet, _factorials, _indices

EXACT = "exact"
FD = "fd"

_MODE: contextvars.ContextVar[str] = contextvars.ContextVar("finslerlab_derivatives", default=EXACT)

_EPS = np.finfo(float).eps
_MAX_HALVINGS = 12
# adaptive extrapolation for third and fourth derivatives
_RIDDERS_MIN_DEG = 3
_RIDDERS_LEVELS = 5
_RIDDERS_START = 4.0

# offsets and weights of fourth-order-accurate central stencils, per derivative order
_STENCILS = {
    0: ((0,), (1.0,)),
    1: ((-2, -1, 1, 2), (1 / 12, -8 / 12, 8 / 12, -1 / 12)),
    2: ((-2, -1, 0, 1, 2), (-1 / 12, 16 / 12, -30 / 12, 16 / 12, -1 / 12)),
    3: ((-3, -2, -1, 1, 2, 3), (1 / 8, -1.0, 13 / 8, -13 / 8, 1.0, -1 / 8)),
    4: ((-3, -2, -1, 0, 1, 2, 3), (-1 / 6, 2.0, -13 / 2, 28 / 3, -13 / 2, 2.0, -1 / 6)),
}


def current_mode() -> str:
    return _MODE.get()


@contextlib.contextmanager
def derivative_mode(mode: str) -> Iterator[None]:
    """Temporarily switch between ``"exact"`` and ``"fd"`` derivatives."""
    if mode not in (EXACT, FD):
        raise ValueError(f"unknown derivative mode {mode!r}")
    token = _MODE.set(mode)
    try:
        yield
    finally:
        _MODE.reset(token)


def _wrap(out, nvars: int, order: int):
    if isinstance(out, Jet):
        return out
    if isinstance(out, (list, tuple, np.ndarray)):
        return np.array([_wrap(o, nvars, order) for o in out], dtype=object)
    return Jet.constant(float(out), nvars, order)


def taylor(fn: Callable, z0: Sequence[float], order: int, mode: str | None = None, scale=None):
    """Jets of ``fn`` (scalar or array valued) around ``z0`` up to ``order``.

    ``scale`` sets the per-variable length of finite-difference steps (default
    ``max(1, |z0|)``); it is ignored by exact jets.
    """
    z0 = np.asarray(z0, dtype=float)
    mode = mode or current_mode()
    if mode == EXACT:
        z = np.array(Jet.variables(z0, order), dtype=object)
        return _wrap(fn(z), len(z0), order)
    return _fd_taylor(fn, z0, order, scale)


def _fd_taylor(fn: Callable, z0: np.ndarray, order: int, scale=None):
    if order > 4:
        raise ValueError("finite-difference jets are limited to order 4")
    p = len(z0)
    arr, _ = _indices(p, order)
    scale = np.maximum(1.0, np.abs(z0)) if scale is None else np.asarray(scale, dtype=float)
    cache: dict = {}

    def f_at(offsets: tuple):
        # None marks a point where fn left its domain
        try:
            return cache[offsets]
        except KeyError:
            pass
        try:
            val = np.asarray(fn(z0 + np.array(offsets)), dtype=float)
            val = float(val) if val.ndim == 0 else val
            ok = math.isfinite(val) if isinstance(val, float) else bool(np.all(np.isfinite(val)))
        except (ArithmeticError, ValueError):
            ok = False
        cache[offsets] = val if ok else None
        return cache[offsets]

    base = f_at((0.0,) * p)
    if base is None:
        raise ValueError(f"function is not finite at {z0.tolist()}")
    shape = np.shape(base)
    coefs = np.zeros((len(arr),) + shape)
    coefs[0] = base
    for i in range(1, len(arr)):
        alpha = arr[i]
        deg = int(alpha.sum())
        active = [v for v in range(p) if alpha[v]]
        grids = [_STENCILS[int(alpha[v])] for v in active]

        def estimate(h, alpha=alpha, active=active, grids=grids):
            try:
                acc = _stencil(f_at, grids, active, h, p, shape)
            except (ArithmeticError, ValueError):
                return None  # a stencil point left the domain
            return acc / np.prod([h[v] ** alpha[v] for v in active])

        h = _EPS ** (1.0 / (deg + 4)) * scale
        if deg >= _RIDDERS_MIN_DEG:
            coefs[i] = _ridders(estimate, h * _RIDDERS_START, z0)
            continue
        for _ in range(_MAX_HALVINGS):
            d = estimate(h)
            if d is not None:
                break
            h = 0.5 * h
        else:
            raise ValueError(f"no admissible finite-difference stencil around {z0.tolist()}")
        coefs[i] = d
    coefs /= _factorials(p, order).reshape((-1,) + (1,) * len(shape))
    if shape == ():
        return Jet(coefs, p, order)
    flat = coefs.reshape(len(arr), -1)
    jets = [Jet(flat[:, k].copy(), p, order) for k in range(flat.shape[1])]
    return np.array(jets, dtype=object).reshape(shape)


def _ridders(estimate, h0, z0):
    """Richardson tableau over halving steps; keeps the entry with the smallest
    error estimate.  Central stencils have error series in h^4, h^6, ..."""
    best, best_err, prev, last = None, math.inf, None, None
    for j in range(_RIDDERS_LEVELS + _MAX_HALVINGS):
        d = estimate(h0 * 0.5**j)
        if d is None:
            prev = None
            continue
        last = d
        row = [d]
        if prev is not None:
            for k in range(1, len(prev) + 1):
                fac = 2.0 ** (2 * k + 2)
                row.append((fac * row[k - 1] - prev[k - 1]) / (fac - 1.0))
                err = max(float(np.max(np.abs(row[k] - row[k - 1]))), float(np.max(np.abs(row[k] - prev[k - 1]))))
                if err <= best_err:
                    best, best_err = row[k], err
            # stop once roundoff makes the tableau diverge
            if float(np.max(np.abs(row[-1] - prev[-1]))) > 2.0 * best_err:
                break
        prev = row
        if len(row) > _RIDDERS_LEVELS:
            break
    if best is None:
        if last is None:
            raise ValueError(f"no admissible finite-difference stencil around {z0.tolist()}")
        return last
    return best


def _stencil(f_at, grids, active, h, p, shape):
    acc = 0.0 if shape == () else np.zeros(shape)
    for combo in _product(grids):
        w = 1.0
        off = [0.0] * p
        for v, (k, wk) in zip(active, combo):
            w *= wk
            off[v] = k * h[v]
        val = f_at(tuple(off))
        if val is None:
            raise ArithmeticError("stencil point outside the domain")
        acc = acc + w * val
    return acc


def _product(grids):
    if not grids:
        yield ()
        return
    offs, ws = grids[0]
    for rest in _product(grids[1:]):
        for k, w in zip(offs, ws):
            yield ((k, w),) + rest


# ---------------------------------------------------------------------------
# independent finite-difference oracles (float evaluations only)


def fd_gradient(fn: Callable[[np.ndarray], float], z0: Sequence[float]) -> np.ndarray:
    """Central differences with step cbrt(eps) * max(1, |z|)."""
    z0 = np.asarray(z0, dtype=float)
    h = np.cbrt(_EPS) * max(1.0, float(np.linalg.norm(z0)))
    out = np.empty(len(z0))
    for i in range(len(z0)):
        e = np.zeros(len(z0))
        e[i] = h
        out[i] = (fn(z0 + e) - fn(z0 - e)) / (2 * h)
    return out


def fd_hessian(fn: Callable[[np.ndarray], float], z0: Sequence[float]) -> np.ndarray:
    """Second central differences with step eps**(1/4) * max(1, |z|)."""
    z0 = np.asarray(z0, dtype=float)
    p = len(z0)
    h = _EPS**0.25 * max(1.0, float(np.linalg.norm(z0)))
    f0 = fn(z0)
    out = np.empty((p, p))
    for i in range(p):
        ei = np.zeros(p)
        ei[i] = h
        out[i, i] = (fn(z0 + ei) - 2 * f0 + fn(z0 - ei)) / h**2
        for j in range(i + 1, p):
            ej = np.zeros(p)
            ej[j] = h
            v = (fn(z0 + ei + ej) - fn(z0 + ei - ej) - fn(z0 - ei + ej) + fn(z0 - ei - ej)) / (4 * h * h)
            out[i, j] = out[j, i] = v
    return out


def tolerance_floor() -> float:
    """Smallest tolerance worth asserting under the active mode."""
    return 1e-4 if current_mode() == FD else 0.0


__all__ = [
    "EXACT",
    "FD",
    "current_mode",
    "derivative_mode",
    "taylor",
    "fd_gradient",
    "fd_hessian",
    "tolerance_floor",
]
