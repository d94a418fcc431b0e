"""Parametrized codimension-one immersions in a chart.

Each family exposes ``phi(u)`` written with jet-aware arithmetic, a default
co-orientation vector (the preferred side of the hypersurface) and default
sample ranges.  Surfaces in the round three-sphere live in its stereographic
chart.
"""

from __future__ import annotations

import itertools
import math
from typing import Callable, Sequence

import numpy as np

from . import jets
from .engine import taylor
from .errors import ConfigurationError, FrameDegenerate
from .zoo import s3_point

TWO_PI = 2.0 * math.pi


class Immersion:
    def __init__(self, name: str, dim: int, phi: Callable, coorient: Callable, ranges: dict,
                 params: dict | None = None):
        self.name = name
        self.dim = int(dim)
        self.n = self.dim - 1
        self._phi = phi
        self._coorient = coorient
        self.param_names = list(ranges)
        self.default_ranges = ranges
        self.params = params or {}

    # evaluation -------------------------------------------------------
    def phi(self, u):
        return self._phi(u)

    def point(self, u) -> np.ndarray:
        return np.asarray(jets.values(self._phi(list(np.asarray(u, dtype=float)))), dtype=float)

    def jets(self, u, order: int = 2):
        """Jets of the components of Phi around u."""
        return taylor(lambda z: np.array(self._phi(list(z)), dtype=object), np.asarray(u, dtype=float), order)

    def frame(self, u) -> np.ndarray:
        """m x n matrix with columns Phi_a."""
        j = self.jets(u, 1)
        E = np.array([c.gradient() for c in j])
        check_frame(E, u)
        return E

    def coorientation(self, u) -> np.ndarray:
        return np.asarray(self._coorient(np.asarray(u, dtype=float)), dtype=float)

    # sampling ---------------------------------------------------------
    def grid(self, spec: dict | None = None) -> list[np.ndarray]:
        spec = dict(spec or {})
        axes = []
        for name in self.param_names:
            lo, hi, k = spec.get(name, self.default_ranges[name])
            axes.append(np.linspace(float(lo), float(hi), int(k)))
        return [np.array(p) for p in itertools.product(*axes)]

    def describe(self) -> dict:
        return {"family": self.name, "dim": self.dim, **self.params}

    def __repr__(self) -> str:
        return f"Immersion({self.describe()})"


def check_frame(E: np.ndarray, u) -> None:
    sv = np.linalg.svd(E, compute_uv=False)
    if sv[-1] <= 1e-10 * max(1.0, sv[0]):
        raise FrameDegenerate(f"tangent frame has rank < {E.shape[1]} at u = {list(np.atleast_1d(u))}")


def conormal_jets(E) -> list:
    """Generalized cross product: nu_i = det[e_i, Phi_1, ..., Phi_n] (entries may be jets)."""
    m = len(E)
    out = []
    for i in range(m):
        M = [[(1.0 if r == i else 0.0)] + [E[r][a] for a in range(m - 1)] for r in range(m)]
        out.append(jets.det(M))
    return out


def _names(n: int) -> list[str]:
    return ["u", "v"] if n == 2 else [f"u{k + 1}" for k in range(n)]


def _sphere_coords(t, r):
    """Hyperspherical embedding of S^k(r) with k = len(t)."""
    k = len(t)
    out = []
    prod = r
    for i in range(k):
        out.append(prod * jets.cos(t[i]))
        prod = prod * jets.sin(t[i])
    out.append(prod)
    return out


def _complement_basis(normal: np.ndarray) -> np.ndarray:
    m = len(normal)
    q, _ = np.linalg.qr(np.column_stack([normal, np.eye(m)]))
    B = q[:, 1:m]
    if np.linalg.det(np.column_stack([normal, B])) < 0:
        B[:, 0] = -B[:, 0]
    return B


# ---------------------------------------------------------------------------
# families


def hyperplane(dim: int = 3, normal: Sequence[float] | None = None, offset: float = 0.0) -> Immersion:
    """{<normal, x> = offset}, orthonormally parametrized."""
    nvec = np.zeros(dim) if normal is None else np.asarray(normal, dtype=float)
    if normal is None:
        nvec[-1] = 1.0
    nvec = nvec / np.linalg.norm(nvec)
    B = _complement_basis(nvec)
    p = offset * nvec

    def phi(u):
        return [p[i] + sum((B[i, a] * u[a] for a in range(dim - 1)), 0.0) for i in range(dim)]

    names = _names(dim - 1)
    return Immersion("hyperplane", dim, phi, lambda u: nvec, {k: (-1.0, 1.0, 5) for k in names},
                     {"normal": nvec.tolist(), "offset": float(offset)})


def sphere(dim: int = 3, radius: float = 1.0, center: Sequence[float] | None = None) -> Immersion:
    r = float(radius)
    c = np.zeros(dim) if center is None else np.asarray(center, dtype=float)

    def phi(u):
        s = _sphere_coords(u, r)
        return [c[i] + s[i] for i in range(dim)]

    def coorient(u):  # outward
        return np.asarray(jets.values(_sphere_coords(list(u), 1.0)))

    names = _names(dim - 1)
    ranges = {k: (0.3, 2.8, 5) for k in names[:-1]}
    ranges[names[-1]] = (0.0, TWO_PI, 5)
    return Immersion("sphere", dim, phi, coorient, ranges, {"radius": r, "center": c.tolist()})


def cylinder(dim: int = 3, radius: float = 1.0, k: int = 1) -> Immersion:
    """S^k(r) x R^(dim-1-k), the round factor in the first k+1 coordinates."""
    r = float(radius)
    if not 1 <= k <= dim - 2:
        raise ConfigurationError("cylinder needs 1 <= k <= dim - 2")

    def phi(u):
        return _sphere_coords(u[:k], r) + list(u[k:])

    def coorient(u):
        return np.concatenate([jets.values(_sphere_coords(list(u[:k]), 1.0)), np.zeros(dim - 1 - k)])

    names = _names(dim - 1)
    ranges = {}
    for i, name in enumerate(names):
        if i < k - 1:
            ranges[name] = (0.3, 2.8, 5)
        elif i == k - 1:
            ranges[name] = (0.0, TWO_PI, 5)
        else:
            ranges[name] = (-1.0, 1.0, 5)
    return Immersion("cylinder", dim, phi, coorient, ranges, {"radius": r, "k": k})


def helicoid(a: float = 1.0) -> Immersion:
    """(u cos v, u sin v, a v); default side along (a sin v, -a cos v, u)."""
    a = float(a)

    def phi(u):
        return [u[0] * jets.cos(u[1]), u[0] * jets.sin(u[1]), a * u[1]]

    def coorient(u):
        return np.array([a * math.sin(u[1]), -a * math.cos(u[1]), u[0]])

    return Immersion("helicoid", 3, phi, coorient, {"u": (0.05, 0.95, 5), "v": (0.0, 6.28, 5)}, {"a": a})


def graph(dim: int = 3, Q: Sequence | None = None, c: Sequence | None = None, d: float = 0.0) -> Immersion:
    """x^m = u^T Q u / 2 + c.u + d."""
    n = dim - 1
    Q = np.zeros((n, n)) if Q is None else np.asarray(Q, dtype=float)
    c = np.zeros(n) if c is None else np.asarray(c, dtype=float)
    Ql = Q.tolist()

    def height(u):
        acc = d
        for i in range(n):
            acc = acc + c[i] * u[i]
            for j in range(n):
                acc = acc + 0.5 * Ql[i][j] * u[i] * u[j]
        return acc

    def phi(u):
        return list(u) + [height(u)]

    def coorient(u):
        grad = Q @ u + c
        return np.concatenate([-grad, [1.0]])

    return Immersion("graph", dim, phi, coorient, {k: (-0.5, 0.5, 5) for k in _names(n)},
                     {"Q": Q.tolist(), "c": c.tolist(), "d": float(d)})


# surfaces in the round S^3 chart -----------------------------------------


def s3_pushforward(X, V) -> np.ndarray:
    """Chart components of a tangent vector V of S^3 at X."""
    X = np.asarray(X, dtype=float)
    V = np.asarray(V, dtype=float)
    d = 1.0 - X[3]
    return V[:3] / d + X[:3] * V[3] / (d * d)


def _chart_of(X):
    d = 1.0 - X[3]
    return [X[i] / d for i in range(3)]


def clifford_torus(r: float = 1.0 / math.sqrt(2.0), s: float | None = None) -> Immersion:
    """S^1(r) x S^1(s) in S^3, r^2 + s^2 = 1, seen in the stereographic chart."""
    r = float(r)
    s = math.sqrt(1.0 - r * r) if s is None else float(s)
    if abs(r * r + s * s - 1.0) > 1e-12:
        raise ConfigurationError("Clifford torus needs r^2 + s^2 = 1")

    def X(u):
        return [r * jets.cos(u[0]), r * jets.sin(u[0]), s * jets.cos(u[1]), s * jets.sin(u[1])]

    def coorient(u):
        Xv = np.asarray(jets.values(X(list(u))))
        N = np.array([s * math.cos(u[0]), s * math.sin(u[0]), -r * math.cos(u[1]), -r * math.sin(u[1])])
        return s3_pushforward(Xv, N)

    return Immersion("clifford-torus", 3, lambda u: _chart_of(X(u)), coorient,
                     {"u": (0.0, TWO_PI, 5), "v": (0.0, TWO_PI, 5)}, {"r": r, "s": s})


def s3_sphere(t: float = 0.0) -> Immersion:
    """The sphere {X4 = t} of S^3 (great sphere for t = 0), in the chart."""
    t = float(t)
    if not -1.0 < t < 1.0:
        raise ConfigurationError("s3-sphere needs |t| < 1")
    rho = math.sqrt(1.0 - t * t)

    def X(u):
        p = _sphere_coords(u, rho)
        return [p[2], p[1], p[0], t + 0.0 * u[0]]

    def coorient(u):
        Xv = np.asarray(jets.values(X(list(u))))
        N = np.array([0.0, 0.0, 0.0, 1.0]) - t * Xv
        return s3_pushforward(Xv, N)

    return Immersion("s3-sphere", 3, lambda u: _chart_of(X(u)), coorient,
                     {"u": (0.3, 2.5, 5), "v": (0.0, TWO_PI, 5)}, {"t": t})


def immersion_from_dict(spec: dict, dim: int | None = None) -> Immersion:
    if not isinstance(spec, dict) or "family" not in spec:
        raise ConfigurationError("surface description needs a 'family'")
    fam = spec["family"]
    d = int(spec.get("dim", dim or 3))
    try:
        if fam == "hyperplane":
            imm = hyperplane(d, spec.get("normal"), float(spec.get("offset", 0.0)))
        elif fam == "sphere":
            imm = sphere(d, float(spec.get("radius", 1.0)), spec.get("center"))
        elif fam == "cylinder":
            imm = cylinder(d, float(spec.get("radius", 1.0)), int(spec.get("k", 1)))
        elif fam == "helicoid":
            imm = helicoid(float(spec.get("a", 1.0)))
        elif fam == "graph":
            imm = graph(d, spec.get("Q"), spec.get("c"), float(spec.get("d", 0.0)))
        elif fam == "clifford-torus":
            imm = clifford_torus(float(spec.get("r", 1.0 / math.sqrt(2.0))), spec.get("s"))
        elif fam == "s3-sphere":
            imm = s3_sphere(float(spec.get("t", 0.0)))
        else:
            raise ConfigurationError(f"unknown surface family {fam!r}")
    except (TypeError, ValueError) as exc:
        raise ConfigurationError(f"bad parameters for surface {fam!r}: {exc}") from exc
    if dim is not None and imm.dim != dim:
        raise ConfigurationError(f"surface lives in dimension {imm.dim}, metric has dimension {dim}")
    known = {"family", "dim", "normal", "offset", "radius", "center", "k", "a", "Q", "c", "d", "r", "s", "t"}
    for name in spec:
        if name not in imm.param_names and name not in known:
            raise ConfigurationError(f"unknown key {name!r} for surface {fam!r}; sample ranges are {imm.param_names}")
        if name in imm.param_names:
            rng = spec[name]
            if not (isinstance(rng, (list, tuple)) and len(rng) == 3):
                raise ConfigurationError(f"sample range for {name!r} must be [lo, hi, count]")
    return imm


__all__ = [
    "Immersion",
    "conormal_jets",
    "check_frame",
    "hyperplane",
    "sphere",
    "cylinder",
    "helicoid",
    "graph",
    "clifford_torus",
    "s3_sphere",
    "s3_pushforward",
    "immersion_from_dict",
]
