"""Conic Finsler metrics in a single coordinate chart.

Every model evaluates its primal metric ``F(x, y)`` and/or its dual
``F*(x, xi)`` with plain arithmetic plus the helpers of :mod:`finslerlab.jets`,
so the same code path serves float evaluation and exact differentiation.
Cone predicates are only ever evaluated on floats.
"""

from __future__ import annotations

import math
from typing import Callable, Sequence

import numpy as np
from scipy.optimize import brentq

from . import jets
from .errors import ConfigurationError, DimensionMismatch, NotUnitWind, UnsupportedOperation
from .phi import HelicoidPhi, PhiFamily

UNIT_WIND_TOL = 1e-9
SEED_SCAN = 24  # profile values scanned per branch when seeding the dual-side Legendre solve


def quad(M, u, v=None):
    """sum_ij M[i][j] u^i v^j for nested sequences of floats or jets."""
    v = u if v is None else v
    m = len(u)
    total = 0.0
    for i in range(m):
        row = M[i]
        acc = 0.0
        for j in range(m):
            acc = acc + row[j] * v[j]
        total = total + u[i] * acc
    return total


def matvec(M, v):
    return [sum((M[i][j] * v[j] for j in range(len(v))), 0.0) for i in range(len(M))]


def dot(u, v):
    return sum((a * b for a, b in zip(u, v)), 0.0)


def as_vector(v, dim: int, what: str = "vector") -> np.ndarray:
    arr = np.asarray(v, dtype=float).reshape(-1)
    if arr.shape[0] != dim:
        raise DimensionMismatch(f"{what} has {arr.shape[0]} components, model dimension is {dim}")
    return arr


class MetricModel:
    """Base class: a conic Finsler metric on a chart of R^dim."""

    kind = "abstract"
    has_primal = True
    has_dual = False

    def __init__(self, dim: int, minkowski: bool = False):
        if dim < 2:
            raise ConfigurationError("dimension must be at least 2")
        self.dim = int(dim)
        self.minkowski = bool(minkowski)

    # evaluators -------------------------------------------------------
    def primal(self, x, y):
        raise UnsupportedOperation(f"{self.kind}: no closed-form primal metric")

    def dual(self, x, xi):
        raise UnsupportedOperation(f"{self.kind}: no closed-form dual metric")

    # cones ------------------------------------------------------------
    def _cone(self, x: np.ndarray, y: np.ndarray) -> bool:
        return True

    def _dual_cone(self, x: np.ndarray, xi: np.ndarray) -> bool:
        return True

    def in_cone(self, x, y) -> bool:
        x = as_vector(x, self.dim, "point")
        y = as_vector(y, self.dim, "tangent vector")
        if not np.any(y):
            return False
        return bool(self._cone(x, y))

    def in_dual_cone(self, x, xi) -> bool:
        x = as_vector(x, self.dim, "point")
        xi = as_vector(xi, self.dim, "covector")
        if not np.any(xi):
            return False
        return bool(self._dual_cone(x, xi))

    # configuration checks and Newton seeds ---------------------------
    def check_point(self, x: np.ndarray) -> None:
        """Raise a configuration error if the model data is invalid at x."""

    def dual_seed(self, x: np.ndarray, y: np.ndarray) -> np.ndarray:
        return np.asarray(y, dtype=float).copy()

    def primal_seed(self, x: np.ndarray, xi: np.ndarray) -> np.ndarray:
        return np.asarray(xi, dtype=float).copy()

    def describe(self) -> dict:
        return {"kind": self.kind, "dim": self.dim}

    def __repr__(self) -> str:
        return f"{type(self).__name__}({self.describe()})"


# ---------------------------------------------------------------------------
# Riemannian charts


class RiemannianMetric(MetricModel):
    """F = sqrt(h_ij(x) y^i y^j).

    ``h`` maps a point to a nested m x m matrix; alternatively ``conformal``
    maps a point to a scalar factor lambda with h = lambda * identity.
    """

    kind = "riemannian"
    has_dual = True

    def __init__(self, dim, h: Callable | None = None, conformal: Callable | None = None,
                 name: str = "custom", constant: bool = False):
        super().__init__(dim, minkowski=constant)
        if (h is None) == (conformal is None):
            raise ConfigurationError("give exactly one of h or conformal")
        self._h = h
        self._conformal = conformal
        self.name = name

    def h(self, x):
        if self._conformal is not None:
            lam = self._conformal(x)
            return [[lam if i == j else 0.0 for j in range(self.dim)] for i in range(self.dim)]
        return self._h(x)

    def h_inv(self, x):
        if self._conformal is not None:
            lam = 1.0 / self._conformal(x)
            return [[lam if i == j else 0.0 for j in range(self.dim)] for i in range(self.dim)]
        return jets.inv(self._h(x))

    def norm_sq(self, x, y):
        if self._conformal is not None:
            return self._conformal(x) * dot(y, y)
        return quad(self._h(x), y)

    def dual_norm_sq(self, x, xi):
        if self._conformal is not None:
            return dot(xi, xi) / self._conformal(x)
        return quad(self.h_inv(x), xi)

    def inner(self, x, u, v):
        if self._conformal is not None:
            return self._conformal(x) * dot(u, v)
        return quad(self._h(x), u, v)

    def flat(self, x, y):
        if self._conformal is not None:
            lam = self._conformal(x)
            return [lam * c for c in y]
        return matvec(self._h(x), y)

    def sharp(self, x, xi):
        if self._conformal is not None:
            lam = self._conformal(x)
            return [c / lam for c in xi]
        return matvec(self.h_inv(x), xi)

    def volume_density(self, x):
        """sqrt(det h)."""
        if self._conformal is not None:
            return self._conformal(x) ** (self.dim / 2.0)
        return jets.sqrt(jets.det(self._h(x)))

    def primal(self, x, y):
        return jets.sqrt(self.norm_sq(x, y))

    def dual(self, x, xi):
        return jets.sqrt(self.dual_norm_sq(x, xi))

    def dual_seed(self, x, y):
        return np.asarray(jets.values(self.flat(x, list(y))), dtype=float)

    def primal_seed(self, x, xi):
        return np.asarray(jets.values(self.sharp(x, list(xi))), dtype=float)

    def h_matrix(self, x) -> np.ndarray:
        return np.asarray(jets.values(self.h(list(np.asarray(x, dtype=float)))), dtype=float)

    def describe(self):
        return {"kind": self.kind, "dim": self.dim, "h": self.name}


class EuclideanMetric(RiemannianMetric):
    kind = "euclidean"

    def __init__(self, dim: int):
        super().__init__(dim, conformal=lambda x: 1.0, name="euclidean", constant=True)

    def primal(self, x, y):
        return jets.sqrt(dot(y, y))

    def dual(self, x, xi):
        return jets.sqrt(dot(xi, xi))

    def describe(self):
        return {"kind": self.kind, "dim": self.dim}


def euclidean_h(dim: int) -> RiemannianMetric:
    return RiemannianMetric(dim, conformal=lambda x: 1.0, name="euclidean", constant=True)


def round_sphere_h(dim: int) -> RiemannianMetric:
    """Unit round sphere S^dim in the stereographic chart from the north pole."""

    def conformal(x):
        return 4.0 / (1.0 + dot(x, x)) ** 2

    return RiemannianMetric(dim, conformal=conformal, name="round-sphere")


# ---------------------------------------------------------------------------
# conic (alpha, beta) metrics


class AlphaBetaMetric(MetricModel):
    """F = alpha phi(beta/alpha) with cone {beta/alpha in the admissible domain of phi}."""

    kind = "alpha-beta"

    def __init__(self, alpha: RiemannianMetric, b: Callable, phi: PhiFamily, b0: float,
                 b_name: Sequence[float] | str = "custom", constant: bool = False):
        super().__init__(alpha.dim, minkowski=constant and alpha.minkowski)
        self.alpha = alpha
        self.b = b
        self.phi = phi
        self.b0 = float(b0)
        self.b_name = b_name

    def s_value(self, x, y):
        return dot(self.b(x), y) / jets.sqrt(self.alpha.norm_sq(x, y))

    def primal(self, x, y):
        a = jets.sqrt(self.alpha.norm_sq(x, y))
        return a * self.phi.phi(dot(self.b(x), y) / a)

    def _cone(self, x, y):
        s = float(self.s_value(x, y))
        return self.phi.contains(s) and abs(s) <= self.b0

    def check_point(self, x):
        bnorm = math.sqrt(float(self.alpha.dual_norm_sq(list(x), self.b(list(x)))))
        if bnorm > self.b0 * (1 + 1e-12):
            raise ConfigurationError(f"||beta||_alpha = {bnorm} exceeds b0 = {self.b0} at x = {list(x)}")

    def excluded_set(self):
        return self.phi.excluded(self.b0)

    def primal_seed(self, x, xi):
        y0 = np.asarray(jets.values(self.alpha.sharp(list(x), list(xi))), dtype=float)
        if self._cone(x, y0):
            return y0
        # push along beta-sharp by the smallest amount that enters the cone, plus a margin
        bs = np.asarray(jets.values(self.alpha.sharp(list(x), self.b(list(x)))), dtype=float)
        scale = float(np.linalg.norm(y0)) or 1.0
        for t in np.geomspace(1e-3, 1e3, 121) * scale:
            if self._cone(x, y0 + t * bs):
                return y0 + (t + 0.1 * scale) * bs
        return y0

    def describe(self):
        return {
            "kind": self.kind,
            "dim": self.dim,
            "alpha": self.alpha.name,
            "b": self.b_name,
            "phi": self.phi.describe(),
            "b0": self.b0,
            "E": [list(iv) for iv in self.excluded_set()],
        }


class DualAlphaBetaMetric(MetricModel):
    """Metric given through its dual F* = alpha* phi(beta*/alpha*)."""

    kind = "dual-alpha-beta"
    has_primal = False
    has_dual = True

    def __init__(self, alpha: RiemannianMetric, beta_star: Callable, phi: PhiFamily,
                 constant: bool = False, beta_name="custom"):
        super().__init__(alpha.dim, minkowski=constant and alpha.minkowski)
        self.alpha = alpha
        self.beta_star = beta_star
        self.phi = phi
        self.beta_name = beta_name

    def s_dual(self, x, xi):
        return dot(self.beta_star(x), xi) / jets.sqrt(self.alpha.dual_norm_sq(x, xi))

    def dual(self, x, xi):
        a = jets.sqrt(self.alpha.dual_norm_sq(x, xi))
        return a * self.phi.phi(dot(self.beta_star(x), xi) / a)

    def _dual_cone(self, x, xi):
        return self.phi.contains(float(self.s_dual(x, xi)))

    def dual_seed(self, x, y):
        """Preimage of y found inside the plane spanned by y_flat and b_flat.

        The gradient of F*^2/2 is a combination of xi_sharp and b, so the
        preimage lies in that plane.  On its alpha*-unit circle the profile
        argument is s = R cos(theta - theta0); each branch theta0 +- acos(s/R)
        is parametrized by s over the admissible intervals, the image turns
        monotonically along it, and brentq finds the covector whose image is
        parallel to y.  The result is rescaled to the length of y.
        """
        from .duality import legendre_inverse
        from .errors import GeometryError

        xl = list(x)
        y = np.asarray(y, dtype=float)
        al = self.alpha
        Hs = np.asarray(jets.values(al.h_inv(xl)), dtype=float)
        ny = math.sqrt(float(al.norm_sq(xl, list(y))))
        b = np.asarray(jets.values(self.beta_star(xl)), dtype=float)
        e1 = np.asarray(jets.values(al.flat(xl, list(y))), dtype=float) / ny
        e2 = b - float(b @ e1) * (Hs @ e1)  # b_flat minus its e1 part, written through sharp(e1)
        e2 = np.asarray(jets.values(al.flat(xl, list(e2))), dtype=float)
        n2 = float(e2 @ Hs @ e2)
        if n2 <= 1e-24 * max(1.0, float(b @ b)):
            return e1 * ny  # y parallel to b, or b = 0: the plane degenerates
        e2 = e2 / math.sqrt(n2)
        u1, u2 = Hs @ e1, Hs @ e2  # alpha-orthonormal basis of the primal plane
        s1, s2 = float(b @ e1), float(b @ e2)
        R, th0 = math.hypot(s1, s2), math.atan2(s2, s1)

        def covector(sv, sign):
            th = th0 + sign * math.acos(max(-1.0, min(1.0, sv / R)))
            return math.cos(th) * e1 + math.sin(th) * e2

        def angle(sv, sign):
            try:
                w = legendre_inverse(self, x, covector(sv, sign), check_cone=False)
            except (GeometryError, ArithmeticError, ValueError):
                return None
            return math.atan2(float(al.inner(xl, list(w), list(u2))), float(al.inner(xl, list(w), list(u1))))

        best, best_abs = None, math.inf
        ends = np.geomspace(1e-10, 1e-2, 9)
        for lo, hi in self.phi.domain():
            lo, hi = max(lo, -R), min(hi, R)
            if not hi > lo:
                continue
            w = hi - lo
            pts = np.unique(np.concatenate([lo + w * ends, lo + w * np.linspace(0, 1, SEED_SCAN)[1:-1], hi - w * ends[::-1]]))
            for sign in (1.0, -1.0):
                vals = [(sv, angle(sv, sign)) for sv in pts]
                vals = [(sv, a) for sv, a in vals if a is not None]
                for (sa, a0), (sb, a1) in zip(vals, vals[1:]):
                    for sv, a in ((sa, a0), (sb, a1)):
                        if abs(a) < best_abs:
                            best, best_abs = (sv, sign), abs(a)
                    if abs(a0) > 0.5 * math.pi or abs(a1) > 0.5 * math.pi or a0 * a1 > 0:
                        continue
                    try:
                        sv = brentq(lambda t: angle(t, sign), sa, sb, xtol=1e-15)
                    except (ValueError, TypeError):
                        continue
                    best, best_abs = (sv, sign), 0.0
                    break
                if best_abs == 0.0:
                    break
            if best_abs == 0.0:
                break
        if best is None:
            return y.copy()
        xi = covector(*best)
        wv = legendre_inverse(self, x, xi, check_cone=False)
        return xi * ny / math.sqrt(float(al.norm_sq(xl, list(wv))))

    def _cone(self, x, y):
        from .duality import legendre
        from .errors import GeometryError

        try:
            legendre(self, x, y, check_cone=False)
        except GeometryError:
            return False
        return True

    def describe(self):
        return {
            "kind": self.kind,
            "dim": self.dim,
            "alpha": self.alpha.name,
            "beta_star": self.beta_name,
            "phi": self.phi.describe(),
        }


class HelicoidMetric(DualAlphaBetaMetric):
    """The conic Minkowski-(alpha, beta) metric on R^3 in which helicoids are isoparametric.

    Its dual is alpha* phi(beta*/alpha*) with alpha* Euclidean, beta* = (0, 0, b)
    and the helicoid profile; the dual simplifies to
    sqrt(xi1^2+xi2^2-a^2 xi3^2) - a xi3 atan(sqrt(xi1^2+xi2^2-a^2 xi3^2)/(a xi3)),
    independent of b.
    """

    kind = "helicoid"

    def __init__(self, a: float = 1.0, b: float = 1.0, corrupt: bool = False):
        phi = HelicoidPhi(a, b, corrupt=corrupt)
        beta = [0.0, 0.0, float(b)]
        super().__init__(euclidean_h(3), lambda x: beta, phi, constant=True, beta_name=beta)
        self.a = float(a)
        self.b = float(b)

    def _cone(self, x, y):
        a = self.a
        rho2 = y[0] ** 2 + y[1] ** 2
        z2 = y[2] ** 2
        return 0.0 < 4.0 / (math.pi**2 * a * a) * z2 < rho2 < z2 / (a * a)

    def dual_seed(self, x, y):
        """Solve the one-dimensional ratio equation |y3|/|y_r| = a atan(t) sqrt(1+t^2)/t.

        Rotational symmetry about the third axis reduces the Legendre inversion
        to this ratio; Newton then polishes the seed on the full dual.
        """
        y = np.asarray(y, dtype=float)
        a = self.a
        rho = math.hypot(y[0], y[1])
        if rho == 0.0 or y[2] == 0.0:
            return np.array([y[0], y[1], -np.sign(y[2]) or 1.0])
        ratio = abs(y[2]) / rho

        def g(logt):
            t = math.exp(logt)
            return a * math.atan(t) * math.sqrt(1 + t * t) / t - ratio

        lo, hi = -40.0, 40.0
        if g(lo) * g(hi) > 0:
            t = 1.0
        else:
            t = math.exp(brentq(g, lo, hi, xtol=1e-14))
        xi_r = a * math.sqrt(1 + t * t)
        xi3 = -math.copysign(1.0, y[2])
        q = a * t
        fstar = a * (t - math.atan(t))
        # Legendre image of (xi_r e_r, xi3): radial component F* q/|xi|
        l_r = fstar * q / math.sqrt(xi_r**2 + 1.0)
        lam = rho / l_r if l_r > 0 else 1.0
        return lam * np.array([xi_r * y[0] / rho, xi_r * y[1] / rho, xi3])

    def describe(self):
        out = {"kind": self.kind, "dim": 3, "a": self.a, "b": self.b}
        if self.phi.corrupt:
            out["corrupt"] = True
        return out


# ---------------------------------------------------------------------------
# Kropina metrics from navigation data


class KropinaMetric(MetricModel):
    """F = h^2 / (2 W_0), W_0 = h(W, y), on the cone {W_0 > 0}.

    The navigation wind must have unit h-length at every queried point.
    """

    kind = "kropina"
    has_dual = True

    def __init__(self, h: RiemannianMetric, W: Callable, wind_name="custom", constant_wind: bool = False):
        super().__init__(h.dim, minkowski=constant_wind and h.minkowski)
        self.h = h
        self.W = W
        self.wind_name = wind_name

    def wind_flat(self, x):
        return self.h.flat(x, self.W(x))

    def W0(self, x, y):
        return self.h.inner(x, self.W(x), y)

    def primal(self, x, y):
        return self.h.norm_sq(x, y) / (2.0 * self.W0(x, y))

    def dual(self, x, xi):
        return jets.sqrt(self.h.dual_norm_sq(x, xi)) + dot(self.W(x), xi)

    def _cone(self, x, y):
        return float(self.W0(list(x), list(y))) > 0.0

    def _dual_cone(self, x, xi):
        hs = math.sqrt(float(self.h.dual_norm_sq(list(x), list(xi))))
        return hs + float(dot(self.W(list(x)), list(xi))) > 1e-14 * hs

    def wind_norm(self, x) -> float:
        x = list(np.asarray(x, dtype=float))
        return math.sqrt(float(self.h.norm_sq(x, self.W(x))))

    def check_point(self, x):
        nw = self.wind_norm(x)
        if abs(nw - 1.0) > UNIT_WIND_TOL:
            raise NotUnitWind(f"||W||_h = {nw!r} != 1 at x = {list(map(float, x))}")

    def describe(self):
        return {"kind": self.kind, "dim": self.dim, "h": self.h.name, "W": self.wind_name}


__all__ = [
    "MetricModel",
    "RiemannianMetric",
    "EuclideanMetric",
    "AlphaBetaMetric",
    "DualAlphaBetaMetric",
    "HelicoidMetric",
    "KropinaMetric",
    "euclidean_h",
    "round_sphere_h",
    "quad",
    "matvec",
    "dot",
    "as_vector",
]
