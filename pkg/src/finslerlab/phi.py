"""Profile functions phi(s) of conic (alpha, beta) metrics.

Three families are supported: the constant profile (Riemannian), the Kropina
profile ``1/s`` and the helicoid profile, which is the one for which the
helicoid in a three-dimensional conic Minkowski space has principal
curvatures +-1.  For the helicoid profile ``phi`` defines the *dual* metric
``F* = alpha* phi(beta*/alpha*)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from . import jets
from .engine import taylor
from .errors import ConfigurationError, EmptyDomain

BOUNDARY_MARGIN = 1e-6


class PhiFamily:
    """A profile phi with its admissible open s-domain."""

    name = "abstract"

    def phi(self, s):
        raise NotImplementedError

    def domain(self) -> list[tuple[float, float]]:
        """Admissible s-domain as a list of open intervals."""
        raise NotImplementedError

    def params(self) -> dict:
        return {}

    def describe(self) -> dict:
        return {"family": self.name, **self.params()}

    def contains(self, s: float) -> bool:
        return any(lo < s < hi for lo, hi in self.domain())

    def excluded(self, b0: float) -> list[tuple[float, float]]:
        """The closed excluded set E inside [-b0, b0] as a list of intervals."""
        out = []
        start = -b0
        for lo, hi in sorted(self.domain()):
            lo, hi = max(lo, -b0), min(hi, b0)
            if hi <= lo:
                continue
            if lo > start or -b0 < lo == start:
                out.append((start, lo))
            start = hi
        if start < b0:
            out.append((start, b0))
        return out

    def derivatives(self, s: float) -> tuple[float, float, float]:
        """(phi, phi', phi'') at s."""
        j = taylor(lambda z: self.phi(z[0]), [s], 2)
        return j.value, j.partial((1,)), j.partial((2,))


class ConstantOne(PhiFamily):
    name = "constant-one"

    def phi(self, s):
        return 1.0 + 0.0 * s

    def domain(self):
        return [(-math.inf, math.inf)]

    def derivatives(self, s):
        return 1.0, 0.0, 0.0


class KropinaPhi(PhiFamily):
    name = "kropina"

    def phi(self, s):
        return 1.0 / s

    def domain(self):
        return [(0.0, math.inf)]

    def derivatives(self, s):
        return 1.0 / s, -1.0 / s**2, 2.0 / s**3


class HelicoidPhi(PhiFamily):
    """phi(s) = sqrt(b^2-(1+a^2)s^2)/b - (a|s|/b) atan(sqrt(b^2-(1+a^2)s^2)/(a|s|)).

    ``corrupt=True`` flips the sign of the arctan term; it exists only as a
    negative control for the verification suite.
    """

    name = "helicoid"

    def __init__(self, a: float, b: float, corrupt: bool = False):
        if a <= 0 or b <= 0:
            raise ConfigurationError("helicoid profile needs a > 0 and b > 0")
        self.a = float(a)
        self.b = float(b)
        self.corrupt = bool(corrupt)
        self.c = self.b / math.sqrt(1.0 + self.a**2)

    def params(self):
        out = {"a": self.a, "b": self.b}
        if self.corrupt:
            out["corrupt"] = True
        return out

    def domain(self):
        return [(-self.c, 0.0), (0.0, self.c)]

    def _root(self, s):
        return jets.sqrt(self.b**2 - (1.0 + self.a**2) * s * s)

    def phi(self, s):
        a, b = self.a, self.b
        r = self._root(s)
        t = jets.fabs(s)
        sign = -1.0 if self.corrupt else 1.0
        return r / b + sign * (-a * t / b) * jets.atan(r / (a * t))

    def varphi(self, s):
        """phi - s phi' in closed form: b sqrt(b^2-(1+a^2)s^2)/(b^2-s^2)."""
        return self.b * self._root(s) / (self.b**2 - s * s)

    def dvarphi(self, s: float) -> float:
        a, b = self.a, self.b
        r = math.sqrt(b * b - (1 + a * a) * s * s)
        return b * s * (2.0 * r - (1 + a * a) * (b * b - s * s) / r) / (b * b - s * s) ** 2

    def f(self, s):
        """The squared varphi, solution of the helicoid ODE with f(0) = 1."""
        return self.b**2 * (self.b**2 - (1.0 + self.a**2) * s * s) / (self.b**2 - s * s) ** 2

    def ode_residual(self, s: float) -> float:
        """f' - 2s f/(b^2-s^2) + 2a^2 b^4 s/(b^2-s^2)^3 with f = varphi^2 (jet-differentiated)."""
        a, b = self.a, self.b
        j = taylor(lambda z: self.varphi(z[0]) ** 2, [s], 1)
        f, df = j.value, j.partial((1,))
        d = b * b - s * s
        return df - 2 * s * f / d + 2 * a * a * b**4 * s / d**3

    def derivatives(self, s):
        if self.corrupt:
            return super().derivatives(s)
        p = float(self.phi(s))
        vp = float(self.varphi(s))
        return p, (p - vp) / s, -self.dvarphi(s) / s


@dataclass(frozen=True)
class DualTensorCoefficients:
    rho: float
    rho0: float
    rho1: float


def dual_tensor_coefficients(family: PhiFamily, s: float) -> DualTensorCoefficients:
    """Coefficients of the inverse fundamental tensor of alpha*phi(beta/alpha)."""
    p, dp, d2p = family.derivatives(s)
    return DualTensorCoefficients(
        rho=p * (p - s * dp),
        rho0=p * d2p + dp * dp,
        rho1=(p - s * dp) * dp - s * p * d2p,
    )


@dataclass
class ValidationReport:
    family: dict
    b0: float
    n_points: int
    min_first: float
    min_second: float
    min_phi: float
    passed: bool
    warnings: list[str] = field(default_factory=list)

    def to_dict(self) -> dict:
        return dict(self.__dict__)


def _grid(family: PhiFamily, b0: float, grid) -> np.ndarray:
    if isinstance(grid, (int, np.integer)):
        pieces = []
        for lo, hi in family.domain():
            lo, hi = max(lo, -b0), min(hi, b0)
            if hi > lo:
                pieces.append((lo, hi))
        if not pieces:
            raise EmptyDomain(f"{family.name}: admissible domain misses [-{b0}, {b0}]")
        total = sum(hi - lo for lo, hi in pieces)
        pts = []
        for lo, hi in pieces:
            k = max(2, int(round(grid * (hi - lo) / total)))
            pts.append(np.linspace(lo, hi, k + 2)[1:-1])
        return np.concatenate(pts)
    pts = np.asarray(grid, dtype=float)
    pts = pts[[family.contains(float(s)) and abs(s) <= b0 for s in pts]]
    if pts.size == 0:
        raise EmptyDomain(f"{family.name}: no grid point inside the admissible domain")
    return pts


def validate_phi(family: PhiFamily, b0: float, grid: int | Sequence[float] = 200) -> ValidationReport:
    """Check the strong-convexity conditions of a profile on a sample grid.

    The second expression is affine in b^2, so over b in [|s|, b0] its minimum
    sits at an endpoint: b = |s| reproduces the first expression, b = b0 is
    evaluated explicitly.
    """
    pts = _grid(family, b0, grid)
    first, second, phis = [], [], []
    warnings = []
    edges = [e for iv in family.domain() for e in iv if math.isfinite(e)] + [-b0, b0]
    for s in pts:
        s = float(s)
        if any(abs(s - e) < BOUNDARY_MARGIN for e in edges):
            warnings.append(f"BoundaryProximity: s={s!r} within {BOUNDARY_MARGIN} of a domain endpoint")
        p, dp, d2p = family.derivatives(s)
        phis.append(p)
        first.append(p - s * dp)
        second.append(p - s * dp + (b0 * b0 - s * s) * d2p)
    m1, m2, mp = min(first), min(second), min(phis)
    return ValidationReport(
        family=family.describe(),
        b0=float(b0),
        n_points=len(pts),
        min_first=m1,
        min_second=m2,
        min_phi=mp,
        passed=bool(m1 > 0 and m2 > 0 and mp > 0),
        warnings=warnings,
    )


def phi_from_dict(spec: dict) -> PhiFamily:
    name = spec.get("family")
    if name == "constant-one":
        return ConstantOne()
    if name == "kropina":
        return KropinaPhi()
    if name == "helicoid":
        return HelicoidPhi(spec["a"], spec["b"], corrupt=spec.get("corrupt", False))
    raise ConfigurationError(f"unknown phi family {name!r}")
