"""Truncated multivariate Taylor arithmetic (forward-mode jets).

A :class:`Jet` stores every Taylor coefficient ``d^alpha f / alpha!`` of a
scalar function of ``nvars`` variables up to total degree ``order``.  Products
are Cauchy products over multi-indices, elementary functions are applied by
composing their univariate Taylor series with the non-constant part, and
partial differentiation lowers the order by one.  The same code therefore
yields first, second, third and fourth derivatives exactly (to rounding).

Functions written with the helpers of this module (``sqrt``, ``atan`` ...) and
plain arithmetic accept floats and jets alike.
"""

from __future__ import annotations

import functools
import itertools
import math
from itertools import combinations_with_replacement
from numbers import Real
from typing import Sequence

import numpy as np

__all__ = [
    "Jet",
    "sqrt",
    "exp",
    "log",
    "sin",
    "cos",
    "atan",
    "fabs",
    "value_of",
    "is_jet",
    "compose",
    "solve",
    "inv",
    "det",
]


# ---------------------------------------------------------------------------
# multi-index bookkeeping


@functools.lru_cache(maxsize=None)
def _indices(nvars: int, order: int) -> tuple[np.ndarray, dict]:
    """Multi-indices sorted by degree; lower-order tables are prefixes."""
    rows: list[tuple[int, ...]] = []
    for d in range(order + 1):
        block = []
        for combo in combinations_with_replacement(range(nvars), d):
            a = [0] * nvars
            for v in combo:
                a[v] += 1
            block.append(tuple(a))
        rows.extend(sorted(block, reverse=True))
    arr = np.array(rows, dtype=np.int64).reshape(len(rows), nvars)
    return arr, {r: i for i, r in enumerate(rows)}


def _size(nvars: int, order: int) -> int:
    return math.comb(nvars + order, order)


@functools.lru_cache(maxsize=None)
def _product_table(nvars: int, order: int):
    arr, lookup = _indices(nvars, order)
    deg = arr.sum(axis=1)
    base = (order + 1) ** np.arange(nvars)
    codes = arr @ base
    sorter = np.argsort(codes)
    left, right, out = [], [], []
    for i in range(len(arr)):
        js = np.nonzero(deg <= order - deg[i])[0]
        sums = (arr[i] + arr[js]) @ base
        pos = sorter[np.searchsorted(codes, sums, sorter=sorter)]
        left.append(np.full(len(js), i))
        right.append(js)
        out.append(pos)
    return np.concatenate(left), np.concatenate(right), np.concatenate(out)


@functools.lru_cache(maxsize=None)
def _deriv_table(nvars: int, order: int, var: int):
    """Source indices and factors for d/dz_var of an order-``order`` jet."""
    low, _ = _indices(nvars, order - 1)
    _, lookup = _indices(nvars, order)
    src = np.empty(len(low), dtype=np.int64)
    fac = np.empty(len(low))
    for i, a in enumerate(low):
        b = list(a)
        b[var] += 1
        src[i] = lookup[tuple(b)]
        fac[i] = b[var]
    return src, fac


@functools.lru_cache(maxsize=None)
def _restrict_table(nvars: int, order: int, keep: tuple[int, ...]):
    sub, _ = _indices(len(keep), order)
    _, lookup = _indices(nvars, order)
    src = np.empty(len(sub), dtype=np.int64)
    for i, a in enumerate(sub):
        full = [0] * nvars
        for var, power in zip(keep, a):
            full[var] = power
        src[i] = lookup[tuple(full)]
    return src


@functools.lru_cache(maxsize=None)
def _factorials(nvars: int, order: int) -> np.ndarray:
    arr, _ = _indices(nvars, order)
    return np.array([math.prod(math.factorial(int(k)) for k in a) for a in arr], dtype=float)


# ---------------------------------------------------------------------------
# the jet type


class Jet:
    """Truncated Taylor expansion of a scalar function around a point."""

    __slots__ = ("coef", "nvars", "order")
    __array_ufunc__ = None  # let numpy scalars defer to our reflected operators

    def __init__(self, coef: np.ndarray, nvars: int, order: int):
        self.coef = coef
        self.nvars = nvars
        self.order = order

    # construction -----------------------------------------------------
    @classmethod
    def constant(cls, value: float, nvars: int, order: int) -> "Jet":
        c = np.zeros(_size(nvars, order))
        c[0] = value
        return cls(c, nvars, order)

    @classmethod
    def variable(cls, var: int, value: float, nvars: int, order: int) -> "Jet":
        c = np.zeros(_size(nvars, order))
        c[0] = value
        if order >= 1:
            c[1 + var] = 1.0
        return cls(c, nvars, order)

    @classmethod
    def variables(cls, point: Sequence[float], order: int) -> list["Jet"]:
        p = len(point)
        return [cls.variable(i, float(point[i]), p, order) for i in range(p)]

    # inspection -------------------------------------------------------
    @property
    def value(self) -> float:
        return float(self.coef[0])

    def __float__(self) -> float:
        return float(self.coef[0])

    def __repr__(self) -> str:
        return f"Jet(value={self.value!r}, nvars={self.nvars}, order={self.order})"

    def partial(self, alpha: Sequence[int]) -> float:
        """The partial derivative d^alpha f at the expansion point."""
        _, lookup = _indices(self.nvars, self.order)
        i = lookup[tuple(alpha)]
        return float(self.coef[i] * _factorials(self.nvars, self.order)[i])

    def gradient(self) -> np.ndarray:
        return np.array(self.coef[1 : 1 + self.nvars], dtype=float)

    def hessian(self) -> np.ndarray:
        if self.order < 2:
            raise ValueError("hessian needs an order >= 2 jet")
        p = self.nvars
        _, lookup = _indices(p, self.order)
        out = np.empty((p, p))
        for i in range(p):
            for j in range(i, p):
                a = [0] * p
                a[i] += 1
                a[j] += 1
                c = self.coef[lookup[tuple(a)]]
                out[i, j] = out[j, i] = c * (2.0 if i == j else 1.0)
        return out

    # structural operations ------------------------------------------
    def truncate(self, order: int) -> "Jet":
        if order >= self.order:
            return self
        return Jet(self.coef[: _size(self.nvars, order)].copy(), self.nvars, order)

    def deriv(self, var: int) -> "Jet":
        """Partial derivative with respect to variable ``var`` (order drops by one)."""
        if self.order < 1:
            raise ValueError("cannot differentiate an order-0 jet")
        src, fac = _deriv_table(self.nvars, self.order, var)
        return Jet(self.coef[src] * fac, self.nvars, self.order - 1)

    def restrict(self, keep: Sequence[int]) -> "Jet":
        """Freeze every variable not in ``keep`` at its expansion point."""
        keep = tuple(keep)
        src = _restrict_table(self.nvars, self.order, keep)
        return Jet(self.coef[src].copy(), len(keep), self.order)

    # arithmetic -------------------------------------------------------
    def _coerce(self, other):
        if isinstance(other, Jet):
            if other.nvars != self.nvars:
                raise ValueError("jets over different variable sets")
            k = min(self.order, other.order)
            return self.truncate(k), other.truncate(k)
        if isinstance(other, (Real, np.floating, np.integer)):
            return self, None
        return NotImplemented, None

    def __neg__(self):
        return Jet(-self.coef, self.nvars, self.order)

    def __pos__(self):
        return self

    def __add__(self, other):
        a, b = self._coerce(other)
        if a is NotImplemented:
            return NotImplemented
        if b is None:
            c = a.coef.copy()
            c[0] += float(other)
            return Jet(c, a.nvars, a.order)
        return Jet(a.coef + b.coef, a.nvars, a.order)

    __radd__ = __add__

    def __sub__(self, other):
        a, b = self._coerce(other)
        if a is NotImplemented:
            return NotImplemented
        if b is None:
            c = a.coef.copy()
            c[0] -= float(other)
            return Jet(c, a.nvars, a.order)
        return Jet(a.coef - b.coef, a.nvars, a.order)

    def __rsub__(self, other):
        return (-self).__add__(other)

    def __mul__(self, other):
        a, b = self._coerce(other)
        if a is NotImplemented:
            return NotImplemented
        if b is None:
            return Jet(a.coef * float(other), a.nvars, a.order)
        left, right, out = _product_table(a.nvars, a.order)
        c = np.bincount(out, weights=a.coef[left] * b.coef[right], minlength=len(a.coef))
        return Jet(c, a.nvars, a.order)

    __rmul__ = __mul__

    def __truediv__(self, other):
        if isinstance(other, Jet):
            return self * other.reciprocal()
        if isinstance(other, (Real, np.floating, np.integer)):
            return Jet(self.coef / float(other), self.nvars, self.order)
        return NotImplemented

    def __rtruediv__(self, other):
        if isinstance(other, (Real, np.floating, np.integer)):
            return self.reciprocal() * float(other)
        return NotImplemented

    def __pow__(self, exponent):
        if isinstance(exponent, (int, np.integer)):
            n = int(exponent)
            if n < 0:
                return (self ** (-n)).reciprocal()
            result = Jet.constant(1.0, self.nvars, self.order)
            base = self
            while n:
                if n & 1:
                    result = result * base
                n >>= 1
                if n:
                    base = base * base
            return result
        if isinstance(exponent, (Real, np.floating)):
            return self._apply(_pow_series(self.value, float(exponent), self.order))
        return NotImplemented

    def reciprocal(self) -> "Jet":
        return self._apply(_pow_series(self.value, -1.0, self.order))

    def _apply(self, series: np.ndarray) -> "Jet":
        """Compose a univariate Taylor series (about our value) with this jet."""
        h = Jet(self.coef.copy(), self.nvars, self.order)
        h.coef[0] = 0.0
        out = Jet.constant(series[self.order], self.nvars, self.order)
        for k in range(self.order - 1, -1, -1):
            out = out * h
            out.coef[0] += series[k]
        return out


# ---------------------------------------------------------------------------
# univariate Taylor series of elementary functions


def _pow_series(u0: float, r: float, order: int) -> np.ndarray:
    if u0 <= 0.0 and not float(r).is_integer():
        raise ValueError(f"non-integer power of non-positive value {u0}")
    out = np.empty(order + 1)
    coef = 1.0
    for k in range(order + 1):
        out[k] = coef * u0 ** (r - k)
        coef *= (r - k) / (k + 1)
    return out


def _exp_series(u0, order):
    e = math.exp(u0)
    return np.array([e / math.factorial(k) for k in range(order + 1)])


def _log_series(u0, order):
    if u0 <= 0.0:
        raise ValueError(f"log of non-positive value {u0}")
    out = np.empty(order + 1)
    out[0] = math.log(u0)
    for k in range(1, order + 1):
        out[k] = (-1) ** (k + 1) / (k * u0**k)
    return out


def _sin_series(u0, order, phase=0.0):
    return np.array(
        [math.sin(u0 + phase + k * math.pi / 2) / math.factorial(k) for k in range(order + 1)]
    )


def _atan_series(u0, order):
    # d/dt atan(u0 + t) = 1 / p(t) with p = (1 + u0^2) + 2 u0 t + t^2
    p0, p1, p2 = 1.0 + u0 * u0, 2.0 * u0, 1.0
    q = np.zeros(order + 1)
    for k in range(order):
        acc = 1.0 if k == 0 else 0.0
        if k >= 1:
            acc -= p1 * q[k - 1]
        if k >= 2:
            acc -= p2 * q[k - 2]
        q[k] = acc / p0
    out = np.empty(order + 1)
    out[0] = math.atan(u0)
    for k in range(1, order + 1):
        out[k] = q[k - 1] / k
    return out


# ---------------------------------------------------------------------------
# float-or-jet helpers


def is_jet(x) -> bool:
    return isinstance(x, Jet)


def value_of(x) -> float:
    return x.value if isinstance(x, Jet) else float(x)


def sqrt(x):
    if isinstance(x, Jet):
        return x._apply(_pow_series(x.value, 0.5, x.order))
    return math.sqrt(x)


def exp(x):
    if isinstance(x, Jet):
        return x._apply(_exp_series(x.value, x.order))
    return math.exp(x)


def log(x):
    if isinstance(x, Jet):
        return x._apply(_log_series(x.value, x.order))
    return math.log(x)


def sin(x):
    if isinstance(x, Jet):
        return x._apply(_sin_series(x.value, x.order))
    return math.sin(x)


def cos(x):
    if isinstance(x, Jet):
        return x._apply(_sin_series(x.value, x.order, math.pi / 2))
    return math.cos(x)


def atan(x):
    if isinstance(x, Jet):
        return x._apply(_atan_series(x.value, x.order))
    return math.atan(x)


def fabs(x):
    if isinstance(x, Jet):
        if x.value == 0.0:
            raise ValueError("|x| is not differentiable at 0")
        return x if x.value > 0 else -x
    return abs(float(x))


# ---------------------------------------------------------------------------
# composition and small dense linear algebra over floats or jets


def compose(outer: Sequence[Jet], inner: Sequence) -> list:
    """Evaluate Taylor polynomials ``outer`` at the jets ``inner``.

    ``outer`` are jets in ``p`` variables expanded at some point ``z0``;
    ``inner`` is a sequence of ``p`` jets (or floats) whose values equal
    ``z0``.  The result is the jet of the composite map, truncated to the
    lower of the two orders.
    """
    outer = list(outer)
    p = outer[0].nvars
    if len(inner) != p:
        raise ValueError("composition arity mismatch")
    ref = next((z for z in inner if isinstance(z, Jet)), None)
    if ref is None:
        return [o.value for o in outer]
    q = ref.nvars
    order = min(min(o.order for o in outer), min(z.order for z in inner if isinstance(z, Jet)))
    deltas = []
    for z in inner:
        if isinstance(z, Jet):
            d = z.truncate(order)
            d = Jet(d.coef.copy(), q, order)
            d.coef[0] = 0.0
        else:
            d = None
        deltas.append(d)
    arr, lookup = _indices(p, order)
    monos: list = [None] * len(arr)
    monos[0] = Jet.constant(1.0, q, order)
    for i in range(1, len(arr)):
        a = arr[i]
        v = int(np.nonzero(a)[0][0])
        prev = a.copy()
        prev[v] -= 1
        base = monos[lookup[tuple(prev)]]
        monos[i] = None if (base is None or deltas[v] is None) else base * deltas[v]
    live = [i for i, m in enumerate(monos) if m is not None]
    basis = np.stack([monos[i].coef for i in live])
    out = []
    for o in outer:
        c = o.truncate(order).coef[live] @ basis
        out.append(Jet(c, q, order))
    return out


def _abs_val(x) -> float:
    return abs(x.value) if isinstance(x, Jet) else abs(float(x))


def solve(A, B):
    """Solve ``A X = B`` by Gaussian elimination with partial pivoting.

    ``A`` is an m x m nested sequence, ``B`` a length-m sequence or an
    m x k nested sequence; entries may be floats or jets.
    """
    m = len(A)
    M = [list(row) for row in A]
    vec = not isinstance(B[0], (list, tuple, np.ndarray))
    R = [[b] for b in B] if vec else [list(row) for row in B]
    for col in range(m):
        piv = max(range(col, m), key=lambda r: _abs_val(M[r][col]))
        if _abs_val(M[piv][col]) == 0.0:
            raise np.linalg.LinAlgError("singular matrix")
        M[col], M[piv] = M[piv], M[col]
        R[col], R[piv] = R[piv], R[col]
        inv_p = 1.0 / M[col][col]
        for r in range(col + 1, m):
            f = M[r][col] * inv_p
            if _abs_val(f) == 0.0 and not isinstance(f, Jet):
                continue
            for c in range(col + 1, m):
                M[r][c] = M[r][c] - f * M[col][c]
            R[r] = [x - f * y for x, y in zip(R[r], R[col])]
    X = [None] * m
    for r in range(m - 1, -1, -1):
        acc = list(R[r])
        for c in range(r + 1, m):
            acc = [a - M[r][c] * x for a, x in zip(acc, X[c])]
        X[r] = [a / M[r][r] for a in acc]
    return [x[0] for x in X] if vec else X


def inv(A):
    m = len(A)
    eye = [[1.0 if i == j else 0.0 for j in range(m)] for i in range(m)]
    return solve(A, eye)


def _perm_sign(perm) -> float:
    sign = 1.0
    seen = list(perm)
    for i in range(len(seen)):
        while seen[i] != i:
            j = seen[i]
            seen[i], seen[j] = seen[j], seen[i]
            sign = -sign
    return sign


def det(A):
    """Determinant; small matrices use the Leibniz expansion so that a zero
    pivot value never discards derivative information carried by jets."""
    m = len(A)
    if m <= 4:
        total = 0.0
        for perm in itertools.permutations(range(m)):
            term = _perm_sign(perm)
            for i in range(m):
                term = term * A[i][perm[i]]
            total = total + term
        return total
    M = [list(row) for row in A]
    sign = 1.0
    out = 1.0
    for col in range(m):
        piv = max(range(col, m), key=lambda r: _abs_val(M[r][col]))
        if _abs_val(M[piv][col]) == 0.0:
            return 0.0
        if piv != col:
            M[col], M[piv] = M[piv], M[col]
            sign = -sign
        out = out * M[col][col]
        inv_p = 1.0 / M[col][col]
        for r in range(col + 1, m):
            f = M[r][col] * inv_p
            for c in range(col + 1, m):
                M[r][c] = M[r][c] - f * M[col][c]
    return out * sign


def values(tree):
    """Strip jets down to their values inside nested lists."""
    if isinstance(tree, (list, tuple, np.ndarray)):
        return np.array([values(t) for t in tree], dtype=float)
    return value_of(tree)

