"""Truncated Taylor arithmetic against sympy-differentiated oracles."""

from __future__ import annotations

import itertools

import numpy as np
import pytest
import sympy as sp
from hypothesis import given
from hypothesis import strategies as st

from finslerlab import jets
from finslerlab.jets import Jet

X, Y = sp.symbols("x y")

CASES = [
    (lambda a, b: jets.exp(a) * jets.sin(b), sp.exp(X) * sp.sin(Y)),
    (lambda a, b: jets.atan(a / b), sp.atan(X / Y)),
    (lambda a, b: jets.sqrt(a * a + 2.0 * b * b) ** 3, sp.sqrt(X**2 + 2 * Y**2) ** 3),
    (lambda a, b: jets.log(1.0 + a * a) / (2.0 + jets.cos(b)), sp.log(1 + X**2) / (2 + sp.cos(Y))),
    (lambda a, b: (a - 3.0 * b) ** -2.5, (X - 3 * Y) ** sp.Rational(-5, 2)),
]


def _oracle(expr, point, alpha):
    d = expr
    for sym, k in zip((X, Y), alpha):
        if k:
            d = sp.diff(d, sym, k)
    return float(d.subs({X: point[0], Y: point[1]}).evalf(30))


@pytest.mark.parametrize("case", range(len(CASES)))
def test_partials_match_symbolic_oracle(case):
    fn, expr = CASES[case]
    point = (0.7, -0.4) if case != 4 else (-0.3, -0.6)
    a, b = Jet.variables(point, 4)
    j = fn(a, b)
    for alpha in itertools.product(range(5), repeat=2):
        if sum(alpha) > 4:
            continue
        want = _oracle(expr, point, alpha)
        assert j.partial(alpha) == pytest.approx(want, rel=1e-11, abs=1e-11), alpha


def test_hessian_and_gradient_accessors():
    a, b = Jet.variables((1.5, 2.0), 2)
    j = a * a * b + 3.0 * b
    assert np.allclose(j.gradient(), [2 * 1.5 * 2.0, 1.5**2 + 3.0])
    assert np.allclose(j.hessian(), [[4.0, 3.0], [3.0, 0.0]])


def test_deriv_lowers_order():
    a, b = Jet.variables((0.3, 0.2), 3)
    j = jets.sin(a) * b
    d = j.deriv(0)
    assert d.order == 2
    assert d.value == pytest.approx(np.cos(0.3) * 0.2)
    assert d.partial((1, 0)) == pytest.approx(-np.sin(0.3) * 0.2)


finite = st.floats(-2.0, 2.0, allow_nan=False)


@given(st.lists(finite, min_size=9, max_size=9), st.lists(finite, min_size=9, max_size=9))
def test_det_matches_jacobi_formula(a_vals, da_vals):
    A0 = np.array(a_vals).reshape(3, 3) + 3.0 * np.eye(3)
    dA = np.array(da_vals).reshape(3, 3)
    (t,) = Jet.variables((0.0,), 1)
    A = [[A0[i, j] + dA[i, j] * t for j in range(3)] for i in range(3)]
    d = jets.det(A)
    assert d.value == pytest.approx(np.linalg.det(A0), rel=1e-10, abs=1e-10)
    cof = np.linalg.det(A0) * np.linalg.inv(A0).T
    assert d.gradient()[0] == pytest.approx(float(np.sum(cof * dA)), rel=1e-8, abs=1e-8)


@given(st.lists(finite, min_size=4, max_size=4), st.lists(finite, min_size=2, max_size=2))
def test_solve_agrees_with_numpy(a_vals, b_vals):
    A0 = np.array(a_vals).reshape(2, 2) + 4.0 * np.eye(2)
    b0 = np.array(b_vals)
    (t,) = Jet.variables((0.0,), 1)
    A = [[A0[i, j] + (i + j) * t for j in range(2)] for i in range(2)]
    x = jets.solve(A, [b0[0], b0[1]])
    assert np.allclose(jets.values(x), np.linalg.solve(A0, b0), atol=1e-12)
    # d/dt x = -A^{-1} (dA/dt) x
    dA = np.array([[0.0, 1.0], [1.0, 2.0]])
    want = -np.linalg.solve(A0, dA @ np.linalg.solve(A0, b0))
    assert np.allclose([c.gradient()[0] for c in x], want, atol=1e-10)


@given(finite, finite)
def test_product_rule(u, v):
    a, b = Jet.variables((u, v), 2)
    f = jets.exp(0.3 * a) + b
    g = a * b - 1.0
    fg = f * g
    assert np.allclose(fg.gradient(), f.gradient() * g.value + f.value * g.gradient(), atol=1e-10)
