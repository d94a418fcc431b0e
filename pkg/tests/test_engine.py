from __future__ import annotations

import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from finslerlab import jets
from finslerlab.engine import EXACT, FD, current_mode, derivative_mode, fd_gradient, fd_hessian, taylor, tolerance_floor


def smooth(z):
    return jets.exp(0.5 * z[0]) * jets.cos(z[1]) + z[0] * z[1] ** 2


def smooth_grad(z):
    x, y = z
    return np.array([0.5 * math.exp(0.5 * x) * math.cos(y) + y * y,
                     -math.exp(0.5 * x) * math.sin(y) + 2 * x * y])


def smooth_hess(z):
    x, y = z
    e = math.exp(0.5 * x)
    return np.array([[0.25 * e * math.cos(y), -0.5 * e * math.sin(y) + 2 * y],
                     [-0.5 * e * math.sin(y) + 2 * y, -e * math.cos(y) + 2 * x]])


def test_default_mode_is_exact_and_context_restores():
    assert current_mode() == EXACT
    with derivative_mode(FD):
        assert current_mode() == FD
        assert tolerance_floor() == pytest.approx(1e-4)
    assert current_mode() == EXACT
    assert tolerance_floor() == 0.0


def test_unknown_mode_rejected():
    with pytest.raises(ValueError):
        with derivative_mode("symbolic"):
            pass


@given(st.floats(-1.0, 1.0), st.floats(-1.0, 1.0))
def test_exact_and_fd_agree(x, y):
    z = (x, y)
    je = taylor(smooth, z, 2)
    jf = taylor(smooth, z, 2, mode=FD)
    assert np.allclose(je.gradient(), smooth_grad(z), atol=1e-12)
    assert np.allclose(je.hessian(), smooth_hess(z), atol=1e-12)
    assert np.allclose(jf.gradient(), smooth_grad(z), atol=1e-7)
    assert np.allclose(jf.hessian(), smooth_hess(z), atol=1e-5)


def test_fd_fourth_derivative_via_extrapolation():
    # d^4/dx^4 exp(x) sin(x) = -4 exp(x) sin(x)
    f = lambda z: jets.exp(z[0]) * jets.sin(z[0])
    j = taylor(f, (0.4,), 4, mode=FD)
    assert j.partial((4,)) == pytest.approx(-4 * math.exp(0.4) * math.sin(0.4), rel=1e-5)
    assert j.partial((3,)) == pytest.approx(-2 * math.exp(0.4) * (math.sin(0.4) - math.cos(0.4)), rel=1e-5)


def test_fd_step_halves_when_stencil_leaves_domain():
    # sqrt is undefined for z < 0; a unit step around 0.05 leaves the domain
    j = taylor(lambda z: jets.sqrt(z[0]), (0.05,), 2, mode=FD, scale=[1.0])
    assert j.gradient()[0] == pytest.approx(0.5 / math.sqrt(0.05), rel=1e-4)
    assert j.hessian()[0, 0] == pytest.approx(-0.25 * 0.05**-1.5, rel=1e-3)


def test_vector_valued_taylor():
    out = taylor(lambda z: np.array([z[0] * z[1], jets.sin(z[0])], dtype=object), (0.2, 3.0), 1)
    assert out[0].gradient() == pytest.approx([3.0, 0.2])
    assert out[1].gradient() == pytest.approx([math.cos(0.2), 0.0])


def test_plain_fd_helpers():
    f = lambda z: float(smooth(list(z)))
    z = (0.3, -0.2)
    assert np.allclose(fd_gradient(f, z), smooth_grad(z), atol=1e-7)
    assert np.allclose(fd_hessian(f, z), smooth_hess(z), atol=1e-5)
