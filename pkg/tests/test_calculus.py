"""Spray, connection, curvature and the differential operators."""

from __future__ import annotations

import math

import numpy as np
import pytest
import sympy as sp
from hypothesis import given, settings
from hypothesis import strategies as st

from finslerlab import (
    EuclideanMetric,
    HelicoidMetric,
    ScalarField,
    VolumeForm,
    christoffel,
    covariant_derivative,
    euclidean_h,
    eval_metric,
    flag_curvature,
    gradient,
    laplacians,
    model_from_dict,
    round_sphere_h,
    s3_hopf_kropina,
    s_curvature,
    spray,
)
from finslerlab import jets
from finslerlab.errors import DegenerateFlag, OutOfDomain
from finslerlab.isoparametric import linear_field, norm_field
from finslerlab.reproduce import cone_samples, cone_vector
from finslerlab.zoo import hopf_field, kropina_from_navigation, s_upper_zero

ORIGIN = [0.0, 0.0, 0.0]


def sphere_christoffel_oracle(point):
    xs = sp.symbols("x1:4")
    lam = 4 / (1 + sum(c**2 for c in xs)) ** 2
    h = lam * sp.eye(3)
    hinv = h.inv()
    sub = dict(zip(xs, point))
    out = np.zeros((3, 3, 3))
    for i in range(3):
        for j in range(3):
            for k in range(3):
                e = sum(hinv[i, l] * (sp.diff(h[l, j], xs[k]) + sp.diff(h[l, k], xs[j]) - sp.diff(h[j, k], xs[l]))
                        for l in range(3)) / 2
                out[i, j, k] = float(e.subs(sub))
    return out


def wobbly_field():
    return ScalarField(lambda x: jets.sin(x[0]) * x[1] + 0.3 * x[2] ** 2 + jets.exp(0.2 * x[0] * x[2]) + 2.0 * x[2], "wobbly")


# --- spray ------------------------------------------------------------------------


def test_christoffel_matches_symbolic_oracle():
    x = [0.3, -0.5, 0.2]
    assert np.allclose(christoffel(round_sphere_h(3), x), sphere_christoffel_oracle(x), atol=1e-12)


def test_minkowski_spray_vanishes():
    sp_ = spray(HelicoidMetric(1.0, 1.0), ORIGIN, [1.0, 0.0, 1.2])
    assert not np.any(sp_.G) and not np.any(sp_.Gamma)


def test_constant_wind_spray_vanishes_through_generic_route():
    K = kropina_from_navigation(euclidean_h(3), lambda x: [0.0, 0.0, 1.0])
    assert not K.minkowski
    rng = np.random.default_rng(4)
    for x, y in cone_samples(K, rng, 5):
        assert np.abs(spray(K, x, y).G).max() <= 1e-12


def test_riemannian_spray_is_half_christoffel_contraction():
    h = round_sphere_h(3)
    x, y = [0.3, -0.5, 0.2], np.array([1.0, 2.0, -0.5])
    want = 0.5 * np.einsum("ijk,j,k->i", sphere_christoffel_oracle(x), y, y)
    assert np.allclose(spray(h, x, y).G, want, atol=1e-12)


def test_hopf_kropina_spray_relation():
    K = s3_hopf_kropina()
    rng = np.random.default_rng(11)
    for x, y in cone_samples(K, rng, 10):
        G = spray(K, x, y).G
        Gbar = 0.5 * np.einsum("ijk,j,k->i", christoffel(K.h, x), y, y)
        F = eval_metric(K, x, y)
        rhs = Gbar - F * s_upper_zero(K.h, hopf_field, x, y)
        assert np.linalg.norm(G - rhs) <= 1e-5 * (1 + np.linalg.norm(G))


# --- covariant derivative -----------------------------------------------------------


def test_covariant_derivative_examples():
    H = HelicoidMetric(1.0, 1.0)
    assert np.allclose(covariant_derivative(H, [1.0, 0.0, 1.2], [0.3, 0.1, 0.2], lambda x: [1.0, 2.0, 3.0], ORIGIN), 0.0)
    E = EuclideanMetric(3)
    v = np.array([0.3, -1.0, 2.0])
    assert np.allclose(covariant_derivative(E, [1.0, 0.0, 0.0], v, lambda x: list(x), [0.5, 0.5, 0.5]), v)


def test_chern_connection_reduces_to_levi_civita():
    h = round_sphere_h(3)
    x = [0.3, -0.5, 0.2]
    X = lambda z: [z[1] * z[2], 1.0 + z[0], z[0] ** 2]
    v = np.array([0.4, 1.0, -0.7])
    Gam = sphere_christoffel_oracle(x)
    dX = np.array([[0.0, x[2], x[1]], [1.0, 0.0, 0.0], [2 * x[0], 0.0, 0.0]])
    Xv = np.array(X(x))
    want = dX @ v + np.einsum("ijk,j,k->i", Gam, v, Xv)
    for w in ([1.0, 0.0, 0.0], [0.2, -0.3, 0.9]):
        assert np.allclose(covariant_derivative(h, w, v, X, x), want, atol=1e-8)


# --- S-curvature -------------------------------------------------------------------------


def test_s_curvature_examples():
    assert s_curvature(HelicoidMetric(1.0, 1.0), VolumeForm.lebesgue(), ORIGIN, [1.0, 0.0, 1.2]) == 0.0
    sigma = VolumeForm(lambda x: jets.exp(x[0]), "exp")
    y = [2.0, -1.0, 0.5]
    assert s_curvature(EuclideanMetric(3), sigma, ORIGIN, y) == pytest.approx(-2.0)


def test_s_curvature_vanishes_for_killing_wind():
    K = s3_hopf_kropina()
    vol = VolumeForm.busemann_hausdorff(K)
    for x, y in cone_samples(K, np.random.default_rng(5), 10):
        assert abs(s_curvature(K, vol, x, y)) <= 1e-8


# --- flag curvature -------------------------------------------------------------------------


def test_minkowski_flag_curvature_is_zero():
    assert flag_curvature(HelicoidMetric(1.0, 1.0), ORIGIN, [1.0, 0.0, 1.2], [0.0, 1.0, 0.0]) == 0.0


@pytest.mark.parametrize("model_fn, tol", [(lambda: round_sphere_h(3), 1e-4), (s3_hopf_kropina, 1e-3)])
def test_unit_sphere_flag_curvature(model_fn, tol):
    model = model_fn()
    rng = np.random.default_rng(9)
    for x, y in cone_samples(model, rng, 10):
        v = rng.normal(size=3)
        assert flag_curvature(model, x, y, v) == pytest.approx(1.0, abs=tol)


def test_flag_must_be_two_dimensional():
    with pytest.raises(DegenerateFlag):
        flag_curvature(round_sphere_h(3), ORIGIN, [1.0, 0.0, 0.0], [2.0, 0.0, 0.0])


# --- gradient and Laplacians -----------------------------------------------------------------


def test_gradient_examples():
    K = model_from_dict({"kind": "kropina", "W": [0.0, 0.0, 1.0]})
    g = gradient(K, linear_field([0.0, 0.0, 1.0]), [0.2, 0.1, -0.4])
    assert np.allclose(g, [0.0, 0.0, 4.0], atol=1e-12)
    assert eval_metric(K, ORIGIN, g) == pytest.approx(2.0)
    E = EuclideanMetric(3)
    assert np.allclose(gradient(E, linear_field([1.0, -2.0, 0.5]), [3.0, 1.0, 0.0]), [1.0, -2.0, 0.5])
    x = np.array([1.0, -2.0, 2.0])
    assert np.allclose(gradient(E, norm_field(dim=3), x), x / 3.0, atol=1e-14)


def test_gradient_outside_dual_cone():
    # the helicoid dual cone excludes covectors along the third axis
    with pytest.raises(OutOfDomain):
        gradient(HelicoidMetric(1.0, 1.0), linear_field([0.0, 0.0, 1.0]), ORIGIN)


def test_laplacian_examples():
    E = EuclideanMetric(3)
    half_sq = ScalarField(lambda x: 0.5 * (x[0] ** 2 + x[1] ** 2 + x[2] ** 2))
    L = laplacians(E, VolumeForm.lebesgue(), half_sq, [0.3, 1.0, -2.0])
    assert L.hat == pytest.approx(3.0) and L.sigma == pytest.approx(3.0)
    K = model_from_dict({"kind": "kropina", "W": [0.0, 0.0, 1.0]})
    L = laplacians(K, VolumeForm.busemann_hausdorff(K), linear_field([0.3, 0.0, 1.0]), [0.3, 1.0, -2.0])
    assert abs(L.hat) <= 1e-12 and abs(L.sigma) <= 1e-12


@settings(max_examples=20)
@given(st.lists(st.floats(-1.0, 1.0), min_size=3, max_size=3))
def test_laplacian_closure_on_kropina(x):
    K = kropina_from_navigation(euclidean_h(3), lambda z: [0.6, 0.0, 0.8])
    f = wobbly_field()
    vol = VolumeForm(lambda z: jets.exp(0.1 * z[1]), "tilted")
    L = laplacians(K, vol, f, x)
    assert L.closure_residual <= 1e-6 * (1 + abs(L.hat))


def test_laplacian_closure_on_hopf_kropina():
    K = s3_hopf_kropina()
    vol = VolumeForm.busemann_hausdorff(K)
    f = ScalarField(lambda x: x[0] + 0.5 * x[1] * x[2] + 0.2 * x[2])
    rng = np.random.default_rng(2)
    for x in rng.uniform(-0.8, 0.8, size=(20, 3)):
        L = laplacians(K, vol, f, x)
        assert L.closure_residual <= 1e-6 * (1 + abs(L.hat))
        # S(grad f) = 0 for a Killing wind, so both Laplacians coincide
        assert L.hat == pytest.approx(L.sigma, abs=1e-8)
