from __future__ import annotations

import numpy as np
import pytest
import sympy as sp
from hypothesis import given, settings
from hypothesis import strategies as st

from finslerlab import (
    EuclideanMetric,
    HelicoidMetric,
    dual_tensor,
    fundamental_tensor,
    legendre,
    legendre_inverse,
    model_from_dict,
    s3_hopf_kropina,
)
from finslerlab.engine import fd_hessian
from finslerlab.reproduce import cone_samples, cone_vector
from finslerlab.zoo import kropina_tensor_closed_form

ORIGIN = [0.0, 0.0, 0.0]

FAMILIES = {
    "euclidean": lambda: EuclideanMetric(3),
    "kropina": lambda: model_from_dict({"kind": "kropina", "W": [0.0, 0.0, 1.0]}),
    "kropina-tilted": lambda: model_from_dict({"kind": "kropina", "W": [0.6, 0.0, 0.8]}),
    "hopf": s3_hopf_kropina,
    "helicoid": lambda: HelicoidMetric(1.0, 1.0),
    "alpha-beta": lambda: model_from_dict({"kind": "alpha-beta", "b": [0, 0, 1], "b0": 1.0, "phi": {"family": "kropina"}}),
    "dual-alpha-beta": lambda: model_from_dict({"kind": "dual-alpha-beta", "beta_star": [0, 0, 1],
                                                "phi": {"family": "helicoid", "a": 0.7, "b": 1.0}}),
}


def test_euclidean_tensor_is_identity():
    t = fundamental_tensor(EuclideanMetric(3), ORIGIN, [0.3, -2.0, 1.0])
    assert np.allclose(t.g, np.eye(3), atol=1e-14)
    assert np.allclose(t.cartan, 0.0, atol=1e-14)


def _kropina_symbolic_g(y0):
    y = sp.symbols("y1:4")
    F = (y[0] ** 2 + y[1] ** 2 + y[2] ** 2) / (2 * y[2])
    L = F**2 / 2
    sub = dict(zip(y, y0))
    return np.array([[float(sp.diff(L, y[i], y[j]).subs(sub)) for j in range(3)] for i in range(3)])


@pytest.mark.parametrize("y", [(0.3, -0.2, 1.0), (1.0, 1.0, 0.6), (-2.0, 0.5, 0.7)])
def test_kropina_tensor_against_oracles(y):
    K = FAMILIES["kropina"]()
    g = fundamental_tensor(K, ORIGIN, y).g
    sym = _kropina_symbolic_g(y)
    fd = fd_hessian(lambda w: 0.5 * K.primal(ORIGIN, list(w)) ** 2, y)
    closed = kropina_tensor_closed_form(K, ORIGIN, y)
    scale = np.abs(sym).max()
    assert np.abs(g - sym).max() <= 1e-12 * scale
    assert np.abs(closed - sym).max() <= 1e-12 * scale
    assert np.abs(fd - sym).max() <= 1e-6 * scale


@pytest.mark.parametrize("name", sorted(FAMILIES))
def test_positive_definite_on_cone(name):
    model = FAMILIES[name]()
    rng = np.random.default_rng(7)
    for x, y in cone_samples(model, rng, 20 if name == "dual-alpha-beta" else 100):
        assert np.linalg.eigvalsh(fundamental_tensor(model, x, y).g).min() > 0


@pytest.mark.parametrize("name", sorted(FAMILIES))
@settings(max_examples=15)
@given(seed=st.integers(0, 2**16))
def test_tensor_identities(name, seed):
    model = FAMILIES[name]()
    (x, y), = cone_samples(model, np.random.default_rng(seed), 1)
    t = fundamental_tensor(model, x, y)
    F = model.primal(list(x), list(y)) if model.has_primal else model.dual(list(x), list(legendre(model, x, y)))
    assert np.allclose(t.g, t.g.T, atol=1e-12 * np.abs(t.g).max())
    assert float(y @ t.g @ y) == pytest.approx(float(F) ** 2, rel=1e-9)
    # the Cartan tensor is totally symmetric and annihilates y
    scale = max(np.abs(t.cartan).max(), 1.0)
    assert np.abs(np.einsum("ijk,k->ij", t.cartan, y)).max() <= 1e-8 * scale * np.linalg.norm(y)
    assert np.allclose(t.cartan, t.cartan.transpose(1, 0, 2), atol=1e-10 * scale)
    assert np.allclose(t.cartan, t.cartan.transpose(0, 2, 1), atol=1e-10 * scale)


# --- Legendre transform -----------------------------------------------------------


def test_legendre_examples():
    assert np.allclose(legendre(EuclideanMetric(2), [0, 0], [3, 4]), [3, 4])
    assert np.allclose(legendre_inverse(EuclideanMetric(2), [0, 0], [3, 4]), [3, 4])
    K = FAMILIES["kropina"]()
    assert np.allclose(legendre(K, ORIGIN, [0, 0, 1]), [0, 0, 0.25], atol=1e-14)
    assert np.allclose(legendre_inverse(K, ORIGIN, [0, 0, 0.25]), [0, 0, 1], atol=1e-12)
    # F*(L(y)) = F(y) through the closed-form dual
    assert K.dual(ORIGIN, [0, 0, 0.25]) == pytest.approx(0.5)


@pytest.mark.parametrize("name", sorted(FAMILIES))
@settings(max_examples=15)
@given(seed=st.integers(0, 2**16))
def test_legendre_round_trip_and_homogeneity(name, seed):
    model = FAMILIES[name]()
    rng = np.random.default_rng(seed)
    (x, y), = cone_samples(model, rng, 1)
    xi = legendre(model, x, y)
    back = legendre_inverse(model, x, xi)
    assert np.allclose(back, y, rtol=1e-9, atol=1e-9 * np.linalg.norm(y))
    assert np.allclose(legendre(model, x, 2.0 * y), 2.0 * xi, rtol=1e-12, atol=1e-12 * np.linalg.norm(xi))
    if model.has_dual and model.has_primal:
        # the dual tensor is the inverse of the primal one at corresponding points
        g = fundamental_tensor(model, x, y).g
        gs = dual_tensor(model, x, xi).g
        assert np.allclose(g @ gs, np.eye(3), atol=1e-7)


def test_helicoid_conormal_inverse_is_unit_and_tangent():
    H = HelicoidMetric(1.0, 1.0)
    # helicoid (u cos v, u sin v, v) at (u, v) = (0.5, 0): tangents (1,0,0), (0,0.5,1)
    xi = np.cross([1.0, 0.0, 0.0], [0.0, 0.5, 1.0])
    xi = xi / H.dual(ORIGIN, list(xi))
    y = legendre_inverse(H, [0.5, 0.0, 0.0], xi)
    assert H.dual(ORIGIN, list(legendre(H, ORIGIN, y))) == pytest.approx(1.0, abs=1e-10)
    assert float(xi @ y) == pytest.approx(1.0, abs=1e-10)
    assert float(legendre(H, ORIGIN, y) @ [1.0, 0.0, 0.0]) == pytest.approx(0.0, abs=1e-10)


def test_cone_vector_stays_at_point():
    model = FAMILIES["hopf"]()
    rng = np.random.default_rng(3)
    x = np.array([0.2, 0.1, -0.3])
    y = cone_vector(model, rng, x)
    assert model.in_cone(x, y)
