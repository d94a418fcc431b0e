from __future__ import annotations

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from finslerlab import (
    EuclideanMetric,
    HelicoidMetric,
    clifford_torus,
    cylinder,
    eval_metric,
    helicoid,
    hyperplane,
    kropina_equivalence_report,
    model_from_dict,
    round_sphere_h,
    s3_hopf_kropina,
    s3_sphere,
    shape_operator,
    sphere,
)
from finslerlab.errors import ConfigurationError
from finslerlab.shape import group_multiplicities, umbilic_minimal_flags
from finslerlab.surfaces import graph
from finslerlab.zoo import alpha_beta_normal

E3 = EuclideanMetric(3)


def kropina(W=(1.0, 0.0, 0.0)):
    return model_from_dict({"kind": "kropina", "W": list(W)})


# --- Euclidean references -------------------------------------------------------------


def test_sphere_outward_normal_and_curvature():
    S = sphere(3, 2.0)
    for u in S.grid():
        rep = shape_operator(E3, S, u)
        assert np.allclose(rep.n, rep.x / 2.0, atol=1e-12)
        assert np.allclose(rep.curvatures, [-0.5, -0.5], atol=1e-12)
        assert umbilic_minimal_flags(rep) == (True, False)


def test_hyperplane_is_flat_with_identity_metric():
    P = hyperplane(3, [1.0, 2.0, 2.0], 0.5)
    rep = shape_operator(E3, P, [0.2, -0.4])
    assert np.allclose(rep.ghat, np.eye(2), atol=1e-14)
    assert np.allclose(rep.A, 0.0, atol=1e-14)


def test_cylinder_is_not_umbilic():
    C = cylinder(3, 0.5)
    rep = shape_operator(E3, C, [1.0, 0.3])
    assert np.allclose(sorted(rep.curvatures), [-2.0, 0.0], atol=1e-12)
    assert rep.multiplicities == [1, 1]
    assert umbilic_minimal_flags(rep) == (False, False)


@given(st.floats(-2, 2), st.floats(-2, 2), st.floats(-2, 2))
def test_graph_curvatures_at_vertex(a, b, c):
    # at u = 0 the upward normal is e3 and D_X n = -(Q X, 0), so A = Q
    Q = [[a, b], [b, c]]
    rep = shape_operator(E3, graph(3, Q), [0.0, 0.0])
    assert np.allclose(rep.curvatures, np.linalg.eigvalsh(Q), atol=1e-10)


# --- Clifford torus and great sphere in the round three-sphere ---------------------------


def test_clifford_torus_in_round_chart():
    T = clifford_torus()
    h = round_sphere_h(3)
    for u in T.grid({"u": (0.1, 6.0, 3), "v": (0.2, 6.1, 3)}):
        rep = shape_operator(h, T, u)
        assert np.allclose(sorted(rep.curvatures), [-1.0, 1.0], atol=1e-8)


def test_small_sphere_curvature_in_round_chart():
    # {X4 = t} has principal curvatures t / sqrt(1 - t^2) up to orientation
    t = 0.4
    rep = shape_operator(round_sphere_h(3), s3_sphere(t), [1.0, 2.0])
    k = t / math.sqrt(1 - t * t)
    assert np.allclose(np.abs(rep.curvatures), [k, k], atol=1e-8)
    assert rep.multiplicities == [2]


# --- Kropina spaces -----------------------------------------------------------------------


def test_kropina_normal_is_translated_riemannian_normal():
    K = kropina()
    S = sphere(3, 2.0)
    for u in S.grid():
        rep = shape_operator(K, S, u)
        assert np.allclose(rep.n, rep.nbar + [1.0, 0.0, 0.0], atol=1e-9)
        assert eval_metric(K, rep.x, rep.n) == pytest.approx(1.0, abs=1e-12)


def test_kropina_induced_metric_is_conformal():
    K = kropina()
    S = sphere(3, 2.0)
    for u in S.grid():
        rk = shape_operator(K, S, u)
        rh = shape_operator(E3, S, u)
        W0 = float(rk.n @ [1.0, 0.0, 0.0])
        assert np.allclose(rk.ghat, rh.ghat / W0, atol=1e-8 * np.abs(rh.ghat).max())


def test_kropina_routes_agree():
    K = kropina()
    S = sphere(3, 2.0)
    for u in S.grid({"t1": (0.4, 2.6, 3), "t2": (0.0, 6.0, 3)}):
        primal = shape_operator(K, S, u, route="primal")
        dual = shape_operator(K, S, u, route="dual")
        assert np.allclose(primal.A, dual.A, atol=1e-8)


def test_equivalence_report_sphere():
    rep = kropina_equivalence_report(kropina(), sphere(3, 2.0), sphere(3, 2.0).grid(), tol=1e-8)
    assert rep.passed
    for s in rep.samples:
        assert s.multiplicities == ((2,), (2,))


def test_equivalence_report_clifford_torus():
    T = clifford_torus()
    K = s3_hopf_kropina()
    rep = kropina_equivalence_report(K, T, T.grid({"u": (0.1, 6.0, 3), "v": (0.2, 6.1, 3)}), tol=1e-6)
    assert rep.passed
    for s in rep.samples:
        assert np.allclose(sorted(s.kropina), [-1.0, 1.0], atol=1e-6)
        assert s.multiplicities == ((1, 1), (1, 1))
        # the wind is tangent to the torus, so W0(n) = 1 and ghat equals hbar
        assert s.conformal_residual <= 1e-8


def test_equivalence_report_great_sphere_is_umbilic():
    S = s3_sphere(0.0)
    rep = kropina_equivalence_report(s3_hopf_kropina(), S, S.grid({"u": (0.4, 2.4, 3), "v": (0.1, 6.0, 3)}))
    assert rep.passed
    values = [k for s in rep.samples for k in s.kropina]
    assert max(values) - min(values) <= 1e-6


def test_equivalence_report_needs_kropina():
    with pytest.raises(ConfigurationError):
        kropina_equivalence_report(E3, sphere(3, 2.0), [[1.0, 1.0]])


# --- helicoid ------------------------------------------------------------------------------


def test_helicoid_principal_curvatures():
    H = HelicoidMetric(1.0, 1.0)
    imm = helicoid(1.0)
    for u in imm.grid({"u": (0.05, 0.95, 5), "v": (0.0, 6.0, 5)}):
        rep = shape_operator(H, imm, u)
        assert np.allclose(rep.curvatures, [-1.0, 1.0], atol=1e-6)
        assert umbilic_minimal_flags(rep) == (False, True)


def test_helicoid_normal_matches_profile_composition():
    H = HelicoidMetric(1.0, 1.0)
    u, v = 0.5, 0.3
    rep = shape_operator(H, helicoid(1.0), [u, v])
    tangents = np.array([[math.cos(v), math.sin(v), 0.0], [-u * math.sin(v), u * math.cos(v), 1.0]])
    nbar = np.cross(tangents[0], tangents[1])
    nbar = nbar / np.linalg.norm(nbar) * np.sign(nbar @ rep.nbar)
    assert np.allclose(rep.n, alpha_beta_normal(H, nbar, rep.x), atol=1e-8)


@settings(max_examples=15)
@given(st.floats(0.6, 1.6), st.floats(0.1, 0.9), st.floats(0.0, 6.2))
def test_helicoid_family_curvatures(a, u, v):
    rep = shape_operator(HelicoidMetric(a, 1.0), helicoid(a), [u * min(1.0, 1.0 / a), v])
    assert np.allclose(rep.curvatures, [-1.0, 1.0], atol=1e-6)
    assert rep.self_adjoint_residual <= 1e-8


def test_multiplicity_grouping():
    assert group_multiplicities(np.array([-1.0, -1.0 + 1e-9, 2.0])) == [2, 1]
    assert group_multiplicities(np.array([0.5])) == [1]
