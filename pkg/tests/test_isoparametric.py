from __future__ import annotations

import numpy as np
import pytest

from finslerlab import (
    ConfigurationError,
    EuclideanMetric,
    HelicoidMetric,
    VolumeForm,
    isoparametric_check,
    minkowski_dual_check,
    model_from_dict,
    transnormal_check,
)
from finslerlab.errors import InsufficientSamples, UnsupportedOperation
from finslerlab.isoparametric import field_from_dict, linear_field, norm_field, quadratic_field

BOX = ([-2.0, -2.0, -2.0], [2.0, 2.0, 2.0])
E3 = EuclideanMetric(3)


def rng(seed=0):
    return np.random.default_rng(seed)


def kropina():
    return model_from_dict({"kind": "kropina", "W": [0.0, 0.0, 1.0]})


def negative_control():
    return quadratic_field([[0.0, 0.0, 0.0], [0.0, 2.0, 0.0], [0.0, 0.0, 0.0]], [1.0, 0.0, 0.0])


def test_linear_field_in_minkowski_space_is_transnormal_with_zero_spread():
    H = HelicoidMetric(1.0, 1.0)
    v = transnormal_check(H, linear_field([1.0, 0.0, 0.1]), [0.0, 0.5], box=BOX, rng=rng())
    assert v.transnormal
    assert all(s["F_grad"] == 0.0 for s in v.spreads.values())


def test_kropina_height_function():
    K = kropina()
    v = isoparametric_check(K, VolumeForm.busemann_hausdorff(K), linear_field([0.0, 0.0, 1.0]), [0.0, 1.0],
                            box=BOX, rng=rng())
    assert v.isoparametric
    assert all(a == pytest.approx(2.0) for a in v.a.values())
    assert all(abs(b) <= 1e-12 for b in v.b_hat.values())


def test_negative_control_fails():
    v = transnormal_check(E3, negative_control(), [0.0, 1.0], box=BOX, rng=rng())
    assert not v.transnormal
    assert v.worst


def test_helicoid_linear_field_both_paths():
    H = HelicoidMetric(1.0, 1.0)
    f = linear_field([1.0, 0.0, 0.1])
    primal = isoparametric_check(H, VolumeForm.lebesgue(), f, [0.0, 0.5], box=BOX, rng=rng(1))
    dual = minkowski_dual_check(H, f, [0.0, 0.5], box=BOX, rng=rng(1))
    assert primal.isoparametric and dual.isoparametric
    assert all(abs(b) <= 1e-12 for b in primal.b_hat.values())
    assert all(abs(b) <= 1e-12 for b in dual.b_hat.values())


def test_distance_function_levels():
    f = norm_field(dim=3)
    primal = isoparametric_check(E3, VolumeForm.lebesgue(), f, [1.0, 1.5], box=BOX, rng=rng(2))
    dual = minkowski_dual_check(E3, f, [1.0, 1.5], box=BOX, rng=rng(2))
    assert primal.isoparametric and dual.isoparametric
    for t in (1.0, 1.5):
        assert primal.a[t] == pytest.approx(1.0, abs=1e-12)
        assert primal.b_hat[t] == pytest.approx(2.0 / t, rel=1e-10)
        assert dual.b_hat[t] == pytest.approx(primal.b_hat[t], abs=1e-8)


def test_mean_curvature_of_distance_levels():
    v = isoparametric_check(E3, VolumeForm.lebesgue(), norm_field(dim=3), [1.0], box=BOX, rng=rng(3),
                            mean_curvature=True)
    # level spheres of |x| with normal x/|x|: both curvatures -1/t
    assert np.allclose(v.levels[0].mean_curvature, -2.0, atol=1e-10)


def test_negative_control_fails_on_both_paths():
    f = negative_control()
    primal = isoparametric_check(E3, VolumeForm.lebesgue(), f, [0.0, 1.0], box=BOX, rng=rng(4))
    dual = minkowski_dual_check(E3, f, [0.0, 1.0], box=BOX, rng=rng(4))
    assert not primal.isoparametric and not dual.isoparametric
    assert not primal.transnormal and not dual.transnormal


def test_unreachable_level():
    with pytest.raises(InsufficientSamples):
        transnormal_check(E3, linear_field([0.0, 0.0, 1.0]), [50.0], box=BOX, rng=rng())


def test_dual_check_needs_minkowski_dual():
    with pytest.raises(UnsupportedOperation):
        minkowski_dual_check(model_from_dict({"kind": "kropina", "W": "hopf", "h": "round-sphere"}),
                             linear_field([0.0, 0.0, 1.0]), [0.0])


def test_field_descriptions():
    f = field_from_dict({"field": "linear", "coefficients": [1.0, 2.0, 3.0], "offset": 1.0}, 3)
    assert f([1.0, 1.0, 1.0]) == pytest.approx(7.0)
    with pytest.raises(ConfigurationError):
        field_from_dict({"field": "linear", "coefficients": [1.0, 2.0]}, 3)
    with pytest.raises(ConfigurationError):
        field_from_dict({"field": "bump"}, 3)
