"""Numerical toolkit for conic Finsler metrics, their hypersurfaces and isoparametric functions."""

from __future__ import annotations

from .calculus import (
    ScalarField,
    VolumeForm,
    christoffel,
    covariant_derivative,
    curvature,
    flag_curvature,
    gradient,
    laplacians,
    s_curvature,
    spray,
    spray_curvature,
)
from .duality import legendre, legendre_inverse
from .engine import derivative_mode, taylor
from .errors import ConfigurationError, FinslerLabError, GeometryError
from .isoparametric import isoparametric_check, minkowski_dual_check, transnormal_check
from .models import (
    AlphaBetaMetric,
    DualAlphaBetaMetric,
    EuclideanMetric,
    HelicoidMetric,
    KropinaMetric,
    RiemannianMetric,
    euclidean_h,
    round_sphere_h,
)
from .phi import ConstantOne, HelicoidPhi, KropinaPhi, validate_phi
from .report import TOOL_VERSION as __version__
from .shape import kropina_equivalence_report, level_set_shape, shape_operator
from .surfaces import Immersion, clifford_torus, cylinder, helicoid, hyperplane, s3_sphere, sphere
from .tensors import dual_tensor, eval_dual_metric, eval_metric, fundamental_tensor
from .zoo import killing_check, model_from_dict, s3_hopf_kropina

__all__ = [
    "AlphaBetaMetric",
    "ConfigurationError",
    "ConstantOne",
    "DualAlphaBetaMetric",
    "EuclideanMetric",
    "FinslerLabError",
    "GeometryError",
    "HelicoidMetric",
    "HelicoidPhi",
    "Immersion",
    "KropinaMetric",
    "KropinaPhi",
    "RiemannianMetric",
    "ScalarField",
    "VolumeForm",
    "christoffel",
    "clifford_torus",
    "covariant_derivative",
    "curvature",
    "cylinder",
    "derivative_mode",
    "dual_tensor",
    "euclidean_h",
    "eval_dual_metric",
    "eval_metric",
    "flag_curvature",
    "fundamental_tensor",
    "gradient",
    "helicoid",
    "hyperplane",
    "isoparametric_check",
    "killing_check",
    "kropina_equivalence_report",
    "laplacians",
    "legendre",
    "legendre_inverse",
    "level_set_shape",
    "minkowski_dual_check",
    "model_from_dict",
    "round_sphere_h",
    "s3_hopf_kropina",
    "s3_sphere",
    "s_curvature",
    "shape_operator",
    "sphere",
    "spray",
    "spray_curvature",
    "taylor",
    "transnormal_check",
    "validate_phi",
    "__version__",
]
