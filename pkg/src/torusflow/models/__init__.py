"""Torus manifolds with equivariant atlases: CP^n, toric manifolds, even spheres."""

from .base import ChartPoint, FixedPointRecord, TorusManifold, rho, with_exponents
from .descriptors import PRESETS, load_model, model_from_descriptor, model_to_descriptor
from .projective import ProjectiveModel, normalize_homogeneous
from .sphere import SphereModel, SpherePoint
from .toric import Fan, ToricModel, cone_counts, cpn_fan, h_vector, hirzebruch_fan, validate_fan
from .verify import (
    check_inferred_weights,
    equivariance_violation,
    infer_chart_weights_numeric,
    infer_tangential_weights_numeric,
    match_fixed_point_weights,
    verify_chart_equivariance,
    verify_covering,
)


def fixed_points(model):
    return model.fixed_points()


def tangential_weights(model, p):
    return model.tangential_weights(p)


def chart_map(model, chart, x):
    return model.chart_map(chart, x)


def chart_inverse(model, point):
    return model.chart_inverse(point)
