"""Weighted Lorentz-Finsler geometry: geodesics, curvature and focusing.

Submodules
----------
autodiff
    Truncated multivariate Taylor jets in ``(x, v)``.
expression
    Parser for user-supplied Lagrangians and weights.
models
    Spacetime models, causal classification and the builtin families.
geometry
    Metric, spray, connections, curvature and weighted Ricci curvature.
geodesics
    Geodesic integration, epsilon-proper time and parallel frames.
congruence
    Jacobi tensors, weighted expansion and focusing diagnostics.
surfaces
    Lightlike normals and null expansions of spacelike surfaces.
runner, cli
    Config-driven scenarios, reports and the command line.
"""

__version__ = "0.1.0"

from .autodiff import DiffConfig, DomainError, Jet, finite_difference_check, lift, partial  # noqa: E402
from .expression import ExpressionError, parse_expression  # noqa: E402
from .models import (ModelError, ModelIntegrityError, SpacetimeModel, builtin_registry,  # noqa: E402
                     classify_vector, count_cone_components, lorentz_finsler_norm,
                     model_from_expressions)
from .geometry import (ParameterError, WeightedRicciParams, c_coefficient, connection_at,  # noqa: E402
                       curvature_at, epsilon_range_check, flag_curvature, metric_at,
                       psi_derivatives, weighted_ricci)
from .geodesics import (GeodesicSolution, exponential_map, integrate_geodesic,  # noqa: E402
                        orthonormal_frame, transport_frame)
from .congruence import (detect_conjugate_points, evolve_weighted_congruence,  # noqa: E402
                         frame_curvature, genericity_probe, point_congruence_tensor, s0_prediction)

__all__ = [
    "DiffConfig", "DomainError", "Jet", "finite_difference_check", "lift", "partial",
    "ExpressionError", "parse_expression",
    "ModelError", "ModelIntegrityError", "SpacetimeModel", "builtin_registry", "classify_vector",
    "count_cone_components", "lorentz_finsler_norm", "model_from_expressions",
    "ParameterError", "WeightedRicciParams", "c_coefficient", "connection_at", "curvature_at",
    "epsilon_range_check", "flag_curvature", "metric_at", "psi_derivatives", "weighted_ricci",
    "GeodesicSolution", "exponential_map", "integrate_geodesic", "orthonormal_frame",
    "transport_frame",
    "detect_conjugate_points", "evolve_weighted_congruence", "frame_curvature",
    "genericity_probe", "point_congruence_tensor", "s0_prediction",
]
