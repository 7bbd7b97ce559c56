"""Numerics for lambda-hypersurfaces: model surfaces, meshes, drift operator, flow, pinching and growth."""

from .analytic import (
    CanonicalSurface,
    CurvatureSummary,
    Kind,
    curvature_summary,
    lambda_of,
    make_canonical,
    sectional_and_ricci,
    simons_rhs,
    weighted_functionals,
)
from .drift import DriftOperator, build_drift, ibp_defect, simons_residual_mesh
from .mesh import MeshError, TriMesh, VertexField, WeightedMeasure, generate

__version__ = "0.1.0"

__all__ = [
    "CanonicalSurface",
    "CurvatureSummary",
    "Kind",
    "curvature_summary",
    "lambda_of",
    "make_canonical",
    "sectional_and_ricci",
    "simons_rhs",
    "weighted_functionals",
    "DriftOperator",
    "build_drift",
    "ibp_defect",
    "simons_residual_mesh",
    "MeshError",
    "TriMesh",
    "VertexField",
    "WeightedMeasure",
    "generate",
]
