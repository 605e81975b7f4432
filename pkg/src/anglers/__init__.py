"""Angle structures on ideal triangulations of 3-manifolds with geodesic boundary."""

from .angles import AngleAssignment, PartiallyFlatAssignment, find_angle_structure, perturb, t_max, verify
from .triangulation import IdealTriangulation, build_triangulation, from_dict, validate

__all__ = [
    "AngleAssignment",
    "IdealTriangulation",
    "PartiallyFlatAssignment",
    "build_triangulation",
    "find_angle_structure",
    "from_dict",
    "perturb",
    "t_max",
    "validate",
    "verify",
]
__version__ = "0.1.0"
