"""Numerical laboratory for maximal averages over moment curves."""

from .curves import (
    IntersectionReport,
    MomentCurve,
    PairInvariants,
    PlanarParabola,
    curve_intersections,
    curve_point,
    distance_to_curve,
    gamma_point,
    is_tangent,
    pair_invariants,
    planar_intersections,
    project_to_parabola,
    solve_tangent_curve,
)

__version__ = "0.1.0"

__all__ = [
    "IntersectionReport",
    "MomentCurve",
    "PairInvariants",
    "PlanarParabola",
    "curve_intersections",
    "curve_point",
    "distance_to_curve",
    "gamma_point",
    "is_tangent",
    "pair_invariants",
    "planar_intersections",
    "project_to_parabola",
    "solve_tangent_curve",
]
