"""Complex images of rational lens maps and the magnification sum rule.

A lens model is a pair of rational deflection functions of the complexified
coordinates ``(z1, z2)``. Every fixed point of the complexified lens map is
found by elimination plus polishing; the signed magnifications of all of
them sum to one.
"""
__version__ = "0.1.0"

from .algebra import BiPoly, RationalFn, UniPoly, resultant_z2, roots
from .caustics import MultiplicityGrid, Window, critical_curves, map_to_caustics, multiplicity_scan
from .errors import *  # noqa: F401,F403
from .lefschetz import InvariantReport, lefschetz_sum, magnification, summarize
from .lens import (
    DeflectionModel,
    SourcePos,
    filament,
    lens_map_real,
    plummer,
    point_mass,
    point_mass_ensemble,
    raw_model,
    validate,
)
from .solver import FixedPoint, Solution, SolveOptions, solve, solve_fixed_points

__all__ = [
    "BiPoly",
    "RationalFn",
    "UniPoly",
    "resultant_z2",
    "roots",
    "MultiplicityGrid",
    "Window",
    "critical_curves",
    "map_to_caustics",
    "multiplicity_scan",
    "InvariantReport",
    "lefschetz_sum",
    "magnification",
    "summarize",
    "DeflectionModel",
    "SourcePos",
    "filament",
    "lens_map_real",
    "plummer",
    "point_mass",
    "point_mass_ensemble",
    "raw_model",
    "validate",
    "FixedPoint",
    "Solution",
    "SolveOptions",
    "solve",
    "solve_fixed_points",
]
