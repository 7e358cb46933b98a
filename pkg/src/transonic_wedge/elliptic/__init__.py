"""Discretization and solvers for the elliptic problem on the truncated quarter plane."""
from .assembly import BoundaryData, FaceCoefficients, LinearSystem, assemble_linearized, solve_linear
from .comparison import (ComparisonVerdict, CornerBarrier, Decay, DiscreteOperator, Regularity,
                         comparison_check, corner_barrier, oblique_corner_test, random_comparison_suite)
from .grid import PotentialField, Tag, TruncatedGrid
from .nonlinear import HodographProblem, solve_nonlinear
from .norms import WeightedNormReport, decay_report, measure_decay, weighted_sup

__all__ = [
    "BoundaryData", "FaceCoefficients", "LinearSystem", "assemble_linearized", "solve_linear",
    "PotentialField", "Tag", "TruncatedGrid", "HodographProblem", "solve_nonlinear",
    "ComparisonVerdict", "CornerBarrier", "Decay", "DiscreteOperator", "Regularity",
    "comparison_check", "corner_barrier", "oblique_corner_test", "random_comparison_suite",
    "WeightedNormReport", "decay_report", "measure_decay", "weighted_sup",
]
