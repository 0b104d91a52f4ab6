"""Curvature functions, prescribed-curvature graph solvers, and checks."""

__version__ = "0.1.0"

from .diagnostics import (
    boundary_slope_check,
    boundary_slope_estimate,
    ordering_check,
    superharmonicity_check,
    uniqueness_criterion_check,
)
from .fields import AffineField, ConstantField, HyperbolicDistanceField
from .geometry import AmbientModel, GraphSurface, stability_operator
from .grids import DiskGrid, RectangleGrid
from .radial import (
    equidistant_cap,
    euclidean_cap,
    radial_eigenvalues,
    radial_solve,
)
from .solver import NewtonConfig, continuation_solve, newton_solve
from .spectral import K_of_matrix, dK_matrix, mu_infinity_estimate
from .symmfunc import (
    CurvatureFunctionSpec,
    EigenvalueVector,
    LimitValue,
    check_axioms,
    evaluate,
    limit_at_infinity,
    sigma,
)

__all__ = [
    "AffineField",
    "AmbientModel",
    "ConstantField",
    "CurvatureFunctionSpec",
    "DiskGrid",
    "EigenvalueVector",
    "GraphSurface",
    "HyperbolicDistanceField",
    "K_of_matrix",
    "LimitValue",
    "NewtonConfig",
    "RectangleGrid",
    "boundary_slope_check",
    "boundary_slope_estimate",
    "check_axioms",
    "continuation_solve",
    "dK_matrix",
    "equidistant_cap",
    "euclidean_cap",
    "evaluate",
    "limit_at_infinity",
    "mu_infinity_estimate",
    "newton_solve",
    "ordering_check",
    "radial_eigenvalues",
    "radial_solve",
    "sigma",
    "stability_operator",
    "superharmonicity_check",
    "uniqueness_criterion_check",
    "__version__",
]
