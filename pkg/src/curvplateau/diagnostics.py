"""Verification checks tying solver outputs to closed-form facts.

Each check is a pure function returning a CheckReport with a status, the
worst margin observed, and where it occurred.  Statuses beyond pass and
fail mark cases where the underlying statement does not apply
(out_of_hypothesis, precondition_failure) or where the data cannot
decide it (inconclusive); none of those count as a pass.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from . import symmfunc
from .symmfunc import CurvatureFunctionSpec
from .geometry import (GraphSurface, delta_K, gradient_norm,
                       levelset_shape_eigenvalues)
from .radial import CapProfile

# Boundary crossings nearly tangent to their grid line amplify the
# normal-derivative reconstruction; skip cosines below this.
GRAZING_LIMIT = 0.35
# Relative tolerance for the extrapolated boundary slope law.
SLOPE_REL_TOL = 0.02
# Discretization slack coefficient for the superharmonicity inequality,
# calibrated once on solved equidistant caps and frozen.
SUPERHARMONIC_SLACK = 0.5
# Fraction of interior nodes that must satisfy the inequality.
SUPERHARMONIC_NODE_FRACTION = 0.99
# Ambient fields probed by superharmonicity must have unit gradient.
UNIT_GRADIENT_TOL = 1.0e-8


@dataclass
class CheckReport:
    """Outcome of one verification check."""

    name: str
    status: str
    margin: float
    location: Optional[np.ndarray] = None
    tolerances: dict = field(default_factory=dict)
    details: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return self.status == "pass"


def _lagrange_derivative_weights(points: np.ndarray, t: float) -> np.ndarray:
    """Weights turning samples at `points` into d/dx of their interpolant at t."""
    pts = np.asarray(points, dtype=float)
    m = pts.size
    w = np.zeros(m)
    for j in range(m):
        denom = np.prod([pts[j] - pts[k] for k in range(m) if k != j])
        total = 0.0
        for i in range(m):
            if i == j:
                continue
            total += np.prod([t - pts[k] for k in range(m)
                              if k != j and k != i])
        w[j] = total / denom
    return w


def boundary_slope_estimate(surface: GraphSurface) -> float:
    """Median squared gradient at the rim from one-sided differences.

    The boundary value is constant along the rim, so the tangential
    derivative vanishes and the full gradient is the normal derivative
    times the outward normal.  Each boundary-crossing grid line gives
    one estimate through its directional derivative; grazing crossings
    are skipped.
    """
    grid = surface.grid
    stencils = grid.boundary_line_stencils()
    if not stencils:
        raise ValueError("surface grid offers no boundary line stencils")
    center = getattr(grid, "center", np.zeros(2))
    estimates = []
    for st in stencils:
        normal = st.crossing - center
        normal = normal / np.linalg.norm(normal)
        cosine = float(normal @ st.direction)
        if abs(cosine) < GRAZING_LIMIT:
            continue
        positions = np.concatenate(([0.0], st.offsets))
        if callable(surface.boundary):
            bval = float(np.asarray(
                surface.boundary(st.crossing[0], st.crossing[1])))
        else:
            bval = float(surface.boundary)
        values = np.concatenate(([bval], surface.u[st.node_indices]))
        weights = _lagrange_derivative_weights(positions, 0.0)
        directional = float(weights @ values)
        estimates.append((directional / cosine) ** 2)
    return float(np.median(estimates))


def _level_slope(item) -> float:
    if isinstance(item, CapProfile):
        return float(item.rim_slope_sq())
    if isinstance(item, GraphSurface):
        return boundary_slope_estimate(item)
    if isinstance(item, (list, tuple)):
        # Solutions of one boundary height on several grids: the rim
        # estimate converges at second order in the step, so extrapolate
        # in h^2 before the boundary-height extrapolation sees it.
        surfaces = sorted(item, key=lambda s: s.grid.h, reverse=True)
        hs = np.array([s.grid.h for s in surfaces])
        slopes = np.array([boundary_slope_estimate(s) for s in surfaces])
        return _neville_to_zero(hs ** 2, slopes)
    return float(item)


def _neville_to_zero(eps: np.ndarray, values: np.ndarray) -> float:
    """Polynomial extrapolation of values(eps) to eps = 0."""
    table = values.astype(float).copy()
    m = eps.size
    for level in range(1, m):
        for i in range(m - level):
            table[i] = (eps[i] * table[i + 1] - eps[i + level] * table[i]) \
                / (eps[i] - eps[i + level])
    return float(table[0])


def boundary_slope_check(levels: Sequence, k: float,
                         rel_tol: float = SLOPE_REL_TOL) -> CheckReport:
    """Extrapolated rim slope against the equidistant law 1/k^2 - 1.

    `levels` pairs boundary heights with solved surfaces, analytic cap
    profiles, or raw squared-slope values.  The per-level slopes must
    approach the limit monotonically as the boundary height shrinks;
    otherwise the sequence cannot be extrapolated and the report is
    inconclusive rather than a fail.
    """
    if len(levels) < 2:
        raise ValueError("slope extrapolation needs at least 2 levels")
    eps = np.array([float(e) for e, _ in levels])
    slopes = np.array([_level_slope(item) for _, item in levels])
    order = np.argsort(eps)[::-1]
    eps, slopes = eps[order], slopes[order]
    if eps[-1] <= 0 or np.any(np.diff(eps) >= 0):
        raise ValueError("boundary heights must be positive and distinct")

    target = 1.0 / k ** 2 - 1.0
    steps = np.diff(slopes)
    monotone = np.all(steps > 0) or np.all(steps < 0)
    details = {"eps": eps, "slopes": slopes, "target": target}
    if not monotone:
        return CheckReport(name="boundary_slope", status="inconclusive",
                           margin=float("inf"),
                           tolerances={"rel_tol": rel_tol}, details=details)

    extrapolated = _neville_to_zero(eps, slopes)
    error = abs(extrapolated - target)
    details["extrapolated"] = extrapolated
    status = "pass" if error <= rel_tol * target else "fail"
    return CheckReport(name="boundary_slope", status=status,
                       margin=error / target,
                       tolerances={"rel_tol": rel_tol}, details=details)


def superharmonicity_check(surface: GraphSurface,
                           spec: CurvatureFunctionSpec, kappa, phi,
                           slack_coeff: float = SUPERHARMONIC_SLACK,
                           node_fraction: float = SUPERHARMONIC_NODE_FRACTION,
                           jet=None) -> CheckReport:
    """Weighted-Laplacian lower bound for a distance-like ambient field.

    Verifies the field's own hypotheses first: unit metric gradient and
    level sets strictly convex with curvature-function value above the
    prescription at every surface node.  The inequality itself gets a
    discretization slack proportional to the grid step and must hold on
    at least the given fraction of interior nodes.
    """
    if jet is None:
        jet = surface.jet()
    jet.require_admissible()
    pts3 = jet.ambient_points
    grad_norm = gradient_norm(surface.model, phi.gradient(pts3), pts3)
    unit_defect = float(np.max(np.abs(grad_norm - 1.0)))
    kappa_vals = np.asarray(kappa.value(pts3[:, 0], pts3[:, 1], pts3[:, 2]))
    level_lam = levelset_shape_eigenvalues(surface.model, phi, pts3)
    tolerances = {"slack_coeff": slack_coeff, "node_fraction": node_fraction,
                  "unit_gradient_tol": UNIT_GRADIENT_TOL}
    if unit_defect > UNIT_GRADIENT_TOL:
        return CheckReport(name="superharmonicity",
                           status="precondition_failure", margin=unit_defect,
                           tolerances=tolerances,
                           details={"reason": "gradient not unit length"})
    if np.any(level_lam[:, -1] <= 0.0):
        return CheckReport(name="superharmonicity",
                           status="precondition_failure",
                           margin=float(level_lam[:, -1].min()),
                           tolerances=tolerances,
                           details={"reason": "level sets not strictly convex"})
    level_K = np.asarray(symmfunc.evaluate(spec, level_lam))
    level_gap = level_K - kappa_vals
    if np.any(level_gap <= 0.0):
        idx = int(np.argmin(level_gap))
        return CheckReport(name="superharmonicity",
                           status="precondition_failure",
                           margin=float(level_gap[idx]),
                           location=surface.grid.interior_points[idx],
                           tolerances=tolerances,
                           details={"reason":
                                    "level-set curvature below prescription"})

    measurement = delta_K(surface, spec, phi, jet=jet)
    lhs = measurement.values
    rhs = -measurement.hess_opnorm * measurement.tangential_sq
    slack = slack_coeff * surface.grid.h
    slackful = lhs - rhs + slack
    fraction = float(np.mean(slackful >= 0.0))
    idx = int(np.argmin(slackful))
    status = "pass" if fraction >= node_fraction else "fail"
    return CheckReport(name="superharmonicity", status=status,
                       margin=float(slackful[idx]),
                       location=surface.grid.interior_points[idx],
                       tolerances=tolerances,
                       details={"fraction": fraction,
                                "raw_margin": float((lhs - rhs)[idx]),
                                "min_field_value":
                                    float(measurement.surface_values.min())})


def uniqueness_criterion_from_eigenvalues(spec: CurvatureFunctionSpec,
                                          eigenvalues: np.ndarray,
                                          locations=None) -> CheckReport:
    """Strict dominance of the linearization trace over its A^2 pairing.

    Evaluates Tr(B) - Tr(B A^2) per eigenvalue row, with B the
    derivative of the curvature function at the shape operator A.  The
    statement only applies while the curvature-function value stays
    below 1; otherwise the report is out_of_hypothesis.
    """
    lam = np.atleast_2d(np.asarray(eigenvalues, dtype=float))
    if np.any(lam <= 0.0):
        raise ValueError("criterion needs strictly positive curvatures")
    if locations is None:
        locations = np.arange(lam.shape[0])
    locations = np.asarray(locations)
    values = np.asarray(symmfunc.evaluate(spec, lam))
    if np.any(values >= 1.0):
        idx = int(np.argmax(values))
        return CheckReport(name="uniqueness_criterion",
                           status="out_of_hypothesis",
                           margin=float(1.0 - values[idx]),
                           location=locations[idx],
                           details={"max_curvature": float(values[idx])})
    mu = symmfunc.partial_derivatives(spec, lam)
    quantity = np.sum(mu * (1.0 - lam ** 2), axis=1)
    idx = int(np.argmin(quantity))
    status = "pass" if quantity[idx] > 0.0 else "fail"
    return CheckReport(name="uniqueness_criterion", status=status,
                       margin=float(quantity[idx]),
                       location=locations[idx],
                       details={"max_curvature": float(values.max())})


def uniqueness_criterion_check(surface: GraphSurface,
                               spec: CurvatureFunctionSpec,
                               jet=None) -> CheckReport:
    """Nodewise uniqueness criterion on a solved graph surface."""
    if jet is None:
        jet = surface.jet()
    jet.require_admissible()
    return uniqueness_criterion_from_eigenvalues(
        spec, jet.eigenvalues, locations=surface.grid.interior_points)


def ordering_check(surface: GraphSurface, lower: GraphSurface,
                   upper: GraphSurface) -> CheckReport:
    """Pointwise height ordering lower <= surface <= upper on one grid."""
    for other in (lower, upper):
        if other.u.shape != surface.u.shape or not np.array_equal(
                other.grid.interior_points, surface.grid.interior_points):
            raise ValueError("ordering_check needs surfaces on the same grid")
    above = surface.u - lower.u
    below = upper.u - surface.u
    margin_above = float(above.min())
    margin_below = float(below.min())
    margin = min(margin_above, margin_below)
    if margin_above <= margin_below:
        idx = int(np.argmin(above))
    else:
        idx = int(np.argmin(below))
    status = "pass" if margin >= 0.0 else "fail"
    return CheckReport(name="ordering", status=status, margin=margin,
                       location=surface.grid.interior_points[idx],
                       details={"lower_margin": margin_above,
                                "upper_margin": margin_below,
                                "strict": bool(margin > 0.0)})
