"""Rotationally symmetric graphs: closed-form caps and a shooting solver.

Constant-curvature rotational graphs over a disk have sphere-cap closed
forms in both ambient models; they serve as references for the grid
solver and as initial data.  For general curvature functions the radial
reduction is a second-order profile ODE integrated from a series start
at the axis, with the apex height found by shooting on the boundary
condition.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from scipy.integrate import solve_ivp
from scipy.optimize import brentq

from . import symmfunc
from .errors import DomainError
from .geometry import AmbientModel, GraphSurface, radial_curvatures

# Fraction of the disk radius at which the axis series hands over to the
# integrator.
SERIES_START_FRAC = 1.0e-6
ODE_RTOL = 1.0e-12
ODE_ATOL = 1.0e-14
SHOOT_TOL = 1.0e-13
SHOOT_SCAN_POINTS = 48
ROOT_BRACKET_GROWTH = 4.0
ROOT_MAX_EXPANSIONS = 200
# Profiles steeper than this have left the graph regime; integration is
# abandoned instead of chasing the vertical tangent.
SLOPE_LIMIT = 1.0e6


@dataclass(frozen=True)
class CapProfile:
    """Spherical-cap graph of constant curvature over a disk.

    Euclidean caps are pieces of a sphere of radius 1/kappa raised to
    meet the boundary height; half-space caps are pieces of Euclidean
    spheres centered below the ideal plane (equidistant spheres of
    curvature kappa in (0, 1))."""

    model: AmbientModel
    disk_radius: float
    kappa: float
    boundary_height: float
    sphere_radius: float
    center_offset: float

    def heights(self, rho):
        rho = np.asarray(rho, dtype=float)
        return np.sqrt(self.sphere_radius ** 2 - rho ** 2) - self.center_offset

    def slope(self, rho):
        rho = np.asarray(rho, dtype=float)
        return -rho / np.sqrt(self.sphere_radius ** 2 - rho ** 2)

    def second(self, rho):
        rho = np.asarray(rho, dtype=float)
        m2 = self.sphere_radius ** 2 - rho ** 2
        return -self.sphere_radius ** 2 / m2 ** 1.5

    def rim_slope_sq(self) -> float:
        return float(self.slope(self.disk_radius) ** 2)

    def surface(self, grid) -> GraphSurface:
        pts = grid.interior_points
        u = self.heights(np.linalg.norm(pts, axis=1))
        return GraphSurface(self.model, grid, u,
                            lambda x, y: self.heights(np.hypot(x, y)))


def euclidean_cap(disk_radius: float, kappa: float,
                  boundary_height: float = 0.0) -> CapProfile:
    """Upward sphere cap with all principal curvatures equal to kappa."""
    if kappa <= 0.0:
        raise DomainError("Euclidean caps need positive curvature",
                          min_eigenvalue=kappa)
    r0 = 1.0 / kappa
    if disk_radius >= r0:
        raise DomainError(
            f"no cap of curvature {kappa} spans a disk of radius "
            f"{disk_radius}; the sphere radius is {r0}")
    offset = math.sqrt(r0 ** 2 - disk_radius ** 2) - boundary_height
    return CapProfile(AmbientModel.euclidean(), disk_radius, kappa,
                      boundary_height, r0, offset)


def equidistant_cap(disk_radius: float, kappa: float,
                    boundary_height: float) -> CapProfile:
    """Half-space cap of constant curvature kappa in (0, 1).

    The graph is the upper part of the Euclidean sphere of radius R
    centered at depth k R below the ideal plane, which is the equidistant
    sphere of curvature k; R is fixed by the boundary height at the rim.
    """
    if not 0.0 < kappa < 1.0:
        raise DomainError(
            f"equidistant caps exist for curvature in (0, 1), got {kappa}")
    if boundary_height <= 0.0:
        raise DomainError("boundary height must be positive in the half space")
    a, k, eps = disk_radius, kappa, boundary_height
    R = (k * eps + math.sqrt(k ** 2 * eps ** 2
                             + (1.0 - k ** 2) * (a ** 2 + eps ** 2))) \
        / (1.0 - k ** 2)
    return CapProfile(AmbientModel.hyperbolic(), a, k, eps, R, k * R)


@dataclass
class RadialScanRow:
    apex_height: float
    valid: bool
    boundary_defect: float


@dataclass
class RadialSolution:
    """Shooting result for the rotational profile problem."""

    status: str
    model: AmbientModel
    n: int
    disk_radius: float
    boundary_height: float
    apex_height: float
    scan: list = field(default_factory=list)
    message: str = ""
    _dense: object = None
    _series_coeff: float = 0.0
    _series_end: float = 0.0

    @property
    def ok(self) -> bool:
        return self.status == "solved"

    def profile(self, rho):
        """Heights and radial slopes at given radii."""
        arr = np.atleast_1d(np.asarray(rho, dtype=float))
        u = np.empty_like(arr)
        du = np.empty_like(arr)
        inner = arr <= self._series_end
        u[inner] = self.apex_height + 0.5 * self._series_coeff * arr[inner] ** 2
        du[inner] = self._series_coeff * arr[inner]
        if np.any(~inner):
            vals = self._dense(arr[~inner])
            u[~inner] = vals[0]
            du[~inner] = vals[1]
        if np.isscalar(rho) or np.ndim(rho) == 0:
            return float(u[0]), float(du[0])
        return u, du

    def surface(self, grid) -> GraphSurface:
        pts = grid.interior_points
        u, _ = self.profile(np.linalg.norm(pts, axis=1))

        def boundary(x, y):
            return self.profile(np.hypot(x, y))[0]

        return GraphSurface(self.model, grid, u, boundary)


def _solve_kappa_rad(spec, kappa_ang: float, target: float) -> float:
    """Radial curvature making the curvature function hit the target.

    The curvature function is strictly increasing in each eigenvalue, so
    the root is unique.  Built-in families invert in closed form; the
    quotient families have a finite supremum in the radial eigenvalue, and
    unreachable targets raise.  Custom callables bracket and bisect.
    """
    n = spec.n
    m = kappa_ang
    if spec.kind in ("gauss", "quotient") and m <= 0.0:
        raise ValueError("angular curvature left the admissible cone")
    if spec.kind == "gauss":
        return target ** n / m ** (n - 1)
    if spec.kind == "quotient":
        k = spec.k
        ell = n - k
        c1 = math.comb(n - 1, k - 1)
        c2 = math.comb(n - 1, k)
        cl = symmfunc.quotient_normalization(n, k) ** ell
        tl = target ** ell
        denom = cl * m ** (n - 1) - tl * c1 * m ** (k - 1)
        if denom <= 0.0:
            raise ValueError("target curvature exceeds the radial supremum")
        x = tl * c2 * m ** k / denom
        if x <= 0.0:
            raise ValueError("radial curvature left the admissible cone")
        return x

    def fn(kr):
        lam = np.full(n, m)
        lam[0] = kr
        return float(symmfunc.evaluate(spec, lam, allow_boundary=True)) - target

    lo = 1.0e-14 * max(m, 1.0)
    if fn(lo) >= 0.0:
        return lo
    hi = max(m, target, 1.0)
    for _ in range(ROOT_MAX_EXPANSIONS):
        if fn(hi) > 0.0:
            break
        hi *= ROOT_BRACKET_GROWTH
    else:
        raise DomainError("radial curvature root bracket expansion failed")
    return float(brentq(fn, lo, hi, xtol=1e-15, rtol=8.9e-16))


def radial_solve(spec, model: AmbientModel, kappa, disk_radius: float,
                 boundary_height: float,
                 apex_range: Optional[tuple] = None,
                 scan_points: int = SHOOT_SCAN_POINTS) -> RadialSolution:
    """Shooting solve of the rotational prescribed-curvature problem.

    kappa is a prescription field evaluated at (rho, 0, height).  The
    profile starts on the axis with the isotropic series determined by
    the normalization f(c 1) = c and integrates outward; the apex height
    is scanned for a sign change of the rim defect and refined by
    bisection-secant iteration.
    """
    n = spec.n
    a = disk_radius
    eps = boundary_height
    hyperbolic = model.kind == "hyperbolic"
    if hyperbolic and eps <= 0.0:
        raise DomainError("boundary height must be positive in the half space")

    def axis_coeff(u0: float) -> float:
        k_axis = float(kappa.value(0.0, 0.0, u0))
        if hyperbolic:
            return (k_axis - 1.0) / u0
        return -k_axis

    def rhs(rho, y):
        u, p = y
        if abs(p) > SLOPE_LIMIT:
            raise ValueError("profile left the graph regime")
        w = math.sqrt(1.0 + p * p)
        if hyperbolic:
            if u <= 0.0:
                raise ValueError("height crossed zero")
            k_ang = u * p / (rho * w) + 1.0 / w
        else:
            k_ang = -p / (rho * w)
        target = float(kappa.value(rho, 0.0, u))
        k_rad = _solve_kappa_rad(spec, k_ang, target)
        if hyperbolic:
            upp = (k_rad - 1.0 / w) * w ** 3 / u
        else:
            upp = -k_rad * w ** 3
        return [p, upp]

    rho0 = SERIES_START_FRAC * a

    events = []
    if hyperbolic:
        # Terminating when the height falls back to the boundary value
        # turns an undershooting profile into a negative rim defect
        # (minus the radius left to cover) instead of a dead integration.
        def boundary_crossing(rho, y):
            return y[0] - eps

        boundary_crossing.terminal = True
        boundary_crossing.direction = -1.0
        events.append(boundary_crossing)

    def integrate(u0: float, rtol: float):
        c2 = axis_coeff(u0)
        y0 = [u0 + 0.5 * c2 * rho0 ** 2, c2 * rho0]
        try:
            sol = solve_ivp(rhs, (rho0, a), y0, method="DOP853",
                            rtol=rtol, atol=ODE_ATOL, dense_output=True,
                            events=events or None)
        except (ValueError, DomainError):
            return None
        if not sol.success:
            return None
        return sol

    def defect(u0: float, rtol: float = ODE_RTOL):
        sol = integrate(u0, rtol)
        if sol is None:
            return None, None
        if sol.status == 1 and sol.t_events and sol.t_events[0].size:
            return float(sol.t_events[0][0] - a), sol
        return float(sol.y[0, -1] - eps), sol

    if apex_range is None:
        apex_range = (eps * (1.0 + 1e-9) if eps > 0 else 1e-6 * a,
                      eps + 4.0 * a)
    grid_u0 = np.linspace(apex_range[0], apex_range[1], scan_points)
    scan = []
    bracket = None
    prev = None
    scan_rtol = 1.0e-9
    for u0 in grid_u0:
        d, _ = defect(float(u0), scan_rtol)
        scan.append(RadialScanRow(float(u0), d is not None,
                                  float("nan") if d is None else d))
        if d is not None and prev is not None and prev[1] * d <= 0.0:
            bracket = (prev[0], float(u0))
            break
        if d is not None:
            prev = (float(u0), d)
    if bracket is None:
        return RadialSolution(
            status="no_solution", model=model, n=n, disk_radius=a,
            boundary_height=eps, apex_height=float("nan"), scan=scan,
            message="no sign change of the rim defect over the apex scan")

    def defect_for_root(t):
        d, _ = defect(t)
        return math.nan if d is None else d

    try:
        root = brentq(defect_for_root, bracket[0], bracket[1],
                      xtol=SHOOT_TOL, rtol=8.9e-16)
    except ValueError as exc:
        return RadialSolution(
            status="bracket_lost", model=model, n=n, disk_radius=a,
            boundary_height=eps, apex_height=float("nan"), scan=scan,
            message=str(exc))
    final = integrate(float(root), ODE_RTOL)
    sol = RadialSolution(status="solved", model=model, n=n, disk_radius=a,
                         boundary_height=eps, apex_height=float(root),
                         scan=scan)
    sol._dense = final.sol
    sol._series_coeff = axis_coeff(float(root))
    sol._series_end = rho0
    return sol


def radial_eigenvalues(solution_or_cap, model: AmbientModel, n: int, rho):
    """Principal curvature sets (kappa_rad, kappa_ang x (n-1)) on radii."""
    rho = np.asarray(rho, dtype=float)
    if isinstance(solution_or_cap, CapProfile):
        u = solution_or_cap.heights(rho)
        du = solution_or_cap.slope(rho)
        d2u = solution_or_cap.second(rho)
    else:
        u, du = solution_or_cap.profile(rho)
        d2u = _fd_second(solution_or_cap, rho)
    k_rad, k_ang = radial_curvatures(model, rho, u, du, d2u)
    lam = np.empty(rho.shape + (n,))
    lam[..., 0] = k_rad
    lam[..., 1:] = k_ang[..., None]
    return lam


def _fd_second(solution, rho, step_rel: float = 1.0e-6):
    rho = np.asarray(rho, dtype=float)
    h = step_rel * max(1.0, float(np.max(rho)))
    _, dup = solution.profile(rho + h)
    _, dum = solution.profile(np.maximum(rho - h, 0.0))
    return (dup - dum) / (rho + h - np.maximum(rho - h, 0.0))
