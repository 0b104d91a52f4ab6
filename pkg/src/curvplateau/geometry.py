"""Graph hypersurfaces over planar domains and their curvature data.

Surfaces are graphs: height u over a domain in Euclidean three-space, or
graphs over the ideal boundary plane of the upper half-space model.  The
orientation convention fixes the shape operator as the derivative of the
chosen unit normal: upward for Euclidean graphs, downward (toward the
ideal boundary) for half-space graphs, so domes and equidistant caps have
positive principal curvatures.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from . import symmfunc
from .errors import AdmissibilityError, DomainError
from .symmfunc import CurvatureFunctionSpec

# Admissibility requires eigenvalues strictly inside the cone by at least
# this margin relative to the largest eigenvalue magnitude.
ADMISSIBILITY_MARGIN = 0.0
# Nodes of half-space graphs must keep at least this height.
MIN_HEIGHT = 1.0e-12
# Width of the non-negative probe bumps in grid steps.  Single-node delta
# probes are polluted by the cross-derivative stencil near the rim, which
# breaks the discrete maximum principle at one-node resolution; bumps of
# about a step's width restore the continuum-level sign behavior.
BUMP_WIDTH_STEPS = 1.5


@dataclass(frozen=True)
class AmbientModel:
    """Ambient space: Euclidean space or the hyperbolic upper half space."""

    kind: str
    dim: int = 3

    @staticmethod
    def euclidean(dim: int = 3) -> "AmbientModel":
        return AmbientModel("euclidean", dim)

    @staticmethod
    def hyperbolic(dim: int = 3) -> "AmbientModel":
        return AmbientModel("hyperbolic", dim)

    @property
    def hypersurface_dim(self) -> int:
        return self.dim - 1

    def __post_init__(self):
        if self.kind not in ("euclidean", "hyperbolic"):
            raise ValueError(f"unknown ambient model {self.kind!r}")
        if self.dim < 2:
            raise ValueError("ambient dimension must be at least 2")


@dataclass
class GraphSurface:
    """Graph heights over a grid's interior nodes with boundary data."""

    model: AmbientModel
    grid: object
    u: np.ndarray
    boundary: object

    def __post_init__(self):
        self.u = np.asarray(self.u, dtype=float)
        if self.u.shape != (self.grid.interior_count,):
            raise ValueError("height vector does not match the grid")

    def with_u(self, new_u: np.ndarray) -> "GraphSurface":
        return GraphSurface(self.model, self.grid, new_u, self.boundary)

    def jet(self) -> "SurfaceJet":
        return surface_jet(self)


@dataclass
class SurfaceJet:
    """Pointwise first and second order data of a graph surface."""

    model: AmbientModel
    points: np.ndarray
    u: np.ndarray
    du: np.ndarray
    hess: np.ndarray
    W: np.ndarray
    g: np.ndarray
    g_inv_sqrt: np.ndarray
    shape_sym: np.ndarray
    eigenvalues: np.ndarray
    eigenvectors: np.ndarray
    normal: np.ndarray

    @property
    def node_count(self) -> int:
        return self.u.shape[0]

    @property
    def ambient_points(self) -> np.ndarray:
        return np.concatenate([self.points, self.u[:, None]], axis=1)

    @property
    def admissible_mask(self) -> np.ndarray:
        mask = self.eigenvalues[:, -1] > ADMISSIBILITY_MARGIN
        if self.model.kind == "hyperbolic":
            mask = mask & (self.u > MIN_HEIGHT)
        return mask

    @property
    def min_eigenvalue(self) -> float:
        return float(np.min(self.eigenvalues[:, -1]))

    def require_admissible(self):
        mask = self.admissible_mask
        if not np.all(mask):
            idx = int(np.argmin(mask))
            raise AdmissibilityError(
                "surface leaves the admissible cone",
                node_index=idx,
                min_eigenvalue=float(self.eigenvalues[idx, -1]),
                min_height=float(np.min(self.u)))

    def pencil_eigvecs(self) -> np.ndarray:
        """Generalized eigenvectors v with v^T g v = identity, columns."""
        return self.g_inv_sqrt @ self.eigenvectors

    def tangent_frames(self) -> np.ndarray:
        """Ambient principal frames, shape (N, 3, 2), unit in the model.

        Column k is the tangent vector in Euclidean components whose
        in-surface direction diagonalizes the shape operator; half-space
        frames are scaled by the height to unit hyperbolic length.
        """
        v = self.pencil_eigvecs()
        horiz = v
        vert = np.einsum("na,nak->nk", self.du, v)
        frames = np.concatenate([horiz, vert[:, None, :]], axis=1)
        if self.model.kind == "hyperbolic":
            frames = frames * self.u[:, None, None]
        return frames

    def curvature(self, spec: CurvatureFunctionSpec) -> np.ndarray:
        """Curvature function of the principal curvatures at each node."""
        self.require_admissible()
        return np.asarray(symmfunc.evaluate(spec, self.eigenvalues))

    def curvature_partials(self, spec: CurvatureFunctionSpec) -> np.ndarray:
        self.require_admissible()
        return symmfunc.partial_derivatives(spec, self.eigenvalues)


def surface_jet(surface: GraphSurface) -> SurfaceJet:
    """Differential data of the graph at every interior node.

    The shape operator's eigenvalues are computed from the symmetric
    matrix similar to it, so they come out real and sorted; eigenvalues
    are stored in descending order.
    """
    grid = surface.grid
    ops = grid.operators()
    bvals = ops.boundary_values(surface.boundary)
    du, hess = ops.jet(surface.u, bvals)
    pts = grid.interior_points
    n = pts.shape[0]

    s = np.sum(du ** 2, axis=1)
    W = np.sqrt(1.0 + s)
    eye = np.broadcast_to(np.eye(2), (n, 2, 2))
    outer = du[:, :, None] * du[:, None, :]
    g = eye + outer
    # Exact inverse square root of I + d d^T: subtract d d^T / (W (W + 1)).
    g_inv_sqrt = eye - outer / (W * (W + 1.0))[:, None, None]

    if surface.model.kind == "euclidean":
        h_form = -hess / W[:, None, None]
        normal = np.concatenate([-du, np.ones((n, 1))], axis=1) / W[:, None]
    else:
        h_form = (surface.u[:, None, None] * hess + g) / W[:, None, None]
        normal = np.concatenate([du, -np.ones((n, 1))], axis=1) / W[:, None]

    shape_sym = g_inv_sqrt @ h_form @ g_inv_sqrt
    shape_sym = 0.5 * (shape_sym + np.swapaxes(shape_sym, 1, 2))
    lam, q = np.linalg.eigh(shape_sym)
    lam = lam[:, ::-1]
    q = q[:, :, ::-1]

    return SurfaceJet(model=surface.model, points=pts, u=surface.u.copy(),
                      du=du, hess=hess, W=W, g=g, g_inv_sqrt=g_inv_sqrt,
                      shape_sym=shape_sym, eigenvalues=lam, eigenvectors=q,
                      normal=normal)


def radial_curvatures(model: AmbientModel, rho, u, du, d2u):
    """Principal curvatures of a rotational graph from its radial profile.

    Returns (kappa_rad, kappa_ang); the angular curvature has multiplicity
    n - 1.  At the axis both curvatures coincide; callers pass rho > 0 or
    the axis limit du/rho -> d2u.
    """
    rho = np.asarray(rho, dtype=float)
    u = np.asarray(u, dtype=float)
    du = np.asarray(du, dtype=float)
    d2u = np.asarray(d2u, dtype=float)
    W = np.sqrt(1.0 + du ** 2)
    slope_over_rho = np.where(rho > 0.0, du / np.where(rho > 0.0, rho, 1.0), d2u)
    if model.kind == "euclidean":
        kappa_rad = -d2u / W ** 3
        kappa_ang = -slope_over_rho / W
    else:
        kappa_rad = u * d2u / W ** 3 + 1.0 / W
        kappa_ang = u * slope_over_rho / W + 1.0 / W
    return kappa_rad, kappa_ang


def ambient_hessian(model: AmbientModel, phi, points3: np.ndarray):
    """Covariant Hessian form, gradient, and values of an ambient field.

    Returns (value, grad, hess_form) where grad holds Euclidean partials
    and hess_form the covariant Hessian's matrix in Euclidean coordinates.
    In the half-space model the Christoffel correction
    (delta_{i,v} f_j + delta_{j,v} f_i - delta_{ij} f_v) / h is added,
    with v the vertical index and h the height.
    """
    pts = np.asarray(points3, dtype=float)
    val = np.asarray(phi.value(pts))
    grad = np.asarray(phi.gradient(pts))
    hess = np.asarray(phi.hessian(pts))
    if model.kind == "euclidean":
        return val, grad, hess
    h = pts[..., -1]
    dim = pts.shape[-1]
    vert = np.zeros(dim)
    vert[-1] = 1.0
    cross = grad[..., :, None] * vert[None, :] / h[..., None, None]
    corr = cross + np.swapaxes(cross, -1, -2)
    corr = corr - np.eye(dim) * (grad[..., -1] / h)[..., None, None]
    return val, grad, hess + corr


def gradient_norm(model: AmbientModel, grad: np.ndarray,
                  points3: np.ndarray) -> np.ndarray:
    """Metric norm of an ambient gradient given its Euclidean partials."""
    norm = np.linalg.norm(grad, axis=-1)
    if model.kind == "hyperbolic":
        norm = norm * np.asarray(points3)[..., -1]
    return norm


def levelset_shape_eigenvalues(model: AmbientModel, phi,
                               points3: np.ndarray) -> np.ndarray:
    """Principal curvatures of the field's level sets at given points.

    Orientation: normal along the metric gradient (increasing field), so
    distance spheres have positive curvature.  Shape (N, dim - 1),
    descending.
    """
    pts = np.asarray(points3, dtype=float)
    _, grad, hess_form = ambient_hessian(model, phi, pts)
    n_hat = grad / np.linalg.norm(grad, axis=-1, keepdims=True)
    basis = _orthogonal_complement(n_hat)
    m = np.einsum("nia,nij,njb->nab", basis, hess_form, basis)
    if model.kind == "hyperbolic":
        m = m * (pts[..., -1] ** 2)[..., None, None]
    m = m / gradient_norm(model, grad, pts)[..., None, None]
    lam = np.linalg.eigvalsh(0.5 * (m + np.swapaxes(m, -1, -2)))
    return lam[..., ::-1]


def _orthogonal_complement(n_hat: np.ndarray) -> np.ndarray:
    """Euclidean orthonormal basis of the complement, shape (N, dim, dim-1)."""
    n_pts, dim = n_hat.shape
    # Pick the coordinate axis least aligned with each normal as the seed.
    seed_idx = np.argmin(np.abs(n_hat), axis=1)
    seed = np.zeros_like(n_hat)
    seed[np.arange(n_pts), seed_idx] = 1.0
    w1 = seed - n_hat * np.sum(seed * n_hat, axis=1, keepdims=True)
    w1 = w1 / np.linalg.norm(w1, axis=1, keepdims=True)
    if dim == 3:
        w2 = np.cross(n_hat, w1)
        return np.stack([w1, w2], axis=2)
    basis = [w1]
    for _ in range(dim - 2):
        cand = np.random.default_rng(0).normal(size=(n_pts, dim))
        for prev in [n_hat] + basis:
            cand = cand - prev * np.sum(cand * prev, axis=1, keepdims=True)
        cand = cand / np.linalg.norm(cand, axis=1, keepdims=True)
        basis.append(cand)
    return np.stack(basis, axis=2)


@dataclass
class DeltaKMeasurement:
    """Weighted surface Laplacian of an ambient field along a surface."""

    values: np.ndarray
    tangential_sq: np.ndarray
    mu: np.ndarray
    hess_opnorm: np.ndarray
    normal_component: np.ndarray
    gradient_norm: np.ndarray
    surface_values: np.ndarray


def delta_K(surface: GraphSurface, spec: CurvatureFunctionSpec,
            phi, jet: Optional[SurfaceJet] = None) -> DeltaKMeasurement:
    """Trace of the curvature-weighted surface Hessian of an ambient field.

    The weights are the curvature function's partial derivatives at the
    principal curvatures; the surface Hessian of the restriction is the
    ambient covariant Hessian on tangent frames minus the normal
    derivative times the shape operator.
    """
    if jet is None:
        jet = surface.jet()
    jet.require_admissible()
    mu = symmfunc.partial_derivatives(spec, jet.eigenvalues)
    pts3 = jet.ambient_points
    val, grad, hess_form = ambient_hessian(surface.model, phi, pts3)

    frames = jet.tangent_frames()
    diag_hess = np.einsum("nik,nij,njk->nk", frames, hess_form, frames)
    if surface.model.kind == "euclidean":
        normal_comp = np.sum(grad * jet.normal, axis=1)
    else:
        normal_comp = jet.u * np.sum(grad * jet.normal, axis=1)
    surf_hess_diag = diag_hess - normal_comp[:, None] * jet.eigenvalues

    dphi_frames = np.einsum("ni,nik->nk", grad, frames)
    tangential_sq = np.sum(mu * dphi_frames ** 2, axis=1)
    values = np.sum(mu * surf_hess_diag, axis=1)

    endo = hess_form
    if surface.model.kind == "hyperbolic":
        endo = endo * (jet.u ** 2)[:, None, None]
    opnorm = np.max(np.abs(np.linalg.eigvalsh(
        0.5 * (endo + np.swapaxes(endo, 1, 2)))), axis=1)

    return DeltaKMeasurement(values=values, tangential_sq=tangential_sq,
                             mu=mu, hess_opnorm=opnorm,
                             normal_component=normal_comp,
                             gradient_norm=gradient_norm(
                                 surface.model, grad, pts3),
                             surface_values=val)


@dataclass
class StabilityReport:
    """Linearized operator in normal-speed form with spectral summary."""

    matrix: object
    scale: np.ndarray
    non_degenerate: bool
    smallest_real_part: float
    inverse_positive: Optional[bool]
    probe_min: float


def stability_operator(surface: GraphSurface, spec: CurvatureFunctionSpec,
                       kappa, pos_tol: float = 1.0e-8,
                       dense_limit: int = 2500) -> StabilityReport:
    """Linearization of the curvature defect in normal-speed variables.

    A normal perturbation with speed f moves the graph height by W f for
    Euclidean graphs and by -u W f for half-space graphs (downward
    normal), so the operator is the height Jacobian times that diagonal
    scaling.  Degeneracy, the smallest real part of the spectrum, and
    inverse positivity are reported.  Positivity is probed by solving
    L g = f for a basis of non-negative Gaussian bump fields f, one bump
    per node (subsampled above dense_limit); the report passes when
    every response stays above -pos_tol.
    """
    from . import solver as _solver
    import scipy.sparse as sp
    import scipy.sparse.linalg as spla

    jet = surface.jet()
    jet.require_admissible()
    jac = _solver.jacobian(spec, surface, kappa, jet=jet)
    if surface.model.kind == "euclidean":
        scale = jet.W
    else:
        scale = -surface.u * jet.W
    matrix = (jac @ sp.diags(scale)).tocsc()
    n = matrix.shape[0]

    non_degenerate = True
    inverse_positive: Optional[bool] = None
    probe_min = np.nan
    try:
        lu = spla.splu(matrix)
    except RuntimeError:
        non_degenerate = False
        lu = None
    if lu is not None:
        pts = surface.grid.interior_points
        if n <= dense_limit:
            centers = np.arange(n)
        else:
            rng = np.random.default_rng(0)
            centers = rng.choice(n, size=min(128, n), replace=False)
        width = BUMP_WIDTH_STEPS * surface.grid.h
        sq = np.sum((pts[:, None, :] - pts[None, centers, :]) ** 2, axis=2)
        probes = np.exp(-sq / (2.0 * width ** 2))
        responses = lu.solve(probes)
        probe_min = float(responses.min())
        inverse_positive = bool(probe_min >= -pos_tol)

    if n <= dense_limit:
        eigs = np.linalg.eigvals(matrix.toarray())
        smallest = float(np.min(eigs.real))
    else:
        try:
            eigs = spla.eigs(matrix, k=6, sigma=0.0,
                             return_eigenvectors=False)
            smallest = float(np.min(eigs.real))
        except Exception:
            smallest = np.nan
    return StabilityReport(matrix=matrix, scale=scale,
                           non_degenerate=non_degenerate,
                           smallest_real_part=smallest,
                           inverse_positive=inverse_positive,
                           probe_min=probe_min)
