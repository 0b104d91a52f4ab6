"""Discrete prescribed-curvature solves on graph surfaces.

The residual at each interior node is the curvature function of the
principal curvatures minus the prescribed value at that node.  The
Jacobian is assembled analytically from first-order perturbation of the
generalized eigenproblem h v = lambda g v: for any jet parameter theta,
d lambda_k = v_k^T (dh/dtheta - lambda_k dg/dtheta) v_k with v_k the
g-orthonormal eigenvectors, so the chain rule needs no eigenvector
derivatives.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from . import symmfunc
from .errors import AdmissibilityError
from .fields import BlendField
from .geometry import GraphSurface, SurfaceJet

FD_JACOBIAN_STEP = 1.0e-7
MIN_CONTINUATION_STEP = 1.0 / 256.0


def residual(spec, surface: GraphSurface, kappa,
             jet: Optional[SurfaceJet] = None):
    """Curvature defect at the interior nodes; raises off the cone.

    Returns (residual, jet)."""
    if jet is None:
        jet = surface.jet()
    jet.require_admissible()
    values = np.asarray(symmfunc.evaluate(spec, jet.eigenvalues))
    pts = jet.points
    kv = np.asarray(kappa.value(pts[:, 0], pts[:, 1], jet.u))
    return values - kv, jet


def jacobian(spec, surface: GraphSurface, kappa,
             jet: Optional[SurfaceJet] = None,
             method: str = "analytic") -> sp.csr_matrix:
    """Derivative of the residual with respect to interior heights."""
    if method == "fd":
        return _fd_jacobian(spec, surface, kappa)
    if method != "analytic":
        raise ValueError(f"unknown jacobian method {method!r}")
    if jet is None:
        jet = surface.jet()
    jet.require_admissible()

    n = jet.node_count
    mu = symmfunc.partial_derivatives(spec, jet.eigenvalues)
    v = jet.pencil_eigvecs()
    lam = jet.eigenvalues
    du, hess, W, g, u = jet.du, jet.hess, jet.W, jet.g, jet.u
    Wc = W[:, None, None]
    hyperbolic = surface.model.kind == "hyperbolic"

    if hyperbolic:
        h_form = (u[:, None, None] * hess + g) / Wc
    else:
        h_form = -hess / Wc

    e_basis = {
        "dxx": np.array([[1.0, 0.0], [0.0, 0.0]]),
        "dxy": np.array([[0.0, 1.0], [1.0, 0.0]]),
        "dyy": np.array([[0.0, 0.0], [0.0, 1.0]]),
    }

    dh = {}
    dg = {}
    for name, e_ab in e_basis.items():
        scale = (u / W if hyperbolic else -1.0 / W)
        dh[name] = scale[:, None, None] * e_ab
        dg[name] = np.zeros((n, 2, 2))
    for a, name in enumerate(("dx", "dy")):
        e_a = np.zeros(2)
        e_a[a] = 1.0
        dg_a = e_a[:, None] * du[:, None, :] + du[:, :, None] * e_a[None, :]
        dh_a = -h_form * (du[:, a] / W ** 2)[:, None, None]
        if hyperbolic:
            dh_a = dh_a + dg_a / Wc
        dh[name] = dh_a
        dg[name] = dg_a

    ops = surface.grid.operators()
    coeffs = {}
    for name in ("dx", "dy", "dxx", "dxy", "dyy"):
        t = np.einsum("nij,nik,njk->nk", dh[name], v, v) \
            - lam * np.einsum("nij,nik,njk->nk", dg[name], v, v)
        coeffs[name] = np.sum(mu * t, axis=1)
    jac = None
    for name, c in coeffs.items():
        term = sp.diags(c) @ ops.matrices[name]
        jac = term if jac is None else jac + term
    if hyperbolic:
        t = np.einsum("nij,nik,njk->nk", hess / Wc, v, v)
        jac = jac + sp.diags(np.sum(mu * t, axis=1))
    pts = jet.points
    jac = jac - sp.diags(np.asarray(
        kappa.d_height(pts[:, 0], pts[:, 1], jet.u), dtype=float))
    return jac.tocsr()


def _fd_jacobian(spec, surface: GraphSurface, kappa) -> sp.csr_matrix:
    base, _ = residual(spec, surface, kappa)
    n = base.shape[0]
    cols = []
    for j in range(n):
        step = FD_JACOBIAN_STEP * max(1.0, abs(surface.u[j]))
        up = surface.u.copy()
        up[j] += step
        down = surface.u.copy()
        down[j] -= step
        r_up, _ = residual(spec, surface.with_u(up), kappa)
        r_down, _ = residual(spec, surface.with_u(down), kappa)
        cols.append((r_up - r_down) / (2.0 * step))
    return sp.csr_matrix(np.stack(cols, axis=1))


@dataclass
class NewtonStep:
    iteration: int
    residual_inf: float
    step_size: float
    min_eigenvalue: float
    min_height: float


@dataclass
class NewtonConfig:
    tol: float = 1.0e-10
    max_iter: int = 30
    armijo: float = 1.0e-4
    backtrack_factor: float = 0.5
    max_backtracks: int = 40
    jacobian_method: str = "analytic"


@dataclass
class SolveResult:
    status: str
    surface: GraphSurface
    iterations: int
    residual_norm: float
    history: list = field(default_factory=list)
    message: str = ""

    @property
    def ok(self) -> bool:
        return self.status == "converged"


def newton_solve(spec, surface: GraphSurface, kappa,
                 config: Optional[NewtonConfig] = None) -> SolveResult:
    """Damped Newton iteration with an admissibility-guarded line search.

    The initial surface must be admissible.  Steps are halved until the
    candidate stays admissible and satisfies a sufficient-decrease test;
    failure modes are reported in the result status rather than raised.
    """
    cfg = config or NewtonConfig()
    current = surface
    r, jet = residual(spec, current, kappa)
    history = []
    for it in range(cfg.max_iter):
        r_inf = float(np.max(np.abs(r)))
        history.append(NewtonStep(it, r_inf, 0.0 if it == 0 else history[-1].step_size,
                                  jet.min_eigenvalue, float(np.min(jet.u))))
        if r_inf <= cfg.tol:
            return SolveResult("converged", current, it, r_inf, history)
        jac = jacobian(spec, current, kappa, jet=jet,
                       method=cfg.jacobian_method)
        try:
            lu = spla.splu(jac.tocsc())
        except RuntimeError as exc:
            return SolveResult("singular_jacobian", current, it, r_inf,
                               history, message=str(exc))
        delta = -lu.solve(r)
        if not np.all(np.isfinite(delta)):
            return SolveResult("singular_jacobian", current, it, r_inf,
                               history, message="non-finite Newton step")
        norm0 = float(np.linalg.norm(r))
        step = 1.0
        accepted = False
        admissibility_blocked = True
        for _ in range(cfg.max_backtracks):
            cand = current.with_u(current.u + step * delta)
            cand_jet = cand.jet()
            if np.all(cand_jet.admissible_mask):
                admissibility_blocked = False
                r_cand, _ = residual(spec, cand, kappa, jet=cand_jet)
                if np.linalg.norm(r_cand) <= (1.0 - cfg.armijo * step) * norm0:
                    current, r, jet = cand, r_cand, cand_jet
                    history[-1].step_size = step
                    accepted = True
                    break
            step *= cfg.backtrack_factor
        if not accepted:
            status = ("lost_admissibility" if admissibility_blocked
                      else "line_search_failed")
            return SolveResult(status, current, it, r_inf, history)
    r_inf = float(np.max(np.abs(r)))
    status = "converged" if r_inf <= cfg.tol else "max_iterations"
    return SolveResult(status, current, cfg.max_iter, r_inf, history)


@dataclass
class ContinuationStep:
    t: float
    iterations: int
    residual_norm: float
    min_eigenvalue: float
    min_height: float
    max_height: float
    surface: GraphSurface


@dataclass
class ContinuationResult:
    status: str
    final: SolveResult
    steps: list

    @property
    def ok(self) -> bool:
        return self.status == "completed"


def continuation_solve(spec, surface: GraphSurface, kappa0, kappa1,
                       steps: int = 8,
                       config: Optional[NewtonConfig] = None) -> ContinuationResult:
    """Path following from kappa0 to kappa1 with adaptive step halving.

    The start surface is first corrected to solve the kappa0 problem;
    each accepted parameter step warm-starts the next Newton solve.
    """
    cfg = config or NewtonConfig()
    rows = []
    result = newton_solve(spec, surface, kappa0, cfg)
    if not result.ok:
        return ContinuationResult("failed_at_start", result, rows)
    rows.append(_continuation_row(0.0, result))
    t = 0.0
    dt = 1.0 / steps
    current = result.surface
    while t < 1.0:
        t_try = min(t + dt, 1.0)
        blend = BlendField(kappa0, kappa1, t_try)
        attempt = newton_solve(spec, current, blend, cfg)
        if attempt.ok:
            t = t_try
            current = attempt.surface
            result = attempt
            rows.append(_continuation_row(t, attempt))
            continue
        dt *= 0.5
        if dt < MIN_CONTINUATION_STEP:
            return ContinuationResult(f"stalled_at_t={t:.6g}", attempt, rows)
    return ContinuationResult("completed", result, rows)


def _continuation_row(t: float, result: SolveResult) -> ContinuationStep:
    jet = result.surface.jet()
    return ContinuationStep(t=t, iterations=result.iterations,
                            residual_norm=result.residual_norm,
                            min_eigenvalue=jet.min_eigenvalue,
                            min_height=float(np.min(result.surface.u)),
                            max_height=float(np.max(result.surface.u)),
                            surface=result.surface)
