"""Curvature functions applied to symmetric matrices via their spectra.

The derivative of ``A -> f(eigenvalues(A))`` at a positive-definite matrix
is represented by a unique symmetric matrix ``B`` with directional
derivatives ``Tr(B M)``.  ``B`` shares eigenvectors with ``A``, is positive
definite for strictly elliptic ``f``, and pairs antitonically with the
spectrum of ``A``: larger eigenvalues of ``A`` receive smaller derivative
weights.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .errors import DomainError, InconsistencyError
from .symmfunc import CurvatureFunctionSpec, evaluate, partial_derivatives

RECONSTRUCTION_TOL = 1.0e-12
COMMUTATION_TOL = 1.0e-8
GAP_TOL_REL = 1.0e-8
SECOND_DIFF_REL = 1.0e-4
CUSTOM_SYMMETRY_TOL = 1.0e-6

MU_TAIL_MIN_RATIO = 1.0e4
MU_GROWTH_FACTOR = 1.1
MU_DIVERGENCE_THRESHOLD = 1.0e3


@dataclass
class SpectralMatrix:
    """Symmetric matrix with a cached, descending eigendecomposition."""

    matrix: np.ndarray
    eigenvalues: np.ndarray = field(init=False)
    eigenvectors: np.ndarray = field(init=False)

    def __init__(self, matrix: np.ndarray):
        m = np.asarray(matrix, dtype=float)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise ValueError(f"expected a square matrix, got shape {m.shape}")
        self.matrix = 0.5 * (m + m.T)
        lam, q = np.linalg.eigh(self.matrix)
        self.eigenvalues = lam[::-1].copy()
        self.eigenvectors = q[:, ::-1].copy()
        recon = (self.eigenvectors * self.eigenvalues) @ self.eigenvectors.T
        scale = max(float(np.linalg.norm(self.matrix)), 1e-300)
        if float(np.linalg.norm(recon - self.matrix)) > RECONSTRUCTION_TOL * scale:
            raise InconsistencyError("eigendecomposition failed to reconstruct input")

    @property
    def n(self) -> int:
        return self.matrix.shape[0]

    @property
    def positive_definite(self) -> bool:
        return bool(self.eigenvalues[-1] > 0.0)


@dataclass
class DerivativeMatrix:
    """Derivative of a curvature function at a matrix.

    ``matrix`` is the symmetric representer B; ``mu`` holds the per-direction
    weights ordered against the descending eigenvalues of the base point, so
    ``mu`` is nondecreasing by antitone pairing.
    """

    matrix: np.ndarray
    mu: np.ndarray
    base_eigenvalues: np.ndarray
    base_eigenvectors: np.ndarray

    @property
    def trace(self) -> float:
        return float(np.sum(self.mu))


def _as_spectral(A: np.ndarray | SpectralMatrix) -> SpectralMatrix:
    return A if isinstance(A, SpectralMatrix) else SpectralMatrix(A)


def _require_positive(sm: SpectralMatrix, what: str) -> None:
    if not sm.positive_definite:
        raise DomainError(
            f"{what} requires a positive-definite matrix",
            min_eigenvalue=float(sm.eigenvalues[-1]))


def K_of_matrix(spec: CurvatureFunctionSpec,
                A: np.ndarray | SpectralMatrix) -> float:
    """Curvature value of a positive-definite symmetric matrix."""
    sm = _as_spectral(A)
    _require_positive(sm, "K_of_matrix")
    return float(evaluate(spec, sm.eigenvalues))


def dK_matrix(spec: CurvatureFunctionSpec, A: np.ndarray | SpectralMatrix,
              *, gap_tol: float | None = None) -> DerivativeMatrix:
    """Derivative representer B at a positive-definite matrix.

    Built-in specs use closed-form eigenvalue partials; custom specs use
    central differences and must return permutation-consistent partials at
    (nearly) repeated eigenvalues, otherwise the derivative matrix is not
    well defined and an InconsistencyError is raised.
    """
    sm = _as_spectral(A)
    _require_positive(sm, "dK_matrix")
    lam = sm.eigenvalues
    mu = partial_derivatives(spec, lam)
    if spec.kind == "custom":
        scale = float(np.max(np.abs(lam)))
        tol = (GAP_TOL_REL * scale) if gap_tol is None else gap_tol
        for i in range(sm.n):
            for j in range(i + 1, sm.n):
                if abs(lam[i] - lam[j]) <= tol:
                    denom = abs(mu[i]) + abs(mu[j]) + 1e-300
                    if abs(mu[i] - mu[j]) > CUSTOM_SYMMETRY_TOL * denom:
                        raise InconsistencyError(
                            "custom spec returns asymmetric partials at a "
                            f"repeated eigenvalue (indices {i}, {j})")
    B = (sm.eigenvectors * mu) @ sm.eigenvectors.T
    return DerivativeMatrix(matrix=B, mu=np.asarray(mu),
                            base_eigenvalues=lam,
                            base_eigenvectors=sm.eigenvectors)


def directional_first(spec: CurvatureFunctionSpec,
                      A: np.ndarray | SpectralMatrix,
                      M: np.ndarray) -> float:
    """First directional derivative Tr(B M)."""
    d = dK_matrix(spec, A)
    M = np.asarray(M, dtype=float)
    return float(np.sum(d.matrix * 0.5 * (M + M.T)))


def directional_second(spec: CurvatureFunctionSpec,
                       A: np.ndarray | SpectralMatrix,
                       M: np.ndarray) -> float:
    """Second directional derivative along M by central differences.

    The step shrinks until both probe points stay positive definite; strict
    concavity of the spec makes the result nonpositive up to the difference
    scheme's own error.
    """
    sm = _as_spectral(A)
    _require_positive(sm, "directional_second")
    M = np.asarray(M, dtype=float)
    M = 0.5 * (M + M.T)
    norm_m = float(np.linalg.norm(M))
    if norm_m == 0.0:
        return 0.0
    h = SECOND_DIFF_REL * float(np.linalg.norm(sm.matrix)) / norm_m
    f0 = K_of_matrix(spec, sm)
    for _ in range(60):
        up = SpectralMatrix(sm.matrix + h * M)
        dn = SpectralMatrix(sm.matrix - h * M)
        if up.positive_definite and dn.positive_definite:
            return (K_of_matrix(spec, up) - 2.0 * f0 + K_of_matrix(spec, dn)) / h ** 2
        h *= 0.5
    raise DomainError("could not keep probe points positive definite")


def pairwise_concavity_bound(d: DerivativeMatrix, M: np.ndarray,
                             *, gap_tol: float | None = None) -> float:
    """Lower bound on -D2F(M, M) from antitone eigenvalue pairing.

    Sums (mu_j - mu_i) / (lambda_i - lambda_j) over off-diagonal entries of
    M expressed in the base eigenframe, skipping pairs whose eigenvalue gap
    falls below ``gap_tol`` (their contribution has a removable singularity).
    """
    lam = d.base_eigenvalues
    scale = float(np.max(np.abs(lam)))
    tol = (GAP_TOL_REL * scale) if gap_tol is None else gap_tol
    M = np.asarray(M, dtype=float)
    Mt = d.base_eigenvectors.T @ (0.5 * (M + M.T)) @ d.base_eigenvectors
    total = 0.0
    n = lam.shape[0]
    for i in range(n):
        for j in range(n):
            if i == j:
                continue
            gap = lam[i] - lam[j]
            if abs(gap) <= tol:
                continue
            total += (d.mu[j] - d.mu[i]) / gap * Mt[i, j] ** 2
    return total


@dataclass
class MuInfinityEstimate:
    """Estimated infimum of Tr(B) along divergent normalized directions."""

    estimate: float
    divergent: bool
    tail_growth: float
    schedule: np.ndarray
    isotropic_curve: np.ndarray


def mu_infinity_estimate(spec: CurvatureFunctionSpec, n: int, *,
                         anisotropy_schedule: Sequence[float] | None = None,
                         base_count: int = 8,
                         rng_seed: int = 0) -> MuInfinityEstimate:
    """Estimate the liminf of Tr(B) as the base point degenerates.

    One eigenvalue is pushed through a geometric anisotropy schedule while
    the rest stay at a fixed base; every probe is normalized to curvature
    one (Tr(B) is scale invariant, so this is bookkeeping only).  The
    isotropic base realizes the infimum for the built-in families, and the
    random bases act as upper-bound probes; the returned estimate is the
    minimum of Tr(B) over the schedule tail across all bases.

    Divergence is classified by persistent growth across the tail or by the
    estimate exceeding a hard threshold.
    """
    if n != spec.n:
        raise ValueError(f"spec has n={spec.n} but n={n} was requested")
    if n < 2:
        raise ValueError("mu-infinity needs n >= 2")
    if anisotropy_schedule is None:
        schedule = np.geomspace(1.0, 1.0e6, 25)
    else:
        schedule = np.asarray(list(anisotropy_schedule), dtype=float)
        if np.any(np.diff(schedule) <= 0.0) or schedule[0] < 1.0:
            raise ValueError("anisotropy schedule must increase from >= 1")
    rng = np.random.default_rng(rng_seed)
    bases = np.vstack([np.ones((1, n - 1)),
                       10.0 ** rng.uniform(-1.0, 1.0, size=(base_count - 1, n - 1))])
    tail_mask = schedule >= min(MU_TAIL_MIN_RATIO, schedule[-1])

    curves = np.empty((bases.shape[0], schedule.size))
    for b, base in enumerate(bases):
        pts = np.empty((schedule.size, n))
        pts[:, :n - 1] = base
        pts[:, n - 1] = schedule * np.exp(np.mean(np.log(base)))
        vals = np.asarray(evaluate(spec, pts))
        pts = pts / vals[:, None]
        curves[b] = np.sum(partial_derivatives(spec, pts), axis=-1)

    tail = curves[:, tail_mask]
    estimate = float(np.min(tail))
    growth = float(np.min(tail[:, -1] / np.maximum(tail[:, 0], 1e-300)))
    divergent = bool(growth > MU_GROWTH_FACTOR
                     or estimate > MU_DIVERGENCE_THRESHOLD)
    return MuInfinityEstimate(estimate=estimate, divergent=divergent,
                              tail_growth=growth, schedule=schedule,
                              isotropic_curve=curves[0])
