"""Curvature functions on the positive cone: evaluation, limits, axiom checks.

A curvature function is a symmetric, degree-one homogeneous, normalized,
elliptic, concave function of principal-curvature vectors, positive inside
the positive cone and vanishing toward its boundary.  The built-in families
are the normalized determinant (Gauss) and the normalized root quotients of
elementary symmetric polynomials; arbitrary user callables are accepted and
checked rather than trusted.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .errors import DomainError, InconsistencyError

# Default sampling and finite-difference parameters for the axiom checker.
SAMPLE_EXPONENT_RANGE = (-3.0, 3.0)
GRADIENT_STEP_REL = 1.0e-5
HESSIAN_STEP_REL = 1.0e-4
# Steps shrink near small coordinates so probe points stay inside the cone.
STEP_COORD_FRACTION = 0.02

SYMMETRY_TOL = 1.0e-12
HOMOGENEITY_TOL = 1.0e-10
NORMALIZATION_TOL = 1.0e-12
DECAY_RATIO_TOL = 0.05
DECAY_CLAMP_REL = 1.0e-12
ELLIPTICITY_MIN = 1.0e-8
CONCAVITY_TOL = 1.0e-6

# Limit detection along t -> infinity uses a geometric schedule 4**j.
LIMIT_SCHEDULE_BASE = 4.0
LIMIT_SCHEDULE_STEPS = 30
LIMIT_REL_TOL = 1.0e-9
DIVERGENCE_FACTOR = 1.0e8
# Residual growth per step that still counts as divergence when the hard
# threshold is never crossed (slow power-law growth such as t**(1/n)).
GROWTH_RATIO_MIN = 1.0e-3
MONOTONE_SLACK = 1.0e-11
DECAY_FIT_WINDOW = (1.0e6, 4.0e6)
DECAY_FIT_MIN = 1.0e-8


def sigma(k: int, x: np.ndarray) -> np.ndarray:
    """Elementary symmetric polynomial of order ``k``.

    Parameters
    ----------
    k : int
        Order, ``0 <= k <= n``.
    x : ndarray, shape (..., n)
        Coordinate vectors; arbitrary leading batch dimensions.

    Returns
    -------
    ndarray, shape (...)
        ``sigma_k`` evaluated along the last axis.

    Notes
    -----
    Uses the one-pass recurrence over characteristic-polynomial
    coefficients, O(n*k) per vector.  No combinatorial enumeration.
    """
    x = np.asarray(x, dtype=float)
    n = x.shape[-1]
    if not 0 <= k <= n:
        raise ValueError(f"sigma order {k} out of range for n={n}")
    return sigma_table(x, k)[..., k]


def sigma_table(x: np.ndarray, kmax: int) -> np.ndarray:
    """All ``sigma_0 .. sigma_kmax`` along the last axis, shape (..., kmax+1)."""
    x = np.asarray(x, dtype=float)
    n = x.shape[-1]
    out = np.zeros(x.shape[:-1] + (kmax + 1,), dtype=float)
    out[..., 0] = 1.0
    for i in range(n):
        xi = x[..., i]
        for j in range(min(i + 1, kmax), 0, -1):
            out[..., j] += xi * out[..., j - 1]
    return out


def quotient_normalization(n: int, k: int) -> float:
    """Constant making the (n, k) quotient equal 1 at the all-ones vector."""
    return math.comb(n, k) ** (1.0 / (n - k))


@dataclass(frozen=True)
class EigenvalueVector:
    """Ordered tuple of principal curvatures (a point of the cone or not)."""

    values: np.ndarray

    def __init__(self, values: Sequence[float] | np.ndarray):
        arr = np.atleast_1d(np.asarray(values, dtype=float))
        if arr.ndim != 1:
            raise ValueError("eigenvalue vector must be one-dimensional")
        object.__setattr__(self, "values", arr)

    @property
    def n(self) -> int:
        return self.values.shape[0]

    @property
    def in_positive_cone(self) -> bool:
        return bool(np.all(self.values > 0.0))


@dataclass(frozen=True)
class LimitValue:
    """Limit of f(x, t) as t grows without bound: finite value or infinite."""

    is_finite: bool
    value: float | None = None

    @classmethod
    def finite(cls, value: float) -> "LimitValue":
        return cls(True, float(value))

    @classmethod
    def infinite(cls) -> "LimitValue":
        return cls(False, None)


@dataclass(frozen=True)
class CurvatureFunctionSpec:
    """Declarative description of a curvature function.

    ``kind`` is one of ``"gauss"``, ``"quotient"``, ``"custom"``.  Gauss is
    the n-th root of the determinant; quotient (n, k) is the normalized
    (n-k)-th root of sigma_n / sigma_k with 1 <= k < n.  Custom wraps a
    callable mapping a length-n vector to a float.
    """

    kind: str
    n: int
    k: int | None = None
    fn: Callable[[np.ndarray], float] | None = None
    vectorized: bool = False
    label: str = ""

    @classmethod
    def gauss(cls, n: int) -> "CurvatureFunctionSpec":
        if n < 1:
            raise ValueError("gauss requires n >= 1")
        return cls(kind="gauss", n=n, label=f"gauss(n={n})")

    @classmethod
    def quotient(cls, n: int, k: int) -> "CurvatureFunctionSpec":
        if not 1 <= k < n:
            raise ValueError(f"quotient requires 1 <= k < n, got (n, k)=({n}, {k})")
        return cls(kind="quotient", n=n, k=k, label=f"quotient(n={n}, k={k})")

    @classmethod
    def custom(cls, n: int, fn: Callable[[np.ndarray], float], *,
               vectorized: bool = False, label: str = "custom") -> "CurvatureFunctionSpec":
        if n < 1:
            raise ValueError("custom requires n >= 1")
        return cls(kind="custom", n=n, fn=fn, vectorized=vectorized, label=label)

    def describe(self) -> str:
        return self.label or self.kind


def _as_batch(x: np.ndarray | EigenvalueVector, n: int) -> np.ndarray:
    if isinstance(x, EigenvalueVector):
        x = x.values
    arr = np.asarray(x, dtype=float)
    if arr.shape[-1] != n:
        raise ValueError(f"expected vectors of length {n}, got shape {arr.shape}")
    return arr


def _eval_sorted(spec: CurvatureFunctionSpec, xs: np.ndarray) -> np.ndarray:
    """Evaluate on already-validated, ascending-sorted positive input."""
    if spec.kind == "gauss":
        return np.exp(np.mean(np.log(xs), axis=-1))
    if spec.kind == "quotient":
        n, k = spec.n, spec.k
        ell = n - k
        c = quotient_normalization(n, k)
        sig_k = sigma_table(xs, k)[..., k]
        log_sig_n = np.sum(np.log(xs), axis=-1)
        return c * np.exp((log_sig_n - np.log(sig_k)) / ell)
    if spec.vectorized:
        return np.asarray(spec.fn(xs), dtype=float)
    flat = xs.reshape(-1, spec.n)
    vals = np.array([float(spec.fn(row)) for row in flat])
    return vals.reshape(xs.shape[:-1])


def evaluate(spec: CurvatureFunctionSpec, x: np.ndarray | EigenvalueVector,
             *, allow_boundary: bool = False) -> np.ndarray | float:
    """Evaluate the curvature function at one or many eigenvalue vectors.

    Parameters
    ----------
    spec : CurvatureFunctionSpec
    x : array-like, shape (..., n)
        Eigenvalue vectors.  All components must be strictly positive unless
        ``allow_boundary`` is set, in which case zero components are allowed
        and the built-in families return their continuous extension (zero).
    allow_boundary : bool
        Permit evaluation on the closed cone boundary.

    Raises
    ------
    DomainError
        If the input leaves the (closed) positive cone.
    """
    arr = _as_batch(x, spec.n)
    if allow_boundary:
        if np.any(arr < 0.0):
            raise DomainError("eigenvalue vector has a negative component")
    else:
        if np.any(arr <= 0.0):
            bad = float(np.min(arr))
            raise DomainError(
                "eigenvalue vector outside the open positive cone",
                min_eigenvalue=bad)
    # Sorting makes built-in evaluation exactly permutation invariant.
    # Custom callables must see the caller's coordinate order: symmetry is
    # their obligation and the axiom checker probes it.
    xs = np.sort(arr, axis=-1) if spec.kind in ("gauss", "quotient") else arr
    if allow_boundary and spec.kind in ("gauss", "quotient"):
        out = np.zeros(xs.shape[:-1], dtype=float)
        inside = xs[..., 0] > 0.0
        if np.any(inside):
            out[inside] = _eval_sorted(spec, xs[inside])
        return out if out.ndim else float(out)
    out = _eval_sorted(spec, xs)
    return out if np.ndim(out) else float(out)


def _reduced_sigma(xs: np.ndarray, order: int) -> np.ndarray:
    """sigma_order of each vector with one coordinate removed.

    Returns shape (..., n); entry i is sigma_order(x with coordinate i
    dropped).  Recomputed per coordinate to keep every term positive.
    """
    n = xs.shape[-1]
    out = np.empty(xs.shape[:-1] + (n,), dtype=float)
    idx = np.arange(n)
    for i in range(n):
        reduced = xs[..., idx != i]
        out[..., i] = sigma_table(reduced, order)[..., order]
    return out


def partial_derivatives(spec: CurvatureFunctionSpec,
                        x: np.ndarray | EigenvalueVector) -> np.ndarray:
    """Gradient of the curvature function, shape (..., n).

    Built-in families use closed forms; custom callables fall back to
    central differences with cone-respecting steps.
    """
    arr = _as_batch(x, spec.n)
    if np.any(arr <= 0.0):
        raise DomainError("gradient requested outside the open positive cone",
                          min_eigenvalue=float(np.min(arr)))
    if spec.kind == "gauss":
        f = evaluate(spec, arr)
        return np.asarray(f)[..., None] / (spec.n * arr)
    if spec.kind == "quotient":
        n, k = spec.n, spec.k
        ell = n - k
        f = np.asarray(evaluate(spec, arr))
        sig_n = np.prod(arr, axis=-1)
        sig_k = sigma_table(arr, k)[..., k]
        dsig_n = sig_n[..., None] / arr
        dsig_k = _reduced_sigma(arr, k - 1)
        return (f[..., None] / ell) * (dsig_n / sig_n[..., None]
                                       - dsig_k / sig_k[..., None])
    return _fd_gradient(spec, arr)


def _fd_steps(arr: np.ndarray, rel: float) -> np.ndarray:
    norm = np.linalg.norm(arr, axis=-1, keepdims=True)
    return np.minimum(rel * norm, STEP_COORD_FRACTION * arr)


def _fd_gradient(spec: CurvatureFunctionSpec, arr: np.ndarray) -> np.ndarray:
    h = _fd_steps(arr, GRADIENT_STEP_REL)
    n = spec.n
    grad = np.empty_like(arr)
    for i in range(n):
        e = np.zeros(n)
        e[i] = 1.0
        up = evaluate(spec, arr + h[..., i:i + 1] * e)
        dn = evaluate(spec, arr - h[..., i:i + 1] * e)
        grad[..., i] = (np.asarray(up) - np.asarray(dn)) / (2.0 * h[..., i])
    return grad


def _fd_hessian(spec: CurvatureFunctionSpec, arr: np.ndarray) -> np.ndarray:
    """Central-difference Hessians, shape (..., n, n)."""
    n = spec.n
    h = _fd_steps(arr, HESSIAN_STEP_REL)
    f0 = np.asarray(evaluate(spec, arr))
    H = np.empty(arr.shape[:-1] + (n, n), dtype=float)
    eye = np.eye(n)
    for i in range(n):
        hi = h[..., i:i + 1]
        up = np.asarray(evaluate(spec, arr + hi * eye[i]))
        dn = np.asarray(evaluate(spec, arr - hi * eye[i]))
        H[..., i, i] = (up - 2.0 * f0 + dn) / (h[..., i] ** 2)
        for j in range(i + 1, n):
            hj = h[..., j:j + 1]
            pp = np.asarray(evaluate(spec, arr + hi * eye[i] + hj * eye[j]))
            pm = np.asarray(evaluate(spec, arr + hi * eye[i] - hj * eye[j]))
            mp = np.asarray(evaluate(spec, arr - hi * eye[i] + hj * eye[j]))
            mm = np.asarray(evaluate(spec, arr - hi * eye[i] - hj * eye[j]))
            val = (pp - pm - mp + mm) / (4.0 * h[..., i] * h[..., j])
            H[..., i, j] = val
            H[..., j, i] = val
    return H


def _limit_values(spec: CurvatureFunctionSpec, base: np.ndarray) -> np.ndarray:
    """f(base, t_j) for the whole schedule; shape (..., steps+1)."""
    steps = LIMIT_SCHEDULE_STEPS
    vals = np.empty(base.shape[:-1] + (steps + 1,), dtype=float)
    for j in range(steps + 1):
        t = LIMIT_SCHEDULE_BASE ** j
        ext = np.concatenate([base, np.full(base.shape[:-1] + (1,), t)], axis=-1)
        vals[..., j] = np.asarray(evaluate(spec, ext))
    return vals


def limit_at_infinity(spec: CurvatureFunctionSpec,
                      x: np.ndarray | EigenvalueVector) -> LimitValue:
    """Classify and (when finite) evaluate lim f(x, t) as t -> infinity.

    ``x`` is a single vector of length n-1 inside the positive cone.  The
    sampled sequence must be nondecreasing up to roundoff slack; a decrease
    raises InconsistencyError since it contradicts strict ellipticity.
    """
    base = _as_batch(x, spec.n - 1)
    if base.ndim != 1:
        raise ValueError("limit_at_infinity takes a single base vector")
    if np.any(base <= 0.0):
        raise DomainError("base vector outside the open positive cone",
                          min_eigenvalue=float(np.min(base)))
    vals = _limit_values(spec, base)
    finite, value = _classify_limit(vals, context=spec.describe())
    return LimitValue.finite(value) if finite else LimitValue.infinite()


def _classify_limit(vals: np.ndarray, context: str = "") -> tuple[bool, float]:
    drops = np.diff(vals) < -MONOTONE_SLACK * np.abs(vals[..., :-1])
    if np.any(drops):
        raise InconsistencyError(
            f"sampled limit sequence decreases ({context}); "
            "contradicts monotonicity in the last slot")
    rel_inc = np.diff(vals) / vals[..., 1:]
    if np.any(vals[..., -1] > DIVERGENCE_FACTOR * vals[..., 0]):
        return False, math.inf
    if np.all(rel_inc[..., -1] < LIMIT_REL_TOL):
        return True, float(np.max(vals[..., -1])) if vals.ndim == 1 else math.nan
    if np.all(rel_inc[..., -1] > GROWTH_RATIO_MIN):
        # Persistent geometric growth: divergent even below the hard cap.
        return False, math.inf
    raise InconsistencyError(
        f"limit classification ambiguous ({context}): neither settled nor "
        "persistently growing at the end of the schedule")


def quotient_limit_closed_form(spec: CurvatureFunctionSpec,
                               x: np.ndarray | EigenvalueVector) -> float | np.ndarray:
    """Closed-form limit for quotient specs on (n-1)-vectors."""
    if spec.kind != "quotient":
        raise ValueError("closed-form limit only exists for quotient specs")
    base = _as_batch(x, spec.n - 1)
    n, k = spec.n, spec.k
    ell = n - k
    c = quotient_normalization(n, k)
    top = sigma_table(base, n - 1)[..., n - 1]
    bot = sigma_table(base, k - 1)[..., k - 1]
    out = c * (top / bot) ** (1.0 / ell)
    return out if np.ndim(out) else float(out)


@dataclass
class AxiomResult:
    """Outcome of one axiom test: worst margin against its tolerance."""

    name: str
    passed: bool
    margin: float
    tolerance: float
    detail: str = ""


@dataclass
class AxiomReport:
    """Aggregate of all axiom tests for one spec.

    ``limit_classification`` is ``"finite"`` or ``"infinite"``;
    ``decay_constant`` is the fitted reciprocal-decay coefficient when the
    limit is finite, else None.
    """

    spec_label: str
    n: int
    sample_count: int
    rng_seed: int
    results: list[AxiomResult] = field(default_factory=list)
    limit_classification: str = ""
    decay_constant: float | None = None

    @property
    def passed(self) -> bool:
        return all(r.passed for r in self.results)

    def result(self, name: str) -> AxiomResult:
        for r in self.results:
            if r.name == name:
                return r
        raise KeyError(name)


def _sample_cone(rng: np.random.Generator, count: int, n: int) -> np.ndarray:
    lo, hi = SAMPLE_EXPONENT_RANGE
    return 10.0 ** rng.uniform(lo, hi, size=(count, n))


def check_axioms(spec: CurvatureFunctionSpec, n: int, *,
                 sample_count: int = 1000, tol: float | None = None,
                 rng_seed: int = 0) -> AxiomReport:
    """Test the seven structural axioms on random cone samples.

    Parameters
    ----------
    spec : CurvatureFunctionSpec
    n : int
        Must equal ``spec.n``; passed explicitly so call sites state the
        dimension they believe they are testing.
    sample_count : int
        Log-uniform samples drawn from the cone.
    tol : float, optional
        Override for the generic margin tolerance (symmetry, normalization).
        Pinned tolerances (homogeneity, concavity) are module constants.
    rng_seed : int
        Seed for the sample stream; the report is deterministic given it.

    Returns
    -------
    AxiomReport
        Per-axiom pass/fail with worst margins, aggregated independent of
        sample order, plus the finite/infinite classification of the limit
        in the last slot.
    """
    if n != spec.n:
        raise ValueError(f"spec has n={spec.n} but n={n} was requested")
    generic_tol = SYMMETRY_TOL if tol is None else tol
    rng = np.random.default_rng(rng_seed)
    X = _sample_cone(rng, sample_count, n)
    fX = np.asarray(evaluate(spec, X))
    report = AxiomReport(spec_label=spec.describe(), n=n,
                         sample_count=sample_count, rng_seed=rng_seed)

    # (i) permutation symmetry
    perms = np.argsort(rng.random((sample_count, n)), axis=1)
    Xp = np.take_along_axis(X, perms, axis=1)
    sym_margin = float(np.max(np.abs(np.asarray(evaluate(spec, Xp)) - fX) / fX))
    report.results.append(AxiomResult(
        "symmetry", sym_margin <= generic_tol, sym_margin, generic_tol))

    # (ii) homogeneity of order one
    t = 10.0 ** rng.uniform(-2.0, 2.0, size=sample_count)
    ft = np.asarray(evaluate(spec, t[:, None] * X))
    hom_margin = float(np.max(np.abs(ft - t * fX) / np.abs(t * fX)))
    report.results.append(AxiomResult(
        "homogeneity", hom_margin <= HOMOGENEITY_TOL, hom_margin, HOMOGENEITY_TOL))

    # (iii) normalization at the all-ones vector
    norm_margin = abs(float(evaluate(spec, np.ones(n))) - 1.0)
    report.results.append(AxiomResult(
        "normalization", norm_margin <= NORMALIZATION_TOL, norm_margin,
        NORMALIZATION_TOL))

    # (iv) positivity inside the cone, decay toward its boundary
    pos_min = float(np.min(fX))
    decay_count = min(200, sample_count)
    Xd = X[:decay_count].copy()
    cols = rng.integers(0, n, size=decay_count)
    rows = np.arange(decay_count)
    Xd[rows, cols] = DECAY_CLAMP_REL * Xd[rows, cols]
    ratios = np.asarray(evaluate(spec, Xd)) / fX[:decay_count]
    decay_margin = float(np.max(ratios))
    pos_ok = pos_min > 0.0 and decay_margin <= DECAY_RATIO_TOL
    report.results.append(AxiomResult(
        "positivity_decay", pos_ok, decay_margin, DECAY_RATIO_TOL,
        detail=f"min sample value {pos_min:.3e}"))

    # (v) strict ellipticity: every first partial positive
    grad = (partial_derivatives(spec, X) if spec.kind != "custom"
            else _fd_gradient(spec, X))
    ell_margin = float(np.min(grad * X / fX[:, None]))
    report.results.append(AxiomResult(
        "ellipticity", ell_margin > ELLIPTICITY_MIN, ell_margin, ELLIPTICITY_MIN))

    # (vi) concavity via finite-difference Hessians
    hess_count = min(200, sample_count)
    H = _fd_hessian(spec, X[:hess_count])
    eigs = np.linalg.eigvalsh(H)
    scales = np.maximum(np.abs(H).max(axis=(-2, -1)) * n, 1e-300)
    conc_margin = float(np.max(eigs[..., -1] / scales))
    report.results.append(AxiomResult(
        "concavity", conc_margin <= CONCAVITY_TOL, conc_margin, CONCAVITY_TOL))

    # (vii) / (vii') behaviour of the limit in the last slot
    _check_limit_axiom(spec, n, rng, report)
    return report


def _check_limit_axiom(spec: CurvatureFunctionSpec, n: int,
                       rng: np.random.Generator, report: AxiomReport) -> None:
    base_count = 64
    bases = _sample_cone(rng, base_count, n - 1)
    vals = _limit_values(spec, bases)

    drops = np.diff(vals, axis=-1) < -MONOTONE_SLACK * np.abs(vals[..., :-1])
    if np.any(drops):
        raise InconsistencyError(
            f"limit sequence decreases for {spec.describe()}")
    rel_inc = np.diff(vals, axis=-1) / vals[..., 1:]
    crossed = vals[..., -1] > DIVERGENCE_FACTOR * vals[..., 0]
    settled = rel_inc[..., -1] < LIMIT_REL_TOL
    growing = rel_inc[..., -1] > GROWTH_RATIO_MIN
    finite_mask = settled & ~crossed
    infinite_mask = crossed | (growing & ~settled)
    if np.all(finite_mask):
        report.limit_classification = "finite"
        _check_finite_limit(spec, n, bases, vals[..., -1], report)
    elif np.all(infinite_mask):
        report.limit_classification = "infinite"
        growth = float(np.min(rel_inc[..., -1]))
        report.results.append(AxiomResult(
            "limit_infinite", True, growth, GROWTH_RATIO_MIN,
            detail="limit grows without bound at every sampled base"))
    else:
        raise InconsistencyError(
            f"mixed finite/infinite limit classification for {spec.describe()}; "
            "the limit must be everywhere finite or everywhere infinite")


def _check_finite_limit(spec: CurvatureFunctionSpec, n: int, bases: np.ndarray,
                        limits: np.ndarray, report: AxiomReport) -> None:
    # (vii')(a) the limit function itself is strictly elliptic
    t_proxy = LIMIT_SCHEDULE_BASE ** LIMIT_SCHEDULE_STEPS

    def proxy(v: np.ndarray) -> np.ndarray:
        ext = np.concatenate(
            [v, np.full(v.shape[:-1] + (1,), t_proxy)], axis=-1)
        return np.asarray(evaluate(spec, ext))

    h = _fd_steps(bases, GRADIENT_STEP_REL)
    margins = np.empty(bases.shape)
    for i in range(n - 1):
        e = np.zeros(n - 1)
        e[i] = 1.0
        up = proxy(bases + h[..., i:i + 1] * e)
        dn = proxy(bases - h[..., i:i + 1] * e)
        margins[..., i] = (up - dn) / (2.0 * h[..., i]) * bases[..., i] / limits
    ell_margin = float(np.min(margins))
    report.results.append(AxiomResult(
        "limit_ellipticity", ell_margin > ELLIPTICITY_MIN, ell_margin,
        ELLIPTICITY_MIN))

    # (vii')(b) reciprocal decay toward the limit on a compact window
    t_lo, t_hi = DECAY_FIT_WINDOW
    ts = np.geomspace(t_lo, t_hi, 5)
    resid = np.empty(bases.shape[:-1] + (ts.size,))
    for j, tj in enumerate(ts):
        ext = np.concatenate(
            [bases, np.full(bases.shape[:-1] + (1,), tj)], axis=-1)
        resid[..., j] = limits - np.asarray(evaluate(spec, ext))
    weighted = resid * ts
    fit_c = float(np.mean(np.sum(resid / ts, axis=-1)
                          / np.sum(1.0 / ts ** 2)))
    margin = float(np.min(weighted / limits[..., None]))
    report.results.append(AxiomResult(
        "limit_reciprocal_decay", margin > DECAY_FIT_MIN, margin, DECAY_FIT_MIN,
        detail=f"fitted decay constant {fit_c:.6g}"))
    report.decay_constant = fit_c
