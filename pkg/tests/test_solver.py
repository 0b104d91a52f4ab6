"""Residual, Jacobian, Newton, and continuation tests with cap oracles."""

import numpy as np
import pytest

from curvplateau.errors import AdmissibilityError
from curvplateau.fields import AffineField, ConstantField
from curvplateau.geometry import (AmbientModel, GraphSurface,
                                  stability_operator)
from curvplateau.grids import DiskGrid, RectangleGrid
from curvplateau.radial import equidistant_cap, euclidean_cap
from curvplateau.solver import (ContinuationResult, NewtonConfig, continuation_solve,
                                jacobian, newton_solve, residual)
from curvplateau.symmfunc import CurvatureFunctionSpec

GAUSS2 = CurvatureFunctionSpec.gauss(2)
QUOT21 = CurvatureFunctionSpec.quotient(2, 1)
JACOBIAN_REL_TOL = 1e-6


def euclid_paraboloid_seed(grid, kappa, eps=0.0):
    pts = grid.interior_points
    rho2 = np.sum(pts ** 2, axis=1)
    u = eps + 0.5 * kappa * (grid.radius ** 2 - rho2)
    return GraphSurface(AmbientModel.euclidean(), grid, u, eps)


def hyperbolic_cap_seed(grid, k_seed, eps):
    cap = equidistant_cap(grid.radius, k_seed, eps)
    u = cap.heights(np.linalg.norm(grid.interior_points, axis=1))
    return GraphSurface(AmbientModel.hyperbolic(), grid, u, eps)


class TestResidual:
    def test_horosphere_zero_residual(self):
        grid = DiskGrid(1.0, 21)
        surface = GraphSurface(AmbientModel.hyperbolic(), grid,
                               np.full(grid.interior_count, 0.6), 0.6)
        r, _ = residual(GAUSS2, surface, ConstantField(1.0))
        assert np.max(np.abs(r)) < 1e-12

    def test_cap_residual_is_discretization_small(self):
        cap = euclidean_cap(1.0, 0.5, 0.0)
        grid = DiskGrid(1.0, 41)
        r, _ = residual(GAUSS2, cap.surface(grid), ConstantField(0.5))
        assert np.max(np.abs(r)) < 5e-3

    def test_inadmissible_surface_raises(self):
        grid = DiskGrid(1.0, 15)
        pts = grid.interior_points
        saddle = 0.5 + 0.4 * (pts[:, 0] ** 2 - pts[:, 1] ** 2)
        surface = GraphSurface(AmbientModel.euclidean(), grid, saddle,
                               lambda x, y: 0.5 + 0.4 * (x ** 2 - y ** 2))
        with pytest.raises(AdmissibilityError) as info:
            residual(GAUSS2, surface, ConstantField(0.5))
        assert info.value.node_index is not None


class TestJacobian:
    def _check(self, spec, surface, kappa):
        analytic = jacobian(spec, surface, kappa).toarray()
        fd = jacobian(spec, surface, kappa, method="fd").toarray()
        scale = np.max(np.abs(analytic))
        assert np.max(np.abs(analytic - fd)) / scale < JACOBIAN_REL_TOL

    def test_euclidean_gauss_disk(self):
        grid = DiskGrid(1.0, 11)
        self._check(GAUSS2, euclid_paraboloid_seed(grid, 0.5), ConstantField(0.5))

    def test_hyperbolic_gauss_disk(self):
        grid = DiskGrid(1.0, 11)
        self._check(GAUSS2, hyperbolic_cap_seed(grid, 0.5, 0.05),
                    ConstantField(0.4))

    def test_hyperbolic_quotient_disk(self):
        grid = DiskGrid(1.0, 11)
        self._check(QUOT21, hyperbolic_cap_seed(grid, 0.6, 0.05),
                    ConstantField(0.5))

    def test_euclidean_rectangle_patch(self):
        # Dome patch over an off-center rectangle keeps the graph
        # admissible while exercising the boundary-ring operators.
        cap = euclidean_cap(2.0, 0.25, 0.0)
        grid = RectangleGrid(-0.4, 0.5, -0.3, 0.45, 9, 8)
        pts = grid.interior_points
        u = cap.heights(np.linalg.norm(pts, axis=1))
        surface = GraphSurface(
            AmbientModel.euclidean(), grid, u,
            lambda x, y: cap.heights(np.hypot(x, y)))
        self._check(GAUSS2, surface, ConstantField(0.25))

    def test_height_dependent_prescription(self):
        grid = DiskGrid(1.0, 11)
        kappa = AffineField(0.5, cx=0.05, cy=-0.02, ch=0.1)
        self._check(GAUSS2, hyperbolic_cap_seed(grid, 0.5, 0.05), kappa)

    def test_unknown_method_rejected(self):
        grid = DiskGrid(1.0, 11)
        with pytest.raises(ValueError):
            jacobian(GAUSS2, euclid_paraboloid_seed(grid, 0.5),
                     ConstantField(0.5), method="nope")


class TestNewton:
    def test_euclidean_gauss_matches_cap(self):
        grid = DiskGrid(1.0, 41)
        result = newton_solve(GAUSS2, euclid_paraboloid_seed(grid, 0.5),
                              ConstantField(0.5))
        assert result.ok
        assert result.residual_norm < 1e-10
        cap = euclidean_cap(1.0, 0.5, 0.0)
        exact = cap.heights(np.linalg.norm(grid.interior_points, axis=1))
        assert np.max(np.abs(result.surface.u - exact)) < 1e-4

    def test_hyperbolic_gauss_matches_cap(self):
        grid = DiskGrid(1.0, 41)
        result = newton_solve(GAUSS2, hyperbolic_cap_seed(grid, 0.6, 0.02),
                              ConstantField(0.5))
        assert result.ok
        cap = equidistant_cap(1.0, 0.5, 0.02)
        exact = cap.heights(np.linalg.norm(grid.interior_points, axis=1))
        assert np.max(np.abs(result.surface.u - exact)) < 1.5e-3

    def test_converges_in_few_iterations_from_near_solution(self):
        grid = DiskGrid(1.0, 21)
        result = newton_solve(GAUSS2, hyperbolic_cap_seed(grid, 0.5, 0.02),
                              ConstantField(0.5))
        assert result.ok
        assert result.iterations <= 3

    def test_deterministic_reruns(self):
        grid_a = DiskGrid(1.0, 21)
        grid_b = DiskGrid(1.0, 21)
        res_a = newton_solve(GAUSS2, euclid_paraboloid_seed(grid_a, 0.5),
                             ConstantField(0.5))
        res_b = newton_solve(GAUSS2, euclid_paraboloid_seed(grid_b, 0.5),
                             ConstantField(0.5))
        assert np.array_equal(res_a.surface.u, res_b.surface.u)

    def test_inadmissible_start_raises(self):
        grid = DiskGrid(1.0, 15)
        pts = grid.interior_points
        saddle = 0.5 + 0.4 * (pts[:, 0] ** 2 - pts[:, 1] ** 2)
        surface = GraphSurface(AmbientModel.euclidean(), grid, saddle,
                               lambda x, y: 0.5 + 0.4 * (x ** 2 - y ** 2))
        with pytest.raises(AdmissibilityError):
            newton_solve(GAUSS2, surface, ConstantField(0.5))

    def test_history_rows_recorded(self):
        grid = DiskGrid(1.0, 21)
        result = newton_solve(GAUSS2, euclid_paraboloid_seed(grid, 0.5),
                              ConstantField(0.5))
        assert len(result.history) == result.iterations + 1
        drops = [row.residual_inf for row in result.history]
        assert drops[-1] < drops[0]


class TestContinuation:
    def test_path_from_low_to_high_curvature(self):
        grid = DiskGrid(1.0, 21)
        start = hyperbolic_cap_seed(grid, 0.3, 0.02)
        result = continuation_solve(GAUSS2, start, ConstantField(0.3),
                                    ConstantField(0.7), steps=4)
        assert result.ok
        assert result.final.ok
        # Heights decrease pointwise as the curvature grows.
        for prev, cur in zip(result.steps, result.steps[1:]):
            assert np.all(cur.surface.u <= prev.surface.u + 1e-12)
        cap = equidistant_cap(1.0, 0.7, 0.02)
        exact = cap.heights(np.linalg.norm(grid.interior_points, axis=1))
        assert np.max(np.abs(result.final.surface.u - exact)) < 5e-3

    def test_report_rows_cover_path(self):
        grid = DiskGrid(1.0, 15)
        start = hyperbolic_cap_seed(grid, 0.4, 0.05)
        result = continuation_solve(GAUSS2, start, ConstantField(0.4),
                                    ConstantField(0.6), steps=4)
        assert result.ok
        ts = [row.t for row in result.steps]
        assert ts[0] == 0.0
        assert ts[-1] == 1.0
        assert all(b > a for a, b in zip(ts, ts[1:]))
        assert all(row.min_eigenvalue > 0 for row in result.steps)


class TestStabilityOperator:
    def test_equidistant_solution_is_stable(self):
        grid = DiskGrid(1.0, 21)
        result = newton_solve(GAUSS2, hyperbolic_cap_seed(grid, 0.3, 0.02),
                              ConstantField(0.3))
        assert result.ok
        report = stability_operator(result.surface, GAUSS2, ConstantField(0.3))
        assert report.non_degenerate
        assert report.smallest_real_part > -1e-8
        assert report.inverse_positive
        assert report.probe_min > -1e-8

    def test_linearization_consistency_with_normal_speed(self):
        # Directional residual difference along a normal speed field must
        # match the stability operator's action.
        grid = DiskGrid(1.0, 15)
        result = newton_solve(GAUSS2, hyperbolic_cap_seed(grid, 0.4, 0.05),
                              ConstantField(0.4))
        surface = result.surface
        kappa = ConstantField(0.4)
        report = stability_operator(surface, GAUSS2, kappa)
        pts = surface.grid.interior_points
        speed = np.cos(1.1 * pts[:, 0]) * np.sin(0.7 * pts[:, 1] + 0.3)
        step = 1e-6
        r_up, _ = residual(GAUSS2, surface.with_u(
            surface.u + step * report.scale * speed), kappa)
        r_dn, _ = residual(GAUSS2, surface.with_u(
            surface.u - step * report.scale * speed), kappa)
        fd = (r_up - r_dn) / (2 * step)
        applied = report.matrix @ speed
        scale = np.max(np.abs(applied))
        assert np.max(np.abs(applied - fd)) / scale < 1e-6
