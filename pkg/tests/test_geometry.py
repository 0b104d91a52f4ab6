"""Surface jet and ambient-field tests against closed-form references."""

import numpy as np
import pytest

from curvplateau import symmfunc
from curvplateau.errors import AdmissibilityError
from curvplateau.fields import (EuclideanDistanceField, HyperbolicDistanceField,
                                LinearAmbientField)
from curvplateau.geometry import (AmbientModel, GraphSurface, ambient_hessian,
                                  delta_K, gradient_norm,
                                  levelset_shape_eigenvalues,
                                  radial_curvatures, surface_jet)
from curvplateau.grids import DiskGrid
from curvplateau.radial import equidistant_cap, euclidean_cap
from curvplateau.symmfunc import CurvatureFunctionSpec

GAUSS2 = CurvatureFunctionSpec.gauss(2)


def _points3(rng, count, height_range=(0.2, 3.0)):
    pts = rng.uniform(-2.0, 2.0, size=(count, 3))
    pts[:, 2] = rng.uniform(*height_range, size=count)
    return pts


class TestSurfaceJet:
    def test_horosphere_is_exactly_umbilic(self):
        grid = DiskGrid(1.0, 31)
        surface = GraphSurface(AmbientModel.hyperbolic(), grid,
                               np.full(grid.interior_count, 0.7), 0.7)
        jet = surface.jet()
        assert np.max(np.abs(jet.eigenvalues - 1.0)) < 1e-12
        assert np.all(jet.admissible_mask)
        # Downward orientation: vertical component of the normal negative.
        assert np.all(jet.normal[:, 2] < 0)

    def test_euclidean_cap_eigenvalues(self):
        cap = euclidean_cap(1.0, 0.5)
        grid = DiskGrid(1.0, 41)
        jet = cap.surface(grid).jet()
        err = np.abs(jet.eigenvalues - 0.5)
        core = np.linalg.norm(jet.points, axis=1) < 0.7
        assert err[core].max() < 2.5e-4, err[core].max()
        assert err.max() < 2e-3, err.max()
        assert np.all(jet.normal[:, 2] > 0)

    def test_equidistant_cap_eigenvalues(self):
        cap = equidistant_cap(1.0, 0.5, 0.02)
        grid = DiskGrid(1.0, 41)
        jet = cap.surface(grid).jet()
        err = np.abs(jet.eigenvalues - 0.5)
        core = np.linalg.norm(jet.points, axis=1) < 0.7
        assert err[core].max() < 2.5e-3, err[core].max()
        assert err.max() < 1e-2, err.max()

    def test_cap_eigenvalue_convergence(self):
        cap = euclidean_cap(1.0, 0.5)
        errs = []
        for res in (21, 41, 81):
            grid = DiskGrid(1.0, res)
            jet = cap.surface(grid).jet()
            core = np.linalg.norm(jet.points, axis=1) < 0.7
            errs.append(np.abs(jet.eigenvalues - 0.5)[core].max())
        order = np.log2(errs[0] / errs[2]) / 2.0
        assert order > 1.8, (order, errs)

    def test_tangent_frames_orthonormal(self):
        for model_kind, cap in [
                ("euclidean", euclidean_cap(1.0, 0.6, 0.1)),
                ("hyperbolic", equidistant_cap(1.0, 0.4, 0.05))]:
            grid = DiskGrid(1.0, 21)
            jet = cap.surface(grid).jet()
            frames = jet.tangent_frames()
            gram = np.einsum("nik,nil->nkl", frames, frames)
            if model_kind == "hyperbolic":
                gram = gram / (jet.u ** 2)[:, None, None]
            assert np.max(np.abs(gram - np.eye(2))) < 1e-12

    def test_frames_tangent_to_graph(self):
        cap = euclidean_cap(1.0, 0.5)
        grid = DiskGrid(1.0, 21)
        jet = cap.surface(grid).jet()
        frames = jet.tangent_frames()
        # Tangency: frame dotted with the Euclidean normal vanishes.
        dots = np.einsum("nik,ni->nk", frames, jet.normal)
        assert np.max(np.abs(dots)) < 1e-12

    def test_admissibility_error_carries_node(self):
        grid = DiskGrid(1.0, 15)
        pts = grid.interior_points
        saddle = 0.5 + 0.3 * (pts[:, 0] ** 2 - pts[:, 1] ** 2)
        surface = GraphSurface(AmbientModel.euclidean(), grid, saddle,
                               lambda x, y: 0.5 + 0.3 * (x ** 2 - y ** 2))
        jet = surface.jet()
        with pytest.raises(AdmissibilityError) as info:
            jet.require_admissible()
        assert info.value.node_index is not None
        assert info.value.min_eigenvalue < 0


class TestRadialCurvatures:
    def test_euclidean_cap_profile(self):
        cap = euclidean_cap(1.0, 0.5, 0.3)
        rho = np.linspace(0.0, 1.0, 40)
        k_rad, k_ang = radial_curvatures(
            AmbientModel.euclidean(), rho, cap.heights(rho), cap.slope(rho),
            cap.second(rho))
        assert np.max(np.abs(k_rad - 0.5)) < 1e-12
        assert np.max(np.abs(k_ang - 0.5)) < 1e-12

    def test_equidistant_cap_profile(self):
        cap = equidistant_cap(1.0, 0.3, 0.02)
        rho = np.linspace(0.0, 1.0, 40)
        k_rad, k_ang = radial_curvatures(
            AmbientModel.hyperbolic(), rho, cap.heights(rho), cap.slope(rho),
            cap.second(rho))
        assert np.max(np.abs(k_rad - 0.3)) < 1e-12
        assert np.max(np.abs(k_ang - 0.3)) < 1e-12

    def test_axis_limit_matches_second_derivative(self):
        model = AmbientModel.hyperbolic()
        k_rad, k_ang = radial_curvatures(model, np.array([0.0]),
                                         np.array([0.8]), np.array([0.0]),
                                         np.array([-0.25]))
        assert abs(k_rad[0] - k_ang[0]) < 1e-14


class TestAmbientFields:
    def test_hyperbolic_distance_hessian_identity(self, rng):
        # The covariant Hessian of the distance function is
        # coth(d) (metric - d phi x d phi).
        field = HyperbolicDistanceField((0.5, -0.3, 0.8))
        pts = _points3(rng, 60)
        val, grad, hess = ambient_hessian(AmbientModel.hyperbolic(), field, pts)
        h = pts[:, 2]
        metric = np.eye(3) / (h ** 2)[:, None, None]
        expected = (metric - grad[:, :, None] * grad[:, None, :]) \
            * (1.0 / np.tanh(val))[:, None, None]
        scale = np.max(np.abs(expected), axis=(1, 2))
        assert np.max(np.abs(hess - expected) / scale[:, None, None]) < 1e-9

    def test_hyperbolic_distance_unit_gradient(self, rng):
        field = HyperbolicDistanceField((0.5, -0.3, 0.8))
        pts = _points3(rng, 60)
        norms = gradient_norm(AmbientModel.hyperbolic(),
                              field.gradient(pts), pts)
        assert np.max(np.abs(norms - 1.0)) < 1e-11

    def test_hyperbolic_distance_fd_consistency(self, rng):
        field = HyperbolicDistanceField((1.0, 2.0, 0.5))
        pts = _points3(rng, 10)
        step = 1e-6
        grad = field.gradient(pts)
        for axis in range(3):
            up = pts.copy()
            up[:, axis] += step
            down = pts.copy()
            down[:, axis] -= step
            fd = (field.value(up) - field.value(down)) / (2 * step)
            assert np.max(np.abs(fd - grad[:, axis])) < 1e-8

    def test_levelset_curvature_hyperbolic(self, rng):
        field = HyperbolicDistanceField((0.0, 0.0, 1.0))
        pts = _points3(rng, 40)
        d = field.value(pts)
        lam = levelset_shape_eigenvalues(AmbientModel.hyperbolic(), field, pts)
        expected = 1.0 / np.tanh(d)
        assert np.max(np.abs(lam - expected[:, None])) < 1e-9

    def test_levelset_curvature_euclidean(self, rng):
        field = EuclideanDistanceField((0.2, 0.1, -0.4))
        pts = _points3(rng, 40) + np.array([3.0, 0.0, 0.0])
        d = field.value(pts)
        lam = levelset_shape_eigenvalues(AmbientModel.euclidean(), field, pts)
        assert np.max(np.abs(lam - (1.0 / d)[:, None])) < 1e-9


class TestDeltaK:
    def test_distance_field_identity_hyperbolic(self):
        # On any surface, the weighted Laplacian of the distance field is
        # coth(d) (trace of weights - weighted tangential square) minus
        # the normal component times the curvature value.
        cap = equidistant_cap(1.0, 0.4, 0.05)
        grid = DiskGrid(1.0, 25)
        surface = cap.surface(grid)
        spec = GAUSS2
        field = HyperbolicDistanceField((2.0, 1.0, 0.7))
        m = delta_K(surface, spec, field)
        jet = surface.jet()
        mu_sum = np.sum(m.mu, axis=1)
        kv = np.sum(m.mu * jet.eigenvalues, axis=1)
        coth = 1.0 / np.tanh(m.surface_values)
        expected = coth * (mu_sum - m.tangential_sq) - m.normal_component * kv
        scale = np.maximum(np.abs(expected), 1.0)
        assert np.max(np.abs(m.values - expected) / scale) < 1e-9

    def test_distance_field_identity_euclidean(self):
        cap = euclidean_cap(1.0, 0.5, 0.2)
        grid = DiskGrid(1.0, 25)
        surface = cap.surface(grid)
        spec = CurvatureFunctionSpec.quotient(2, 1)
        field = EuclideanDistanceField((4.0, -1.0, 0.3))
        m = delta_K(surface, spec, field)
        jet = surface.jet()
        mu_sum = np.sum(m.mu, axis=1)
        kv = np.sum(m.mu * jet.eigenvalues, axis=1)
        expected = (mu_sum - m.tangential_sq) / m.surface_values \
            - m.normal_component * kv
        scale = np.maximum(np.abs(expected), 1.0)
        assert np.max(np.abs(m.values - expected) / scale) < 1e-9

    def test_linear_field_euclidean(self):
        # For an affine field the ambient Hessian vanishes, so the
        # weighted Laplacian is minus the normal component times the
        # curvature value (Euler identity contracts weights with shape).
        cap = euclidean_cap(1.0, 0.5, 0.2)
        grid = DiskGrid(1.0, 25)
        surface = cap.surface(grid)
        field = LinearAmbientField((0.3, -0.2, 0.9), 1.0)
        m = delta_K(surface, GAUSS2, field)
        jet = surface.jet()
        kv = np.sum(m.mu * jet.eigenvalues, axis=1)
        expected = -m.normal_component * kv
        assert np.max(np.abs(m.values - expected)) < 1e-10

    def test_hessian_opnorm_for_distance(self):
        # Operator norm of the distance Hessian is coth of the distance.
        cap = equidistant_cap(1.0, 0.4, 0.05)
        grid = DiskGrid(1.0, 15)
        surface = cap.surface(grid)
        field = HyperbolicDistanceField((2.0, 1.0, 0.7))
        m = delta_K(surface, GAUSS2, field)
        coth = 1.0 / np.tanh(m.surface_values)
        assert np.max(np.abs(m.hess_opnorm - coth)) < 1e-9
