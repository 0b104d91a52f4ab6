"""Closed-form cap identities and the rotational shooting solver."""

import numpy as np
import pytest

from curvplateau import symmfunc
from curvplateau.errors import DomainError
from curvplateau.fields import ConstantField
from curvplateau.geometry import AmbientModel
from curvplateau.radial import (CapProfile, equidistant_cap, euclidean_cap,
                                radial_eigenvalues, radial_solve)
from curvplateau.symmfunc import CurvatureFunctionSpec

GAUSS2 = CurvatureFunctionSpec.gauss(2)
PROFILE_TOL = 1e-8


class TestCapProfiles:
    def test_euclidean_cap_boundary_and_curvature(self):
        cap = euclidean_cap(1.0, 0.5, 0.25)
        assert abs(cap.heights(1.0) - 0.25) < 1e-14
        rho = np.linspace(0.0, 1.0, 30)
        lam = radial_eigenvalues(cap, cap.model, 2, rho)
        assert np.max(np.abs(lam - 0.5)) < 1e-12

    def test_equidistant_cap_boundary_and_curvature(self):
        for k in (0.3, 0.5, 0.8):
            cap = equidistant_cap(1.0, k, 0.02)
            assert abs(cap.heights(1.0) - 0.02) < 1e-13
            rho = np.linspace(0.0, 1.0, 30)
            lam = radial_eigenvalues(cap, cap.model, 2, rho)
            assert np.max(np.abs(lam - k)) < 1e-12

    def test_rim_slope_limit(self):
        # As the boundary height vanishes the squared rim slope tends to
        # 1 / k^2 - 1.
        k = 0.5
        slopes = [equidistant_cap(1.0, k, eps).rim_slope_sq()
                  for eps in (0.08, 0.04, 0.02, 0.002)]
        target = 1.0 / k ** 2 - 1.0
        gaps = [abs(s - target) for s in slopes]
        assert gaps[0] > gaps[1] > gaps[2] > gaps[3]
        assert gaps[3] < 0.02 * target

    def test_caps_shrink_as_curvature_grows(self):
        rho = np.linspace(0.0, 0.99, 25)
        heights = [equidistant_cap(1.0, k, 0.02).heights(rho)
                   for k in (0.3, 0.5, 0.7)]
        assert np.all(heights[0] > heights[1])
        assert np.all(heights[1] > heights[2])

    def test_unattainable_caps_rejected(self):
        with pytest.raises(DomainError):
            euclidean_cap(1.0, 1.5)
        with pytest.raises(DomainError):
            equidistant_cap(1.0, 1.2, 0.02)
        with pytest.raises(DomainError):
            equidistant_cap(1.0, 0.5, 0.0)


class TestRadialSolve:
    def test_euclidean_gauss_matches_cap(self):
        cap = euclidean_cap(1.0, 0.5, 0.0)
        sol = radial_solve(GAUSS2, AmbientModel.euclidean(),
                           ConstantField(0.5), 1.0, 0.0)
        assert sol.ok
        rho = np.linspace(0.0, 1.0, 60)
        u, du = sol.profile(rho)
        assert np.max(np.abs(u - cap.heights(rho))) < PROFILE_TOL
        assert np.max(np.abs(du - cap.slope(rho))) < 1e-7
        assert abs(sol.apex_height - cap.heights(0.0)) < PROFILE_TOL

    def test_hyperbolic_gauss_matches_cap(self):
        cap = equidistant_cap(1.0, 0.5, 0.02)
        sol = radial_solve(GAUSS2, AmbientModel.hyperbolic(),
                           ConstantField(0.5), 1.0, 0.02)
        assert sol.ok
        rho = np.linspace(0.0, 1.0, 60)
        u, _ = sol.profile(rho)
        assert np.max(np.abs(u - cap.heights(rho))) < PROFILE_TOL

    def test_quotient_three_two_self_consistent(self):
        # Three-dimensional rotational graph for the quotient of the top
        # two symmetric functions.  Constant prescriptions are solved by
        # umbilic equidistant caps in any dimension, so the closed form
        # is an exact reference; the curvature function is also evaluated
        # along the computed profile.
        spec = CurvatureFunctionSpec.quotient(3, 2)
        sol = radial_solve(spec, AmbientModel.hyperbolic(),
                           ConstantField(0.8), 1.0, 0.05)
        assert sol.ok
        rho = np.linspace(0.0, 1.0, 40)
        cap = equidistant_cap(1.0, 0.8, 0.05)
        u, _ = sol.profile(rho)
        assert np.max(np.abs(u - cap.heights(rho))) < PROFILE_TOL
        lam = radial_eigenvalues(sol, AmbientModel.hyperbolic(), 3, rho)
        values = np.asarray(symmfunc.evaluate(spec, lam))
        assert np.max(np.abs(values - 0.8)) < 1e-6
        assert abs(sol.profile(np.array([1.0]))[0][0] - 0.05) < 1e-10

    def test_euclidean_nonexistence_reported(self):
        sol = radial_solve(GAUSS2, AmbientModel.euclidean(),
                           ConstantField(1.5), 1.0, 0.0)
        assert sol.status == "no_solution"
        assert sol.scan
        assert not sol.ok

    def test_profile_scalar_queries(self):
        sol = radial_solve(GAUSS2, AmbientModel.euclidean(),
                           ConstantField(0.5), 1.0, 0.0)
        u, du = sol.profile(0.5)
        assert isinstance(u, float)
        cap = euclidean_cap(1.0, 0.5, 0.0)
        assert abs(u - cap.heights(0.5)) < PROFILE_TOL
