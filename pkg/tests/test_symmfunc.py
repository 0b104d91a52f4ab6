"""Tests for curvature-function evaluation, limits, and axiom checks."""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from curvplateau import symmfunc
from curvplateau.errors import DomainError, InconsistencyError
from curvplateau.symmfunc import (
    CurvatureFunctionSpec,
    EigenvalueVector,
    check_axioms,
    evaluate,
    limit_at_infinity,
    partial_derivatives,
    quotient_limit_closed_form,
    sigma,
)

from conftest import quotient_enumerated, sigma_enumerated


class TestSigma:
    def test_known_value(self):
        assert sigma(3, [1.0, 2.0, 3.0]) == pytest.approx(6.0, abs=0)

    def test_matches_enumeration_oracle(self, rng):
        for n in range(1, 7):
            x = 10.0 ** rng.uniform(-2, 2, size=n)
            for k in range(n + 1):
                expected = sigma_enumerated(k, x)
                assert sigma(k, x) == pytest.approx(expected, rel=1e-13)

    def test_batched_agrees_with_rows(self, rng):
        X = 10.0 ** rng.uniform(-1, 1, size=(40, 4))
        batched = sigma(2, X)
        rows = np.array([sigma(2, row) for row in X])
        np.testing.assert_array_equal(batched, rows)

    def test_order_out_of_range(self):
        with pytest.raises(ValueError):
            sigma(4, [1.0, 2.0])


class TestEvaluate:
    def test_gauss_known_value(self):
        spec = CurvatureFunctionSpec.gauss(2)
        assert evaluate(spec, [4.0, 1.0]) == pytest.approx(2.0, rel=1e-15)

    def test_quotient_known_value(self):
        # sigma_3 = 2, sigma_1 = 4, c = sqrt(3): sqrt(3 * 2 / 4) = sqrt(3/2)
        spec = CurvatureFunctionSpec.quotient(3, 1)
        expected = math.sqrt(1.5)
        assert evaluate(spec, [1.0, 1.0, 2.0]) == pytest.approx(expected, rel=1e-15)

    def test_quotient_matches_enumeration_oracle(self, rng):
        cases = [(2, 1), (3, 1), (3, 2), (4, 2), (5, 3)]
        for n, k in cases:
            spec = CurvatureFunctionSpec.quotient(n, k)
            for _ in range(25):
                x = 10.0 ** rng.uniform(-2, 2, size=n)
                assert evaluate(spec, x) == pytest.approx(
                    quotient_enumerated(n, k, x), rel=1e-12)

    def test_normalized_at_ones(self):
        for spec in [CurvatureFunctionSpec.gauss(4),
                     CurvatureFunctionSpec.quotient(4, 2),
                     CurvatureFunctionSpec.quotient(5, 1)]:
            assert evaluate(spec, np.ones(spec.n)) == pytest.approx(1.0, abs=1e-15)

    def test_permutation_exact_for_builtins(self, rng):
        spec = CurvatureFunctionSpec.quotient(4, 2)
        x = 10.0 ** rng.uniform(-2, 2, size=4)
        vals = {evaluate(spec, np.array(p)) for p in
                [x, x[::-1], x[[2, 0, 3, 1]], x[[1, 3, 0, 2]]]}
        assert len(vals) == 1

    def test_outside_cone_raises(self):
        spec = CurvatureFunctionSpec.gauss(3)
        with pytest.raises(DomainError) as err:
            evaluate(spec, [1.0, -0.5, 2.0])
        assert err.value.min_eigenvalue == pytest.approx(-0.5)

    def test_zero_component_needs_boundary_flag(self):
        spec = CurvatureFunctionSpec.quotient(3, 1)
        with pytest.raises(DomainError):
            evaluate(spec, [0.0, 1.0, 2.0])
        assert evaluate(spec, [0.0, 1.0, 2.0], allow_boundary=True) == 0.0

    def test_eigenvalue_vector_wrapper(self):
        vec = EigenvalueVector([2.0, 2.0])
        assert vec.in_positive_cone
        assert not EigenvalueVector([2.0, -1.0]).in_positive_cone
        spec = CurvatureFunctionSpec.gauss(2)
        assert evaluate(spec, vec) == pytest.approx(2.0)

    def test_custom_callable(self):
        spec = CurvatureFunctionSpec.custom(3, lambda v: float(np.mean(v)))
        assert evaluate(spec, [1.0, 2.0, 3.0]) == pytest.approx(2.0)


@settings(max_examples=60, deadline=None)
@given(st.lists(st.floats(min_value=1e-3, max_value=1e3), min_size=2, max_size=6),
       st.floats(min_value=1e-2, max_value=1e2))
def test_homogeneity_property(values, t):
    x = np.array(values)
    n = x.size
    spec = CurvatureFunctionSpec.quotient(n, 1) if n > 1 else None
    f1 = evaluate(spec, t * x)
    f2 = t * evaluate(spec, x)
    assert f1 == pytest.approx(f2, rel=1e-11)


@settings(max_examples=60, deadline=None)
@given(st.lists(st.floats(min_value=1e-3, max_value=1e3), min_size=3, max_size=3),
       st.permutations([0, 1, 2]))
def test_symmetry_property(values, perm):
    x = np.array(values)
    spec = CurvatureFunctionSpec.gauss(3)
    assert evaluate(spec, x[list(perm)]) == evaluate(spec, x)


class TestPartialDerivatives:
    def test_gauss_closed_form(self, rng):
        spec = CurvatureFunctionSpec.gauss(4)
        x = 10.0 ** rng.uniform(-1, 1, size=4)
        grad = partial_derivatives(spec, x)
        f = evaluate(spec, x)
        np.testing.assert_allclose(grad, f / (4 * x), rtol=1e-13)

    def test_quotient_matches_finite_differences(self, rng):
        for n, k in [(3, 1), (3, 2), (4, 2), (5, 3)]:
            spec = CurvatureFunctionSpec.quotient(n, k)
            x = 10.0 ** rng.uniform(-0.5, 0.5, size=n)
            grad = partial_derivatives(spec, x)
            h = 1e-6
            for i in range(n):
                e = np.zeros(n)
                e[i] = h
                fd = (evaluate(spec, x + e) - evaluate(spec, x - e)) / (2 * h)
                assert grad[i] == pytest.approx(fd, rel=1e-7)

    def test_euler_identity(self, rng):
        # Degree-one homogeneity forces sum_i x_i df/dx_i = f.
        for spec in [CurvatureFunctionSpec.gauss(3),
                     CurvatureFunctionSpec.quotient(4, 2)]:
            X = 10.0 ** rng.uniform(-2, 2, size=(50, spec.n))
            grad = partial_derivatives(spec, X)
            lhs = np.sum(grad * X, axis=-1)
            np.testing.assert_allclose(lhs, evaluate(spec, X), rtol=1e-12)

    def test_equal_coordinates_get_equal_partials(self):
        spec = CurvatureFunctionSpec.quotient(4, 2)
        grad = partial_derivatives(spec, [2.0, 5.0, 2.0, 1.0])
        assert grad[0] == pytest.approx(grad[2], rel=1e-14)


class TestLimitAtInfinity:
    def test_quotient_finite_with_closed_form(self, rng):
        for n, k in [(2, 1), (3, 1), (3, 2), (4, 2)]:
            spec = CurvatureFunctionSpec.quotient(n, k)
            base = 10.0 ** rng.uniform(-1, 1, size=n - 1)
            lim = limit_at_infinity(spec, base)
            assert lim.is_finite
            assert lim.value == pytest.approx(
                quotient_limit_closed_form(spec, base), rel=1e-8)

    def test_quotient_31_isotropic_value(self):
        spec = CurvatureFunctionSpec.quotient(3, 1)
        lim = limit_at_infinity(spec, [1.0, 1.0])
        assert lim.value == pytest.approx(math.sqrt(3.0), rel=1e-8)

    def test_gauss_divergent(self):
        for n in (2, 3, 4):
            spec = CurvatureFunctionSpec.gauss(n)
            lim = limit_at_infinity(spec, np.full(n - 1, 2.0))
            assert not lim.is_finite
            assert lim.value is None

    def test_decreasing_sequence_raises(self):
        spec = CurvatureFunctionSpec.custom(2, lambda v: float(v[0] + 1.0 / v[1]))
        with pytest.raises(InconsistencyError):
            limit_at_infinity(spec, [1.0])


class TestCheckAxioms:
    def test_quotient_families_pass(self):
        for n, k in [(2, 1), (3, 1), (3, 2), (4, 2)]:
            spec = CurvatureFunctionSpec.quotient(n, k)
            report = check_axioms(spec, n, sample_count=300, rng_seed=7)
            assert report.passed, [r for r in report.results if not r.passed]
            assert report.limit_classification == "finite"
            assert report.decay_constant is not None
            assert report.decay_constant > 0

    def test_gauss_passes_with_infinite_limit(self):
        for n in (2, 3, 4):
            spec = CurvatureFunctionSpec.gauss(n)
            report = check_axioms(spec, n, sample_count=300, rng_seed=7)
            assert report.passed, [r for r in report.results if not r.passed]
            assert report.limit_classification == "infinite"

    def test_mean_fails_only_positivity_decay(self):
        # The arithmetic mean is symmetric, homogeneous, normalized,
        # elliptic, and concave, but does not vanish toward the boundary:
        # f(eps, 1, 1) -> 2/3.
        spec = CurvatureFunctionSpec.custom(
            3, lambda v: float(np.mean(v)), vectorized=False)
        report = check_axioms(spec, 3, sample_count=150, rng_seed=3)
        assert not report.passed
        assert not report.result("positivity_decay").passed
        for name in ("symmetry", "homogeneity", "normalization", "ellipticity"):
            assert report.result(name).passed, name

    def test_convex_function_fails_concavity(self):
        spec = CurvatureFunctionSpec.custom(
            2, lambda v: float(np.sqrt(np.mean(v ** 2))), vectorized=False)
        report = check_axioms(spec, 2, sample_count=150, rng_seed=3)
        assert not report.result("concavity").passed

    def test_deterministic_given_seed(self):
        spec = CurvatureFunctionSpec.quotient(3, 2)
        r1 = check_axioms(spec, 3, sample_count=120, rng_seed=11)
        r2 = check_axioms(spec, 3, sample_count=120, rng_seed=11)
        assert [(a.name, a.margin) for a in r1.results] == \
               [(a.name, a.margin) for a in r2.results]

    def test_dimension_mismatch(self):
        spec = CurvatureFunctionSpec.gauss(3)
        with pytest.raises(ValueError):
            check_axioms(spec, 4)
