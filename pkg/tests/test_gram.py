from __future__ import annotations

import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from opa.errors import NotInterior, NotUnimodular
from opa.gram import (
    b_matrix,
    build_gram,
    interior_distance,
    inverse_entry_bounds,
    normalized_determinant,
    optimal_approximant,
    project,
    solve_optimal,
)
from opa.linalg import ExtendedFloat, Float64, Rational, min_eigenvalue_hermitian
from opa.polynomials import evaluate
from opa.solution import orthogonality_defects
from opa.weights import Bergman, Dirichlet, Hardy, PowerWeight, reciprocal_weight_sum

F = Fraction
BACKENDS = [Float64(), ExtendedFloat(50), Rational()]


def _exterior_backend(n, radius):
    # the Gram matrix has entries up to radius^(2N); solving it needs about that many digits
    return ExtendedFloat(40 + int(2 * (n + 4) * math.log10(radius)))


def _c(values):
    return np.array([complex(v) for v in values])


class TestBuildGram:
    @pytest.mark.parametrize("n", [0, 1, 5, 40])
    def test_hardy_single_zero(self, n):
        sys = build_gram(Hardy, [1], n, Rational())
        assert sys.matrix() == [[n + 2]]

    def test_two_zeros(self):
        assert build_gram(Hardy, [1, -1], 0, Rational()).matrix() == [[3, 1], [1, 3]]

    def test_single_zero_n0(self):
        w = F(1, 3)
        for om in (Hardy, Bergman, Dirichlet):
            sys = build_gram(om, [w], 0, Rational())
            assert sys.matrix() == [[1 + w ** 2 / om.values(1, Rational())[1]]]

    @given(st.lists(st.complex_numbers(min_magnitude=0.3, max_magnitude=2.5, allow_nan=False, allow_infinity=False),
                    min_size=1, max_size=4, unique=True), st.integers(0, 15))
    def test_hermitian_positive_definite(self, zeros, n):
        if any(abs(a - b) < 0.1 for i, a in enumerate(zeros) for b in zeros[i + 1:]):
            return
        sys = build_gram(Hardy, zeros, n, ExtendedFloat(50))
        assert min_eigenvalue_hermitian(sys.matrix(), sys.backend) > 0


class TestProject:
    @pytest.mark.parametrize("b", BACKENDS, ids=str)
    @pytest.mark.parametrize("n", [0, 3, 10])
    def test_hardy_linear(self, b, n):
        res = project(build_gram(Hardy, [1], n, b), [1])
        assert np.allclose(_c(res.A), [1 / (n + 2)], atol=1e-14)
        assert np.allclose(_c(res.residual_coeffs), [1 / (n + 2)] * (n + 2), atol=1e-14)
        assert complex(res.distance_sq) == pytest.approx(1 / (n + 2))

    def test_two_zeros_exact(self):
        res = project(build_gram(Hardy, [1, -1], 0, Rational()), [1])
        assert list(res.A) == [F(1, 4), F(1, 4)]
        assert list(res.residual_coeffs) == [F(1, 2), 0, F(1, 2)]
        assert res.distance_sq == F(1, 2)

    def test_g_vanishing_on_zeros(self):
        res = project(build_gram(Hardy, [1, -1], 3, Rational()), [-1, 0, 1])
        assert all(a == 0 for a in res.A)
        assert all(c == 0 for c in res.residual_coeffs)
        assert res.distance_sq == 0

    def test_general_g(self):
        # min over a + b z of ||(z - 1) - (a + b z)(z^2 - 1)||^2 = (a-1)^2 + (1+b)^2 + a^2 + b^2, minimum 1
        res = project(build_gram(Hardy, [1, -1], 1, Rational()), [-1, 1])
        assert res.distance_sq == 1

    def test_degree_checks(self):
        sys = build_gram(Hardy, [1], 2, Rational())
        with pytest.raises(ValueError):
            project(sys, [0, 0, 1])
        with pytest.raises(ValueError):
            project(build_gram(Hardy, [1, -1], 0, Rational()), [0, 1])


class TestSolveOptimal:
    def test_hardy_linear_n0(self):
        sol = optimal_approximant(Hardy, [1], 0, backend=Rational())
        assert sol.pn_coeffs.coeffs == (F(-1, 2),)
        assert sol.distance_sq == F(1, 2)

    def test_two_zeros_n0(self):
        sol = optimal_approximant(Hardy, [1, -1], 0, backend=Rational())
        assert sol.pn_coeffs.coeffs == (F(-1, 2),)
        assert sol.distance_sq == F(1, 2)

    def test_exterior_zero_cyclic(self):
        d = [optimal_approximant(Hardy, [2], n, backend=Float64()).distance_sq_float for n in (5, 20, 40)]
        assert d[0] > d[1] > d[2]
        assert d[2] < 1e-20

    def test_interior_zero_limit(self):
        sol = optimal_approximant(Hardy, [0.5], 60, backend=Float64())
        assert sol.distance_sq_float == pytest.approx(0.75, abs=1e-12)
        assert sol.pn_method == "division"

    def test_residual_is_one_at_zeros(self):
        zeros = [1.3, -0.7 + 0.9j, 1j]
        sol = optimal_approximant(Dirichlet, zeros, 12, backend=Float64())
        for z in zeros:
            assert abs(evaluate(list(sol.residual_array()), z) - 1) < 1e-9

    def test_leading_coefficient_scaling(self):
        zeros = [1.5, -1j]
        a = optimal_approximant(Bergman, zeros, 6, leading=1, backend=Float64())
        b = optimal_approximant(Bergman, zeros, 6, leading=2 - 1j, backend=Float64())
        assert np.allclose(a.residual_array(), b.residual_array(), atol=1e-13)
        assert a.distance_sq_float == pytest.approx(b.distance_sq_float)
        assert np.allclose(b.pn_array() * (2 - 1j), a.pn_array(), atol=1e-12)

    @given(st.sampled_from([-1, 0, 1]), st.integers(0, 12),
           st.lists(st.tuples(st.integers(-6, 6), st.integers(-6, 6)), min_size=1, max_size=3, unique=True))
    def test_exact_orthogonality(self, alpha, n, pts):
        zeros = [complex(a, b) / 2 for a, b in pts if (a, b) != (0, 0)]
        if not zeros:
            return
        sol = optimal_approximant(PowerWeight(alpha), zeros, n, backend=Rational())
        defects = orthogonality_defects(sol.residual_coeffs, sol.f.coeffs, sol.omega, n, Rational())
        assert all(x == 0 for x in defects)
        assert 0 <= sol.distance_sq <= 1

    def test_distance_non_increasing(self):
        d = [optimal_approximant(Dirichlet, [1, 1j], n, backend=Float64()).distance_sq_float for n in range(0, 30)]
        assert all(b <= a + 1e-15 for a, b in zip(d, d[1:]))

    def test_distance_times_reciprocal_sum_bounded(self):
        vals = []
        for n in (10, 100, 500, 2000):
            res = project(build_gram(Hardy, [1, -1, 1.5], n, _exterior_backend(n, 1.5)), [1])
            vals.append(float(res.distance_sq) * reciprocal_weight_sum(Hardy, n))
        assert max(vals) < 10 * min(vals)

    def test_growth_of_A(self):
        # zeros on the circle: |A_i|(n+d+1) bounded; exterior zero: |A_i||z_i|^(n+d+1) -> 0
        scaled = []
        for n in (10, 50, 200, 800, 2000):
            sys = build_gram(Hardy, [1, 2], n, _exterior_backend(n, 2))
            A = project(sys, [1]).A
            N = n + 3
            assert float(abs(A[0])) * N < 2
            scaled.append(float(abs(A[1]) * sys.backend.ctx.mpf(2) ** N))
        assert all(b < a for a, b in zip(scaled, scaled[1:]))
        assert scaled[-1] < 1e-2


class TestInteriorDistance:
    def test_single(self):
        assert float(interior_distance(Hardy, [0.5])) == pytest.approx(0.75, abs=1e-12)

    def test_small(self):
        assert float(interior_distance(Hardy, [0.01])) == pytest.approx(1 - 1e-4, abs=1e-12)

    def test_pair(self):
        # Szego Gramian [[4/3, 4/5], [4/5, 4/3]] applied to (1, 1)
        v = float(interior_distance(Hardy, [0.5, -0.5]))
        assert v == pytest.approx(2 / (4 / 3 + 4 / 5), abs=1e-12)
        assert 0 < v < 1

    def test_rejects_boundary(self):
        with pytest.raises(NotInterior):
            interior_distance(Hardy, [1.0])


class TestInverseBounds:
    @pytest.mark.parametrize("n", [0, 4, 30])
    def test_single(self, n):
        assert inverse_entry_bounds(build_gram(Hardy, [1], n, Rational()))[0][0] == pytest.approx((n + 1) / (n + 2))

    def test_pair(self):
        got = inverse_entry_bounds(build_gram(Hardy, [1, -1], 0, Rational()))
        assert np.allclose(got, [[0.375, 0.125], [0.125, 0.375]])

    def test_requires_unimodular(self):
        with pytest.raises(NotUnimodular):
            inverse_entry_bounds(build_gram(Hardy, [1, 2], 0, Rational()))

    def test_bounded_in_n(self):
        vals = [np.max(inverse_entry_bounds(build_gram(Bergman, [1, 1j, -1], n, Float64()))) for n in (10, 100, 1000)]
        assert max(vals) < 5 * min(vals)


class TestNormalizedDeterminant:
    def test_single_zero_hardy(self):
        # det = n + 2 = (n + d + 1)^1
        assert normalized_determinant(build_gram(Hardy, [1], 20, Rational())) == pytest.approx(1.0)

    def test_bergman_extra_power(self):
        sys = build_gram(Bergman, [1], 20, Rational())
        # det = (N)(N+1)/2 with N = n+2; normalized by N^(d1 + d) = N^2
        assert normalized_determinant(sys) == pytest.approx(23 / 44)

    def test_backends_agree(self):
        a = normalized_determinant(build_gram(Hardy, [1, 2], 30, ExtendedFloat(60)))
        b = normalized_determinant(build_gram(Hardy, [1, 2], 30, Rational()))
        assert a == pytest.approx(b, rel=1e-12)


class TestBMatrix:
    def test_example(self):
        B = b_matrix([2, 3], Rational())
        assert B == [[F(1, 3), F(1, 5)], [F(1, 5), F(1, 8)]]
        assert min_eigenvalue_hermitian(B, Rational()) > 0

    def test_rejects_inside(self):
        with pytest.raises(ValueError):
            b_matrix([0.5, 2])
