from __future__ import annotations

import json

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from opa.boundary import (
    Arc,
    Disc,
    Points,
    RateReport,
    Union,
    parse_compact,
    parse_n_range,
    rate_bound,
    rate_sweep,
    residual_at,
    residual_values,
    sup_on_compact,
    wiener_norm,
)
from opa.errors import EmptyCompact, OutOfDomain
from opa.gram import optimal_approximant
from opa.linalg import Float64, Rational
from opa.multiplicity import multiplicity_approximant
from opa.weights import Bergman, CustomTable, Dirichlet, Hardy, PowerWeight, reciprocal_weight_sum


class TestResidualAt:
    @pytest.mark.parametrize("n", [0, 5, 30])
    def test_origin(self, n):
        sol = optimal_approximant(Hardy, [1], n, backend=Float64())
        assert residual_at(sol, 0) == pytest.approx(1 / (n + 2), abs=1e-14)

    def test_one_at_zeros(self):
        zeros = [1, -1j, 1.4 + 0.2j]
        for om in (Hardy, Bergman, Dirichlet):
            sol = optimal_approximant(om, zeros, 9, backend=Float64())
            for z in zeros:
                assert residual_at(sol, z) == pytest.approx(1, abs=1e-9)

    def test_vanishes_at_i(self):
        sol = optimal_approximant(Hardy, [1, -1], 0, backend=Rational())
        assert abs(residual_at(sol, 1j)) < 1e-15
        assert abs(complex(residual_values(sol, 1j))) < 1e-15

    @given(st.sampled_from([Hardy, Bergman, Dirichlet]), st.integers(0, 40),
           st.complex_numbers(max_magnitude=1, allow_nan=False, allow_infinity=False))
    def test_kernel_matches_horner(self, om, n, z):
        sol = optimal_approximant(om, [1, -1, 1.3j], n, backend=Float64())
        a = residual_at(sol, z)
        b = complex(residual_values(sol, z))
        assert abs(a - b) < 1e-10 * max(1.0, wiener_norm(sol))

    def test_oracle_solution_uses_coefficients(self):
        from opa.oracle import oracle_solve

        sol = oracle_solve(Hardy, [-1, 1], 4, Rational())
        assert residual_at(sol, 0) == pytest.approx(1 / 6)


class TestWienerNorm:
    @pytest.mark.parametrize("n", [0, 3, 50])
    def test_linear(self, n):
        assert wiener_norm(optimal_approximant(Hardy, [1], n, backend=Rational())) == pytest.approx(1.0)

    def test_two_zeros(self):
        assert wiener_norm(optimal_approximant(Hardy, [1, -1], 0, backend=Rational())) == pytest.approx(1.0)

    def test_zero_residual(self):
        sol = optimal_approximant(Hardy, [1], 0, backend=Rational())
        from dataclasses import replace

        assert wiener_norm(replace(sol, residual_coeffs=(0, 0))) == 0

    @given(st.integers(0, 30))
    def test_sup_below_wiener(self, n):
        sol = optimal_approximant(Bergman, [1, 1j, -1.5], n, backend=Float64())
        assert sup_on_compact(sol, Disc(boundary_points=512, grid=32)) <= wiener_norm(sol) + 1e-12


class TestCompactSampler:
    def test_disc_inside(self):
        z = Disc(0.5, boundary_points=64, grid=8).samples()
        assert np.all(np.abs(z) <= 0.5 + 1e-12)
        assert z.size == 64 + 64

    def test_radius_domain(self):
        with pytest.raises(OutOfDomain):
            Disc(1.5)

    def test_points_outside(self):
        with pytest.raises(OutOfDomain):
            Points([2])

    def test_points_hitting_a_zero(self):
        with pytest.raises(OutOfDomain):
            Points([1, 0.5]).avoiding_zeros([1])

    def test_empty(self):
        with pytest.raises(EmptyCompact):
            Arc(0, 0.01, 8).excluding([(1, 0.5)]).samples()
        with pytest.raises(EmptyCompact):
            Disc(0.05, 16, 4).avoiding_zeros([0.01 + 0.01j]).samples()

    def test_exclusions(self):
        K = Disc(boundary_points=256, grid=16).avoiding_zeros([1, 2])
        z = K.samples()
        assert np.all(np.abs(z - 1) >= 0.1)
        assert np.all(np.abs(z - 0.5) >= 0.1)

    def test_arc(self):
        z = Arc(np.pi / 2, 0.1, 20).samples()
        assert np.allclose(np.abs(z), 1)
        assert np.all(np.abs(np.angle(z) - np.pi / 2) <= 0.1 + 1e-12)

    def test_union_and_parse(self):
        K = parse_compact("point:0+points:0.5,0;0,0.5+disc:0.3:4+arc:0:0.2")
        z = K.samples()
        assert 0 in z and 0.5 in z and 0.5j in z
        assert K.kind == "union"
        assert Union([Points([0]), Points([0.1])]).samples().size == 2

    def test_parse_bad(self):
        with pytest.raises(ValueError):
            parse_compact("square:1")


class TestRateBound:
    def test_hardy(self):
        assert rate_bound(Hardy, 9) == pytest.approx(0.1)

    def test_bergman_uses_s(self):
        # s_n = omega_n = 1/(n+1); sum_{k<=n} (k+1) = (n+1)(n+2)/2
        n = 4
        assert rate_bound(Bergman, n) == pytest.approx(1 / ((1 / (n + 1)) * (n + 1) * (n + 2) / 2))

    def test_non_monotone(self):
        assert rate_bound(CustomTable([1.0, 1.2, 1.1, 1.3]), 2) is None


class TestSweep:
    def test_sup_at_origin(self):
        rep = rate_sweep(Hardy, [1], "unit", range(0, 11), Points([0]))
        assert rep.column("sup_K") == pytest.approx([1 / (n + 2) for n in range(11)])
        assert rep.column("wiener") == pytest.approx([1.0] * 11)

    def test_exterior_zero_geometric(self):
        rep = rate_sweep(Hardy, [2], "unit", range(0, 41, 5), Disc(0.9, 512, 32))
        sup = rep.column("sup_K")
        assert all(b < a for a, b in zip(sup, sup[1:]))
        ratios = [b / a for a, b in zip(sup, sup[1:])]
        assert max(ratios) < 0.5

    def test_dirichlet_rate(self):
        K = Disc(0.5, 512, 32)
        rep = rate_sweep(Dirichlet, [1], "unit", [25, 50, 100, 200], K)
        scaled = [s * reciprocal_weight_sum(Dirichlet, n) for s, n in zip(rep.column("sup_K"), rep.column("n"))]
        assert max(scaled) < 3 * min(scaled)
        assert all(r is not None for r in rep.ratios())

    def test_multiplicity_path(self):
        rep = rate_sweep(Hardy, None, "unit", [0, 1], Points([0]), multiplicity_d=2)
        assert rep.rows[0].sup_K == pytest.approx(5 / 6)
        assert rep.rows[0].dist_sq == pytest.approx(5 / 6)

    def test_workers_same_result(self):
        a = rate_sweep(Bergman, [1, -1], "unit", range(0, 30, 3), Disc(1, 256, 16))
        b = rate_sweep(Bergman, [1, -1], "unit", range(0, 30, 3), Disc(1, 256, 16), workers=4)
        assert a.to_csv() == b.to_csv()

    def test_empty_range(self):
        with pytest.raises(ValueError):
            parse_n_range("5..3")
        with pytest.raises(ValueError):
            rate_sweep(Hardy, [1], "unit", [], Points([0]))

    def test_parse_n_range(self):
        assert parse_n_range("0..10:5") == [0, 5, 10]
        assert parse_n_range("7") == [7]

    def test_csv_round_trip(self):
        rep = rate_sweep(PowerWeight(0.5), [1, 1j], "unit", [1, 2, 5], Disc(0.8, 128, 8))
        text = rep.to_csv()
        assert text.splitlines()[0] == "n,sup_K,wiener,dist_sq,bound"
        back = RateReport.from_csv(text)
        assert back.rows == rep.rows
        assert json.loads(rep.to_json())["rows"][0]["n"] == 1

    def test_non_monotone_bound_column_empty(self):
        w = CustomTable([1.0, 1.2, 1.1, 1.3, 1.4, 1.5])
        rep = rate_sweep(w, [1], "unit", [0, 1, 2], Points([0]))
        assert rep.column("bound") == [None, None, None]
        assert rep.to_csv().splitlines()[1].endswith(",")

    def test_multiplicity_solution_values(self):
        sol = multiplicity_approximant(Hardy, 2, 3, Rational())
        assert residual_at(sol, 1) == pytest.approx(1)
