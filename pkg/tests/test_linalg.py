from __future__ import annotations

from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from opa.errors import NotHermitian, PrecisionExhausted, SingularMatrix
from opa.linalg import (
    QQi,
    ExtendedFloat,
    Float64,
    Rational,
    auto_backend,
    backend_from_env,
    determinant,
    eigenvalue_bracket,
    inverse,
    inverse_entry,
    is_positive_definite,
    matvec,
    min_eigenvalue_hermitian,
    parse_backend,
    solve,
)

BACKENDS = [Float64(), ExtendedFloat(40), Rational()]
F = Fraction


class TestQQi:
    def test_arithmetic(self):
        a = QQi(1, 2)
        b = QQi(F(1, 2), -1)
        assert a * b == QQi(F(5, 2), 0)
        assert (a / b) * b == a
        assert a.conjugate() == QQi(1, -2)
        assert a.abs2() == 5
        assert a - a == 0
        assert complex(a ** 3) == pytest.approx((1 + 2j) ** 3)


class TestParseBackend:
    def test_labels(self):
        assert parse_backend("f64") == Float64()
        assert parse_backend("float64") == Float64()
        assert parse_backend("ext:80") == ExtendedFloat(80)
        assert parse_backend("ext").digits == 60
        assert parse_backend("rational") == Rational()
        assert parse_backend(None) == Float64()

    def test_unknown(self):
        with pytest.raises(ValueError):
            parse_backend("quad")

    def test_env_override(self, monkeypatch):
        monkeypatch.setenv("OPA_BACKEND", "ext:30")
        assert backend_from_env() == ExtendedFloat(30)
        monkeypatch.delenv("OPA_BACKEND")
        assert backend_from_env() is None
        assert backend_from_env("rational") == Rational()

    def test_auto(self):
        assert auto_backend(True, [1, F(1, 2)], 2) == Rational()
        assert auto_backend(False, [1], 2) == Float64()
        assert auto_backend(True, [1], 9) == Float64()
        assert auto_backend(True, [0.5 + 0.25j], 2) == Rational()
        assert auto_backend(True, [0.1], 2) == Float64()  # denominator 2^55 is not "simple"
        assert isinstance(auto_backend(True, [1], 2, "asymptotic"), ExtendedFloat)


class TestSolve:
    @pytest.mark.parametrize("b", BACKENDS, ids=str)
    def test_identity(self, b):
        x = solve([[1, 0, 0], [0, 1, 0], [0, 0, 1]], [1, 2, 3], b)
        assert [complex(v) for v in x] == [1, 2, 3]

    @pytest.mark.parametrize("b", BACKENDS, ids=str)
    def test_gram_example(self, b):
        x = solve([[3, 1], [1, 3]], [1, 1], b)
        assert np.allclose([complex(v) for v in x], [0.25, 0.25], atol=1e-14)

    def test_hankel_example_exact(self):
        assert solve([[3, 3], [3, 5]], [1, 0], Rational()) == [F(5, 6), F(-1, 2)]

    def test_singular(self):
        with pytest.raises(SingularMatrix):
            solve([[1, 2], [2, 4]], [1, 1], Float64())
        with pytest.raises(SingularMatrix):
            solve([[1, 2], [2, 4]], [1, 1], Rational())

    def test_length_mismatch(self):
        with pytest.raises(ValueError):
            solve([[1, 0], [0, 1]], [1], Float64())

    @given(st.integers(1, 12), st.integers(0, 2**31 - 1))
    def test_round_trip_hermitian(self, d, seed):
        rng = np.random.default_rng(seed)
        X = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
        A = X @ X.conj().T + d * np.eye(d)
        b = rng.normal(size=d) + 1j * rng.normal(size=d)
        x = np.array(solve(A.tolist(), b.tolist(), Float64()))
        assert np.max(np.abs(A @ x - b)) / np.max(np.abs(b)) < 1e-12 * np.linalg.cond(A)

    @given(st.integers(1, 6), st.integers(0, 2**31 - 1))
    def test_float_matches_rational(self, d, seed):
        rng = np.random.default_rng(seed)
        A = rng.integers(-5, 6, size=(d, d)) + d * 6 * np.eye(d, dtype=int)
        b = rng.integers(-5, 6, size=d)
        exact = solve(A.tolist(), b.tolist(), Rational())
        approx = solve(A.astype(float).tolist(), b.astype(float).tolist(), Float64())
        for e, a in zip(exact, approx):
            assert abs(complex(a) - float(e)) <= 1e-8 * max(1.0, abs(float(e)))


class TestDeterminant:
    def test_examples(self):
        assert determinant(np.eye(4).tolist(), Rational()) == 1
        assert determinant([[3, 3], [3, 5]], Rational()) == 6
        assert determinant([[1, F(1, 2)], [F(1, 2), F(1, 3)]], Rational()) == F(1, 12)

    def test_singular_is_zero(self):
        assert determinant([[1, 2], [2, 4]], Rational()) == 0

    @pytest.mark.parametrize("b", BACKENDS[:2], ids=str)
    def test_float(self, b):
        assert complex(determinant([[3, 3], [3, 5]], b)) == pytest.approx(6)


class TestInverseEntry:
    def test_identity(self):
        for i in range(3):
            for j in range(3):
                assert inverse_entry(np.eye(3, dtype=int).tolist(), i, j, Rational()) == (1 if i == j else 0)

    def test_hilbert(self):
        assert inverse_entry([[1, F(1, 2)], [F(1, 2), F(1, 3)]], 0, 0, Rational()) == 4

    def test_hankel(self):
        assert inverse_entry([[3, 3], [3, 5]], 0, 0, Rational()) == F(5, 6)

    def test_cofactor_identity(self):
        A = [[F(2), F(1), F(0)], [F(1), F(3), F(1)], [F(0), F(1), F(4)]]
        inv = inverse(A, Rational())
        det = determinant(A, Rational())
        # A^-1 * A = I exactly, and det * inverse entry is an integer cofactor here
        for i in range(3):
            for j in range(3):
                assert sum(inv[i][k] * A[k][j] for k in range(3)) == (1 if i == j else 0)
                assert (inverse_entry(A, i, j, Rational()) * det).denominator == 1

    def test_singular(self):
        with pytest.raises(SingularMatrix):
            inverse_entry([[1, 1], [1, 1]], 0, 0, Rational())


class TestMinEigenvalue:
    @pytest.mark.parametrize("b", BACKENDS, ids=str)
    def test_identity(self, b):
        assert min_eigenvalue_hermitian([[1, 0], [0, 1]], b) == pytest.approx(1, abs=1e-7)

    @pytest.mark.parametrize("b", BACKENDS, ids=str)
    def test_two_by_two(self, b):
        lo, hi = eigenvalue_bracket([[3, 1], [1, 3]], b)
        assert lo <= 2 <= hi
        assert hi - lo < 1e-8 * 4

    def test_b_matrix_example(self):
        B = [[F(1, 3), F(1, 5)], [F(1, 5), F(1, 8)]]
        lam = min(np.linalg.eigvalsh(np.array(B, dtype=float)))
        lo, hi = eigenvalue_bracket(B, Rational())
        assert 0 < lo <= lam <= hi

    def test_not_hermitian(self):
        with pytest.raises(NotHermitian):
            min_eigenvalue_hermitian([[1, 2], [3, 1]], Float64())

    def test_complex_hermitian(self):
        A = [[2, QQi(0, 1)], [QQi(0, -1), 2]]
        lo, hi = eigenvalue_bracket(A, Rational())
        assert lo <= 1 <= hi

    def test_positive_definite_certificate(self):
        assert is_positive_definite([[2, 1], [1, 2]], Rational())
        assert not is_positive_definite([[1, 2], [2, 1]], Rational())
        assert not is_positive_definite([[2, 1], [1, 2]], Rational(), shift=1)

    @given(st.integers(1, 8), st.integers(0, 2**31 - 1))
    def test_matches_numpy(self, d, seed):
        rng = np.random.default_rng(seed)
        X = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
        A = (X + X.conj().T) / 2
        lo, hi = eigenvalue_bracket(A.tolist(), Float64())
        lam = np.linalg.eigvalsh(A)[0]
        slack = 1e-10 * np.abs(A).sum()
        assert lo - slack <= lam <= hi + slack


def test_matvec():
    assert matvec([[1, 2], [3, 4]], [1, 1], Rational()) == [3, 7]


def test_float_residual_guard():
    # the backward-error guard rejects a solve that cannot be trusted
    A = np.array([[1.0, 1.0], [1.0, 1.0 + 1e-13]])
    try:
        x = solve(A.tolist(), [1.0, 2.0], Float64())
    except (SingularMatrix, PrecisionExhausted):
        return
    assert np.max(np.abs(A @ np.array(x) - [1, 2])) < 1e-6
