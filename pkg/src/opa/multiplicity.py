"""Optimal approximants to ``1/(z-1)^d`` through a Hankel moment system.

With ``E[i][j] = sum_{k=0}^{n+d} k^(i+j) / omega_k`` (0-based, ``0^0 = 1``)
the coefficient vector solves ``E A = e_1``, the residual coefficients are
``(A_0 + A_1 k + ... + A_{d-1} k^(d-1)) / omega_k`` and the squared
distance is ``A_0 = (E^-1)_{0,0}``.
"""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from . import linalg
from .errors import OutOfDomain, PrecisionExhausted
from .linalg import Backend, ExtendedFloat, Float64, Rational, parse_backend
from .polynomials import ComplexPolynomial, derivative_at, recover_pn
from .solution import ApproximantSolution
from .weights import PowerWeight, WeightSequence

MultiplicitySolution = ApproximantSolution


@dataclass(frozen=True)
class HankelSystem:
    d: int
    n: int
    omega: WeightSequence
    E: tuple
    backend: Backend

    @property
    def moments(self) -> list:
        """``m_p = sum_k k^p / omega_k`` for ``p = 0..2d-2``."""
        return [self.E[0][p] for p in range(self.d)] + [self.E[self.d - 1][p] for p in range(1, self.d)]

    def matrix(self) -> list[list]:
        return [list(r) for r in self.E]


def default_backend(omega: WeightSequence, d: int) -> Backend:
    if omega.is_integer_power and d <= 6:
        return Rational()
    return ExtendedFloat(linalg.DEFAULT_EXTENDED_DIGITS)


def _resolve(backend, omega: WeightSequence, d: int) -> Backend:
    if backend is None or (isinstance(backend, str) and backend.lower() == "auto"):
        return default_backend(omega, d)
    return parse_backend(backend)


def _kpow(k: int, p: int, b: Backend):
    if isinstance(b, Rational):
        return Fraction(k**p)
    if isinstance(b, Float64):
        return float(k) ** p
    return b.ctx.mpf(k) ** p


def build_hankel(omega: WeightSequence, d: int, n: int, backend=None) -> HankelSystem:
    if d < 1:
        raise ValueError("multiplicity d must be >= 1")
    if n < 0:
        raise ValueError("n must be >= 0")
    b = _resolve(backend, omega, d)
    N = n + d
    recips = omega.reciprocals(N, b)
    moments = []
    for p in range(2 * d - 1):
        if p == 0:
            # 0^0 = 1: only the zeroth moment sees the k = 0 term
            terms = recips
        else:
            terms = [_kpow(k, p, b) * recips[k] for k in range(1, N + 1)]
        s = b.fsum(terms)
        moments.append(s.real if isinstance(b, Float64) else (b.ctx.re(s) if isinstance(b, ExtendedFloat) else s))
    E = tuple(tuple(moments[i + j] for j in range(d)) for i in range(d))
    return HankelSystem(d, n, omega, E, b)


def _tol(b: Backend) -> float:
    if b.exact:
        return 0.0
    return b.rtol if isinstance(b, ExtendedFloat) else 1e-9


def _gd_coeffs(d: int) -> list[int]:
    """Coefficients of ``(z - 1)^d``."""
    return [math.comb(d, k) * (-1) ** (d - k) for k in range(d + 1)]


def derivative_conditions(residual, d: int) -> list:
    """``r^(s)(1)`` for ``s = 0..d-1``; should read ``[1, 0, ..., 0]``."""
    return [derivative_at(residual, 1, s) for s in range(d)]


def solve_multiplicity(sys: HankelSystem) -> ApproximantSolution:
    b = sys.backend
    d, n = sys.d, sys.n
    rhs = [b.real_scalar(1)] + [b.real_scalar(0)] * (d - 1)
    M = sys.matrix()
    A = linalg.solve(M, rhs, b)
    if isinstance(b, Float64):
        A = [complex(a).real for a in A]
    elif isinstance(b, ExtendedFloat):
        A = [b.ctx.re(a) for a in A]
    recips = sys.omega.reciprocals(n + d, b)
    residual = []
    for k in range(n + d + 1):
        poly = b.fsum(A[j] * _kpow(k, j, b) if j else A[0] for j in range(d))
        residual.append((poly.real if isinstance(b, Float64) else poly) * recips[k])
    tol = _tol(b)

    e11 = linalg.inverse_entry(M, 0, 0, b)
    if b.exact:
        if e11 != A[0]:
            raise PrecisionExhausted("A_1 differs from (E^-1)_11")
    elif abs(complex(e11) - complex(A[0])) > max(tol, 1e-300) * 1e3 * abs(complex(A[0])):
        raise PrecisionExhausted("A_1 differs from (E^-1)_11 beyond tolerance")

    conds = derivative_conditions(residual, d)
    for s, v in enumerate(conds):
        target = 1 if s == 0 else 0
        if b.exact:
            ok = v == target
        else:
            scale = sum(abs(complex(r)) * math.perm(k, s) for k, r in enumerate(residual) if k >= s)
            ok = abs(complex(v) - target) <= tol * max(1.0, scale)
        if not ok:
            raise PrecisionExhausted(f"derivative condition s={s} at z=1 fails: {complex(v)}")

    f = [b.real_scalar(c) for c in _gd_coeffs(d)]
    pn = recover_pn(residual, f, n, tol=tol if tol else 0)
    return ApproximantSolution(
        n=n,
        d=d,
        zeros=tuple(b.real_scalar(1) for _ in range(d)),
        A=tuple(A),
        residual_coeffs=tuple(residual),
        pn_coeffs=pn,
        distance_sq=A[0],
        omega=sys.omega,
        backend=b,
        leading=b.real_scalar(1),
        method="hankel",
        pn_method="series",
        extra={"inverse_entry_11": e11},
    )


def multiplicity_approximant(omega: WeightSequence, d: int, n: int, backend=None) -> ApproximantSolution:
    return solve_multiplicity(build_hankel(omega, d, n, backend))


# --------------------------------------------------------------------------
# limits


def _alpha_exact(alpha):
    if isinstance(alpha, (int, Fraction)):
        return Fraction(alpha), True
    return Fraction(float(alpha)), False


def beta_int(d: int, s):
    """``B(d, s) = (d-1)! / (s (s+1) ... (s+d-1))`` for integer ``d >= 1``."""
    if d < 1:
        raise ValueError("d must be >= 1")
    den = 1
    for j in range(d):
        den = den * (s + j)
    return math.factorial(d - 1) / den if not isinstance(s, Fraction) else Fraction(math.factorial(d - 1)) / den


def cauchy_inverse_entry(alpha, d: int):
    """``(H^-1)_{1,1}`` for the generalized Hilbert matrix ``H[i][j] = 1/(i+j-1-alpha)``.

    Equal to ``1 / ((1-alpha) B(d, 1-alpha)^2)``.  Exact for int/Fraction alpha.
    """
    a, exact = _alpha_exact(alpha)
    if a >= 1:
        raise OutOfDomain(f"alpha must be < 1, got {alpha}")
    if d < 1:
        raise ValueError("d must be >= 1")
    s = 1 - a
    B = beta_int(d, s)
    val = 1 / (s * B * B)
    return val if exact else float(val)


def limit_constant(alpha, d: int):
    """``lim_n A_{1,n} * sum_{k<=n+d} 1/omega_k`` for ``omega_k = (k+1)^alpha``."""
    a, exact = _alpha_exact(alpha)
    if a > 1:
        raise OutOfDomain(f"alpha must be <= 1, got {alpha}")
    if d < 1:
        raise ValueError("d must be >= 1")
    if a == 1:
        return Fraction(1) if exact else 1.0
    s = 1 - a
    val = 1 / (s * beta_int(d, s)) ** 2
    return val if exact else float(val)


def generalized_hilbert(alpha, d: int) -> list[list]:
    """``[1/(i+j-1-alpha)]`` for 1-based ``i, j <= d``."""
    a, exact = _alpha_exact(alpha)
    if not exact and a.denominator > (1 << 20):
        return [[1.0 / (i + j + 1 - float(alpha)) for j in range(d)] for i in range(d)]
    return [[1 / (i + j + 1 - a) for j in range(d)] for i in range(d)]


@dataclass
class AsymptoticTable:
    alpha: float
    d: int
    limit: float
    tolerance: float
    rows: list = field(default_factory=list)

    @property
    def final_ratio(self) -> float:
        return self.rows[-1][1]

    @property
    def relative_error(self) -> float:
        return abs(self.final_ratio - self.limit) / abs(self.limit)

    @property
    def passed(self) -> bool:
        return self.relative_error <= self.tolerance

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["n", "ratio", "limit", "abs_err"])
        for n, ratio, limit, err in self.rows:
            w.writerow([n, repr(ratio), repr(limit), repr(err)])
        return buf.getvalue()

    def to_json(self) -> str:
        return json.dumps(
            {
                "alpha": self.alpha,
                "d": self.d,
                "limit": self.limit,
                "tolerance": self.tolerance,
                "passed": self.passed,
                "rows": [dict(zip(("n", "ratio", "limit", "abs_err"), r)) for r in self.rows],
            },
            sort_keys=True,
        )


def default_tolerance(alpha) -> float:
    return 0.10 if float(alpha) == 1.0 else 0.05


def asymptotic_n_values(n_max: int, points: int = 12) -> list[int]:
    if n_max < 0:
        raise ValueError("n_max must be >= 0")
    if n_max == 0:
        return [0]
    grid = np.unique(np.round(np.geomspace(1, n_max, points)).astype(int))
    return [int(x) for x in grid]


def asymptotic_check(omega_or_alpha, d: int, n_max: int, backend=None, points: int = 12,
                     tolerance: float | None = None) -> AsymptoticTable:
    """Normalized ratio ``A_{1,n} * sum_{k<=n+d} 1/omega_k`` against its closed-form limit."""
    omega = omega_or_alpha if isinstance(omega_or_alpha, WeightSequence) else PowerWeight(omega_or_alpha)
    if not omega.is_power:
        raise ValueError("asymptotic constants are known only for power weights")
    alpha = omega.alpha
    if float(alpha) > 1:
        raise OutOfDomain(f"alpha must be <= 1, got {alpha}")
    b = _resolve(backend, omega, d)
    if isinstance(b, Float64) and d >= 4:
        raise ValueError("float64 Hankel sweeps are unreliable for d >= 4; use ext or rational")
    limit = float(limit_constant(alpha, d))
    tol = default_tolerance(alpha) if tolerance is None else tolerance
    table = AsymptoticTable(float(alpha), d, limit, tol)
    for n in asymptotic_n_values(n_max, points):
        sys = build_hankel(omega, d, n, b)
        M = sys.matrix()
        rhs = [b.real_scalar(1)] + [b.real_scalar(0)] * (d - 1)
        A = linalg.solve(M, rhs, b)
        if not b.exact:
            res = linalg.matvec(M, A, b)
            err = max(abs(complex(r) - complex(t)) for r, t in zip(res, rhs))
            scale = max(abs(complex(x)) for row in M for x in row) * max(abs(complex(a)) for a in A)
            bound = (1e3 * np.finfo(float).eps if isinstance(b, Float64) else b.rtol) * max(scale, 1.0)
            if err > bound:
                raise PrecisionExhausted(f"Hankel solve residual {err:.3e} at n={n} exceeds {float(bound):.1e}")
        ratio = float(complex(A[0] * sys.E[0][0]).real)
        table.rows.append((n, ratio, limit, abs(ratio - limit)))
    return table
