"""Weight sequences for H^2_omega and (truncated) reproducing kernels.

A weight sequence ``omega`` defines the norm ``||f||^2 = sum |a_k|^2 omega_k``
and the kernel ``k(z, w) = sum (conj(w) z)^k / omega_k``.
"""

from __future__ import annotations

import csv
import enum
import math
import threading
import warnings
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Sequence

import numpy as np

from .errors import DivergentKernel, OutOfRange, PrecisionExhausted
from .linalg import Backend, ExtendedFloat, Float64, Rational, parse_backend

DEFAULT_RHO = 0.5


class Monotone(enum.Enum):
    NON_DECREASING = "non-decreasing"
    NON_INCREASING = "non-increasing"
    NO = "no"


@dataclass(frozen=True)
class WeightFlags:
    divergent_reciprocal_sum: bool | None
    doubling_constant: float | None
    monotone: Monotone


@dataclass(frozen=True, eq=False)
class WeightSequence:
    """Either the power weight ``(k+1)**alpha`` or a finite custom table.

    Build with :func:`PowerWeight` or :func:`CustomTable`.
    """

    alpha: float | Fraction | int | None = None
    table: tuple[float, ...] | None = None
    _cache: dict = field(default_factory=dict, repr=False, compare=False)
    _lock: threading.Lock = field(default_factory=threading.Lock, repr=False, compare=False)

    def __post_init__(self):
        if (self.alpha is None) == (self.table is None):
            raise ValueError("exactly one of alpha or table must be given")
        if self.table is not None:
            if not self.table:
                raise ValueError("weight table is empty")
            if any(not (v > 0) or not math.isfinite(float(v)) for v in self.table):
                raise ValueError("weights must be positive and finite")
            if self.table[0] != 1:
                raise ValueError(f"omega_0 must equal 1, got {self.table[0]}")

    # identity -----------------------------------------------------------

    def _key(self):
        return ("power", self.alpha) if self.table is None else ("table", self.table)

    def __eq__(self, other):
        return isinstance(other, WeightSequence) and self._key() == other._key()

    def __hash__(self):
        return hash(self._key())

    def __repr__(self):
        if self.table is None:
            return f"PowerWeight({self.alpha})"
        return f"CustomTable(<{len(self.table)} values>)"

    @property
    def is_power(self) -> bool:
        return self.table is None

    @property
    def is_integer_power(self) -> bool:
        return self.is_power and float(self.alpha).is_integer()

    @property
    def max_index(self) -> int | None:
        return None if self.table is None else len(self.table) - 1

    # values -------------------------------------------------------------

    def __call__(self, k: int) -> float:
        return weight(self, k)

    def _check_index(self, k: int) -> None:
        if k < 0:
            raise OutOfRange(f"weight index must be >= 0, got {k}")
        if self.table is not None and k >= len(self.table):
            raise OutOfRange(f"index {k} beyond custom weight table of length {len(self.table)}")

    def values(self, m: int, backend: Backend | None = None) -> list:
        """``[omega_0, ..., omega_m]`` as backend scalars."""
        return self._prefix("w", m, parse_backend(backend))

    def reciprocals(self, m: int, backend: Backend | None = None) -> list:
        """``[1/omega_0, ..., 1/omega_m]`` as backend scalars."""
        return self._prefix("r", m, parse_backend(backend))

    def _prefix(self, which: str, m: int, backend: Backend) -> list:
        self._check_index(m)
        key = (which, backend)
        with self._lock:
            cached = self._cache.get(key)
            if cached is None or len(cached) <= m:
                start = 0 if cached is None else len(cached)
                extra = [self._entry(k, backend, which == "r") for k in range(start, max(m + 1, 2 * start))]
                cached = (cached or []) + extra
                self._cache[key] = cached
            return cached[: m + 1]

    def _entry(self, k: int, backend: Backend, reciprocal: bool):
        if self.table is not None:
            if k >= len(self.table):
                # prefix doubling may overshoot a table; callers never read past m
                return None
            v = self.table[k]
            if isinstance(backend, Rational):
                x = Fraction(v)
            else:
                x = backend.real_scalar(v)
            return 1 / x if reciprocal else x
        a = self.alpha
        if isinstance(backend, Rational):
            if not float(a).is_integer():
                raise TypeError(f"rational backend needs an integer power weight, got alpha={a}")
            x = Fraction(k + 1) ** int(a)
        elif isinstance(backend, Float64):
            x = float(k + 1) ** float(a)
        else:
            ctx = backend.ctx
            x = ctx.power(ctx.mpf(k + 1), backend.real_scalar(a))
        return 1 / x if reciprocal else x

    # diagnostics --------------------------------------------------------

    def s(self, n: int) -> float:
        """``min(1, omega_n)``."""
        return min(1.0, weight(self, n))

    def admissibility(self, rho: float = DEFAULT_RHO) -> list[int]:
        """Indices ``k`` where ``omega_k / omega_{k+1}`` leaves ``[1-rho, 1+rho]``."""
        if self.table is None:
            # (k+1)^a/(k+2)^a is worst at k = 0
            r = 2.0 ** (-float(self.alpha))
            return [] if 1 - rho <= r <= 1 + rho else [0]
        t = self.table
        return [k for k in range(len(t) - 1) if not (1 - rho <= t[k] / t[k + 1] <= 1 + rho)]

    def monotone(self) -> Monotone:
        if self.table is None:
            return Monotone.NON_INCREASING if float(self.alpha) < 0 else Monotone.NON_DECREASING
        t = self.table
        if all(t[k] <= t[k + 1] for k in range(len(t) - 1)):
            return Monotone.NON_DECREASING
        if all(t[k] >= t[k + 1] for k in range(len(t) - 1)):
            return Monotone.NON_INCREASING
        return Monotone.NO

    def doubling_constant(self, n_max: int | None = None) -> float:
        """Smallest C with ``C^-1 w_n <= w_{n+t} <= C w_n`` for ``t <= n+1`` in range."""
        if self.table is None:
            return 2.0 ** abs(float(self.alpha))
        t = self.table
        top = len(t) - 1 if n_max is None else min(n_max, len(t) - 1)
        c = 1.0
        for n in range(top + 1):
            for j in range(n, min(2 * n + 1, top) + 1):
                r = t[j] / t[n]
                c = max(c, r, 1 / r)
        return c

    def flags(self) -> WeightFlags:
        divergent = float(self.alpha) <= 1 if self.table is None else None
        return WeightFlags(divergent, self.doubling_constant(), self.monotone())

    # io -----------------------------------------------------------------

    @classmethod
    def from_csv(cls, path: str | Path, rho: float = DEFAULT_RHO) -> "WeightSequence":
        """Read a one-column CSV with header ``omega``."""
        with open(path, newline="") as fh:
            reader = csv.DictReader(fh)
            if reader.fieldnames is None or [f.strip() for f in reader.fieldnames] != ["omega"]:
                raise ValueError(f"{path}: expected a single 'omega' column, got {reader.fieldnames}")
            values = [float(row[reader.fieldnames[0]]) for row in reader]
        return CustomTable(values, rho=rho)

    def to_csv(self, path: str | Path) -> None:
        if self.table is None:
            raise ValueError("only custom tables are written as CSV")
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["omega"])
            for v in self.table:
                w.writerow([repr(float(v))])


def PowerWeight(alpha) -> WeightSequence:
    """``omega_k = (k+1)**alpha``; alpha = -1, 0, 1 give Bergman, Hardy, Dirichlet."""
    if isinstance(alpha, (int, Fraction)):
        a = alpha
    else:
        a = float(alpha)
        if not math.isfinite(a):
            raise ValueError("alpha must be finite")
        if a.is_integer():
            a = int(a)
    return WeightSequence(alpha=a)


def CustomTable(values: Sequence[float], rho: float = DEFAULT_RHO) -> WeightSequence:
    ws = WeightSequence(table=tuple(values))
    bad = ws.admissibility(rho)
    if bad:
        warnings.warn(
            f"weight ratio omega_k/omega_(k+1) outside [1-{rho}, 1+{rho}] at k={bad[:5]}"
            + ("..." if len(bad) > 5 else ""),
            stacklevel=2,
        )
    return ws


Hardy = PowerWeight(0)
Bergman = PowerWeight(-1)
Dirichlet = PowerWeight(1)


def weight(omega: WeightSequence, k: int) -> float:
    omega._check_index(k)
    if omega.table is not None:
        return float(omega.table[k])
    return float(k + 1) ** float(omega.alpha)


def reciprocal_weight_sum(omega: WeightSequence, n: int, backend: Backend | str | None = None):
    """``sum_{k=0}^n 1/omega_k`` (float unless a backend is given)."""
    if n < 0:
        raise ValueError("n must be >= 0")
    if backend is None:
        return math.fsum(omega.reciprocals(n, Float64()))
    b = parse_backend(backend)
    return b.fsum(omega.reciprocals(n, b))


def _power_sum(q, coeffs: list, backend: Backend):
    """``sum_k coeffs[k] * q**k`` with compensated summation."""
    m = len(coeffs) - 1
    if isinstance(backend, Float64):
        q = complex(q)
        if q == 0:
            return complex(coeffs[0])
        with np.errstate(over="raise", invalid="raise"):
            try:
                powers = np.power(q, np.arange(m + 1))
                terms = powers * np.asarray(coeffs, dtype=float)
            except FloatingPointError as exc:
                raise PrecisionExhausted(f"kernel sum overflows float64 (|q|={abs(q):.3g}, m={m})") from exc
        return complex(math.fsum(terms.real), math.fsum(terms.imag))
    terms = []
    p = backend.scalar(1)
    for c in coeffs:
        terms.append(c * p)
        p = p * q
    return backend.fsum(terms)


def kernel_partial_sum(omega: WeightSequence, m: int, z, w, backend: Backend | str | None = None):
    """``k_m(z, w) = sum_{k=0}^m (conj(w) z)^k / omega_k`` by direct summation."""
    if m < 0:
        raise ValueError("m must be >= 0")
    b = parse_backend(backend)
    q = b.scalar(z) * b.scalar(w).conjugate()
    return _power_sum(q, omega.reciprocals(m, b), b)


def kernel_closed_form(omega: WeightSequence, m: int, z, w, backend: Backend | str | None = None):
    """Closed form of ``k_m`` for the Hardy (alpha=0) and Bergman (alpha=-1) weights."""
    if not omega.is_power or float(omega.alpha) not in (0.0, -1.0):
        raise ValueError("closed form only for PowerWeight(0) and PowerWeight(-1)")
    b = parse_backend(backend)
    q = b.scalar(z) * b.scalar(w).conjugate()
    one = b.scalar(1)
    hardy = float(omega.alpha) == 0.0
    if q == one:
        return b.scalar(m + 1) if hardy else b.scalar(Fraction((m + 1) * (m + 2), 2))
    qm1 = q ** (m + 1)
    if hardy:
        return (one - qm1) / (one - q)
    # d/dq of q(1 - q^(N+1))/(1-q)
    return (one - qm1 * q) / (one - q) ** 2 + b.scalar(m + 2) * qm1 / (q - one)


def _ratio_sup(omega: WeightSequence, j: int) -> float:
    """Upper bound for ``omega_k / omega_{k+1}`` over ``k >= j``."""
    if omega.table is None:
        a = float(omega.alpha)
        return 1.0 if a >= 0 else ((j + 2) / (j + 1)) ** (-a)
    t = omega.table
    if j + 1 >= len(t):
        raise OutOfRange("custom weight table exhausted before the kernel tail bound converged")
    return max(t[k] / t[k + 1] for k in range(j, len(t) - 1))


def full_kernel(omega: WeightSequence, z, w, tol: float = 1e-12, backend: Backend | str | None = None,
                max_terms: int = 10_000_000):
    """The full kernel ``k(z, w)`` for ``|z conj(w)| < 1``, summed until the tail bound < tol.

    The tail after term ``m`` is bounded by the geometric series whose ratio is
    ``|z w| * sup_{k>m} omega_k/omega_{k+1}``.
    """
    if tol <= 0:
        raise ValueError("tol must be positive")
    b = parse_backend(backend)
    r = abs(complex(z) * complex(w).conjugate())
    if r >= 1:
        raise DivergentKernel(f"|z conj(w)| = {r} >= 1: kernel series diverges")
    q = b.scalar(z) * b.scalar(w).conjugate()
    if r == 0:
        return b.scalar(1)
    m = 0
    chunk = 64
    while True:
        m_next = m + chunk
        if omega.table is not None and m_next >= len(omega.table):
            m_next = len(omega.table) - 2
            if m_next < m:
                raise OutOfRange("custom weight table exhausted before the kernel tail bound converged")
        rho = r * _ratio_sup(omega, m_next + 1)
        if rho < 1:
            next_term = r ** (m_next + 1) / weight(omega, m_next + 1)
            if next_term / (1 - rho) < tol:
                return kernel_partial_sum(omega, m_next, z, w, b)
        if m_next >= max_terms:
            raise PrecisionExhausted(f"full kernel did not converge within {max_terms} terms")
        if omega.table is not None and m_next == len(omega.table) - 2:
            raise OutOfRange("custom weight table exhausted before the kernel tail bound converged")
        m = m_next
        chunk *= 2


def truncation_index(omega: WeightSequence, z, w, tol: float = 1e-12) -> int:
    """Smallest chunked index at which :func:`full_kernel` stops for these arguments."""
    r = abs(complex(z) * complex(w).conjugate())
    if r >= 1:
        raise DivergentKernel(f"|z conj(w)| = {r} >= 1")
    m, chunk = 0, 64
    while True:
        m_next = m + chunk
        rho = r * _ratio_sup(omega, m_next + 1)
        if rho < 1 and r ** (m_next + 1) / weight(omega, m_next + 1) / (1 - rho) < tol:
            return m_next
        m, chunk = m_next, chunk * 2


def inner_product(a: Sequence, b: Sequence, omega: WeightSequence, backend: Backend | str | None = None):
    """``<a, b>_omega = sum a_k conj(b_k) omega_k`` for coefficient sequences."""
    bk = parse_backend(backend)
    n = min(len(a), len(b))
    if n == 0:
        return bk.scalar(0)
    w = omega.values(n - 1, bk)
    return bk.fsum(bk.scalar(a[k]) * bk.scalar(b[k]).conjugate() * w[k] for k in range(n))


def norm_sq(a: Sequence, omega: WeightSequence, backend: Backend | str | None = None):
    bk = parse_backend(backend)
    v = inner_product(a, a, omega, bk)
    return v.real if not isinstance(bk, ExtendedFloat) else bk.ctx.re(v)
