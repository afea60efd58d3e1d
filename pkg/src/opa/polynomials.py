"""Complex polynomials, zero bookkeeping and power-series division.

Coefficient lists are indexed by power. Scalars may be Python complex numbers,
exact rationals (:class:`fractions.Fraction`, :class:`opa.linalg.QQi`) or
mpmath numbers; the arithmetic here is written to work with all of them.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence

from .errors import InconsistentResidual, InvalidZeroSet, ZeroAtOrigin
from .linalg import QQi

EPS_SEP = 1e-9
EPS_IN = 1e-12
UNIT_TOL = 1e-10


def _trim(coeffs: Iterable) -> tuple:
    c = list(coeffs)
    while c and c[-1] == 0:
        c.pop()
    return tuple(c)


def _cabs(x) -> float:
    return abs(complex(x))


def _phase(x) -> float:
    # math.atan2 rather than cmath.phase, which raises on subnormal imaginary parts
    c = complex(x)
    return math.atan2(c.imag, c.real)


@dataclass(frozen=True)
class ComplexPolynomial:
    """Polynomial ``sum coeffs[k] z^k``; the zero polynomial has no coefficients."""

    coeffs: tuple

    def __init__(self, coeffs: Iterable = ()):
        object.__setattr__(self, "coeffs", _trim(coeffs))

    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1

    @property
    def leading(self):
        if not self.coeffs:
            raise ValueError("zero polynomial has no leading coefficient")
        return self.coeffs[-1]

    def __len__(self):
        return len(self.coeffs)

    def __getitem__(self, k):
        return self.coeffs[k]

    def coef(self, k: int):
        return self.coeffs[k] if 0 <= k < len(self.coeffs) else 0

    def __call__(self, z):
        return evaluate(self, z)

    def __mul__(self, other):
        if isinstance(other, ComplexPolynomial):
            return ComplexPolynomial(convolve(self.coeffs, other.coeffs))
        return ComplexPolynomial(c * other for c in self.coeffs)

    __rmul__ = __mul__

    def __add__(self, other):
        return ComplexPolynomial(add(self.coeffs, other.coeffs))

    def __sub__(self, other):
        return ComplexPolynomial(add(self.coeffs, [-c for c in other.coeffs]))

    def __eq__(self, other):
        return isinstance(other, ComplexPolynomial) and self.coeffs == other.coeffs

    def __hash__(self):
        return hash(self.coeffs)

    def to_complex(self) -> "ComplexPolynomial":
        return ComplexPolynomial(complex(c) for c in self.coeffs)

    def to_json(self) -> list[list[float]]:
        return to_pairs(self.coeffs)

    @classmethod
    def from_json(cls, pairs: Sequence[Sequence[float]]) -> "ComplexPolynomial":
        return cls(from_pairs(pairs))

    def __repr__(self):
        return f"ComplexPolynomial({list(self.coeffs)!r})"


def to_pairs(values: Iterable) -> list[list[float]]:
    out = []
    for v in values:
        c = complex(v)
        out.append([c.real, c.imag])
    return out


def from_pairs(pairs: Sequence[Sequence[float]]) -> list[complex]:
    return [complex(float(p[0]), float(p[1])) for p in pairs]


def add(a: Sequence, b: Sequence) -> list:
    if len(a) < len(b):
        a, b = b, a
    out = list(a)
    for i, v in enumerate(b):
        out[i] = out[i] + v
    return out


def convolve(a: Sequence, b: Sequence) -> list:
    if not a or not b:
        return []
    out = [0] * (len(a) + len(b) - 1)
    for i, x in enumerate(a):
        if x == 0:
            continue
        for j, y in enumerate(b):
            out[i + j] = out[i + j] + x * y
    return out


def evaluate(p: ComplexPolynomial | Sequence, z):
    """Horner evaluation."""
    coeffs = p.coeffs if isinstance(p, ComplexPolynomial) else p
    acc = 0
    for c in reversed(coeffs):
        acc = acc * z + c
    return acc


def derivative_at(coeffs: Sequence, x, s: int):
    """``s``-th derivative of ``sum coeffs[k] z^k`` at ``x``."""
    acc = 0
    for k in range(len(coeffs) - 1, s - 1, -1):
        ff = math.perm(k, s)
        acc = acc * x + coeffs[k] * ff
    return acc


@dataclass(frozen=True)
class ZeroSet:
    """Distinct nonzero zeros sorted by modulus (ties by argument)."""

    zeros: tuple
    unit_tol: float = UNIT_TOL

    def __init__(self, zeros: Iterable, unit_tol: float = UNIT_TOL, eps_sep: float = EPS_SEP,
                 eps_in: float = EPS_IN):
        zs = list(zeros)
        if not zs:
            raise InvalidZeroSet("zero set is empty")
        for z in zs:
            if _cabs(z) <= eps_in:
                raise ZeroAtOrigin(f"zero {complex(z)} lies at the origin: f(0) = 0 and every approximant vanishes")
            if not cmath.isfinite(complex(z)):
                raise InvalidZeroSet(f"non-finite zero {z!r}")
        zs.sort(key=lambda z: (_cabs(z), _phase(z)))
        for i in range(len(zs)):
            for j in range(i + 1, len(zs)):
                if _cabs(complex(zs[i]) - complex(zs[j])) <= eps_sep:
                    raise InvalidZeroSet(
                        f"zeros {complex(zs[i])} and {complex(zs[j])} are not distinct (separation <= {eps_sep})"
                    )
        object.__setattr__(self, "zeros", tuple(zs))
        object.__setattr__(self, "unit_tol", unit_tol)

    def __len__(self):
        return len(self.zeros)

    def __iter__(self):
        return iter(self.zeros)

    def __getitem__(self, i):
        return self.zeros[i]

    @property
    def d(self) -> int:
        return len(self.zeros)

    def on_circle(self, z) -> bool:
        return abs(_cabs(z) - 1.0) < self.unit_tol

    @property
    def d1(self) -> int:
        return sum(1 for z in self.zeros if self.on_circle(z))

    @property
    def all_unimodular(self) -> bool:
        return self.d1 == self.d

    @property
    def all_interior(self) -> bool:
        return all(_cabs(z) < 1 for z in self.zeros)

    @property
    def any_interior(self) -> bool:
        return any(_cabs(z) < 1 - self.unit_tol for z in self.zeros)

    @classmethod
    def parse(cls, text: str, **kw) -> "ZeroSet":
        """Parse ``"re,im;re,im;..."``."""
        return cls(parse_complex_list(text), **kw)

    def to_json(self) -> list[list[float]]:
        return to_pairs(self.zeros)


def parse_complex_list(text: str) -> list[complex]:
    out = []
    for chunk in text.split(";"):
        chunk = chunk.strip()
        if not chunk:
            continue
        parts = [p.strip() for p in chunk.split(",")]
        if len(parts) == 1:
            out.append(complex(float(parts[0]), 0.0))
        elif len(parts) == 2:
            out.append(complex(float(parts[0]), float(parts[1])))
        else:
            raise ValueError(f"cannot parse complex number from {chunk!r}; use 're,im'")
    if not out:
        raise ValueError("no complex numbers given")
    return out


def from_zeros(zeros: ZeroSet | Iterable, leading=1) -> ComplexPolynomial:
    """``leading * prod (z - z_i)``."""
    if leading == 0:
        raise ValueError("leading coefficient must be nonzero")
    coeffs = [leading]
    for z in zeros:
        coeffs = convolve(coeffs, [-z, 1])
    return ComplexPolynomial(coeffs)


def reciprocal_series(f: ComplexPolynomial | Sequence, N: int) -> list:
    """Taylor coefficients ``b_0..b_N`` of ``1/f``."""
    c = f.coeffs if isinstance(f, ComplexPolynomial) else tuple(f)
    if not c or c[0] == 0:
        raise ZeroAtOrigin("f(0) = 0: 1/f has no Taylor expansion at the origin")
    f0 = c[0]
    b = [Fraction(1, f0) if isinstance(f0, int) else 1 / f0]
    for k in range(1, N + 1):
        s = 0
        for j in range(1, min(k, len(c) - 1) + 1):
            s = s + c[j] * b[k - j]
        b.append(-s / f0)
    return b


def _residual_tolerance(values: Iterable, exact: bool, tol: float):
    if exact:
        return 0
    return tol * max(1.0, max((_cabs(v) for v in values), default=0.0))


def identity_defect(pn: Sequence, f: Sequence, residual: Sequence) -> list:
    """Coefficients of ``pn*f + residual - 1``."""
    prod = convolve(list(pn), list(f))
    out = add(prod, list(residual))
    if not out:
        out = [0]
    out[0] = out[0] - 1
    return out


def _is_exact(values: Iterable) -> bool:
    return all(isinstance(v, (int, Fraction, QQi)) for v in values)


def recover_pn(residual: Sequence, f: ComplexPolynomial | Sequence, n: int, tol: float = 1e-9) -> ComplexPolynomial:
    """Coefficients of ``p_n`` from those of ``1 - p_n f``.

    Uses ``c_k = b_k - sum_{r<=k} b_{k-r} d_r`` where ``b`` are the Taylor
    coefficients of ``1/f`` and ``d`` those of the residual; this is the sign
    for which ``p_n f + (1 - p_n f) = 1`` holds.
    """
    fc = list(f.coeffs if isinstance(f, ComplexPolynomial) else f)
    d = len(fc) - 1
    if n < 0:
        raise ValueError("n must be >= 0")
    if d < 1:
        raise ValueError("f must have degree >= 1")
    if len(residual) != n + d + 1:
        raise ValueError(f"residual must have n+d+1 = {n + d + 1} coefficients, got {len(residual)}")
    b = reciprocal_series(fc, n)
    c = []
    for k in range(n + 1):
        s = 0
        for r in range(k + 1):
            s = s + b[k - r] * residual[r]
        c.append(b[k] - s)
    _verify(c, fc, residual, tol)
    return ComplexPolynomial(c)


def _verify(c: Sequence, f: Sequence, residual: Sequence, tol: float) -> None:
    defect = identity_defect(c, f, residual)
    exact = _is_exact(list(c) + list(f) + list(residual))
    scale = [sum(_cabs(x) for x in c) * max(_cabs(x) for x in f), *residual]
    bound = _residual_tolerance(scale, exact, tol)
    worst = max(_cabs(x) for x in defect)
    if worst > bound:
        raise InconsistentResidual(
            f"p_n f + residual - 1 has a coefficient of size {worst:.3e} (allowed {float(bound):.1e})"
        )


def divide_by_linear(num: Sequence, a) -> list:
    """Quotient of ``num`` by ``(z - a)``, assuming the division is exact.

    Runs from the constant term up when ``|a| >= 1`` and from the top down
    otherwise, so rounding errors are never amplified.
    """
    K = len(num) - 1
    if K < 1:
        raise ValueError("numerator must have degree >= 1")
    if _cabs(a) >= 1:
        q = [0] * K
        prev = 0
        for k in range(K):
            prev = (prev - num[k]) / a
            q[k] = prev
        return q
    q = [0] * K
    q[K - 1] = num[K]
    for k in range(K - 1, 0, -1):
        q[k - 1] = num[k] + a * q[k]
    return q


def divide_by_zeros(num: Sequence, zeros: Iterable, leading=1) -> list:
    """Exact quotient ``num / (leading * prod (z - z_i))`` by stable linear-factor steps."""
    q = list(num)
    for z in zeros:
        q = divide_by_linear(q, z)
    return [x / leading for x in q]


def quotient_pn(residual: Sequence, f: ComplexPolynomial, zeros: Iterable, n: int, tol: float = 1e-9) -> ComplexPolynomial:
    """``p_n = (1 - residual) / f`` via :func:`divide_by_zeros`, verified like :func:`recover_pn`."""
    num = [-x for x in residual]
    num[0] = num[0] + 1
    c = divide_by_zeros(num, zeros, f.leading)
    if len(c) != n + 1:
        raise ValueError("residual length does not match n + deg f + 1")
    _verify(c, list(f.coeffs), residual, tol)
    return ComplexPolynomial(c)
