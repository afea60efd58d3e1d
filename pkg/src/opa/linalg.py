"""Dense complex linear algebra over interchangeable precision backends.

Three backends share one interface:

* ``Float64`` -- machine complex numbers, LAPACK LU for solves.
* ``ExtendedFloat(digits)`` -- mpmath numbers in a private context.
* ``Rational`` -- exact :class:`~fractions.Fraction` / :class:`QQi` scalars.

Matrices are plain nested lists (or anything ``numpy.asarray`` accepts);
entries are converted with :meth:`Backend.scalar` on entry.
"""

from __future__ import annotations

import math
import os
import warnings
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from numbers import Rational as _RationalABC
from typing import Iterable, Sequence

import mpmath
import numpy as np
import scipy.linalg

from .errors import NotHermitian, OPAError, PrecisionExhausted, SingularMatrix

_EPS = np.finfo(float).eps


class QQi:
    """Exact Gaussian rational ``re + i*im`` with Fraction parts."""

    __slots__ = ("re", "im")

    def __init__(self, re=0, im=0):
        self.re = _fraction(re)
        self.im = _fraction(im)

    @property
    def real(self) -> Fraction:
        return self.re

    @property
    def imag(self) -> Fraction:
        return self.im

    @staticmethod
    def _coerce(other):
        if isinstance(other, QQi):
            return other
        if isinstance(other, (int, Fraction)):
            return QQi(other, 0)
        if isinstance(other, (float, complex)):
            c = complex(other)
            return QQi(Fraction(c.real), Fraction(c.imag))
        return None

    def __add__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return QQi(self.re + o.re, self.im + o.im)

    __radd__ = __add__

    def __sub__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return QQi(self.re - o.re, self.im - o.im)

    def __rsub__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return o - self

    def __mul__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return QQi(self.re * o.re - self.im * o.im, self.re * o.im + self.im * o.re)

    __rmul__ = __mul__

    def __truediv__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        den = o.re * o.re + o.im * o.im
        if den == 0:
            raise ZeroDivisionError("QQi division by zero")
        return QQi(
            (self.re * o.re + self.im * o.im) / den,
            (self.im * o.re - self.re * o.im) / den,
        )

    def __rtruediv__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return o / self

    def __pow__(self, k: int):
        if not isinstance(k, int):
            return NotImplemented
        if k < 0:
            return QQi(1) / (self ** (-k))
        result, base = QQi(1), self
        while k:
            if k & 1:
                result = result * base
            base = base * base
            k >>= 1
        return result

    def __neg__(self):
        return QQi(-self.re, -self.im)

    def __pos__(self):
        return self

    def conjugate(self):
        return QQi(self.re, -self.im)

    def abs2(self) -> Fraction:
        return self.re * self.re + self.im * self.im

    def __abs__(self) -> float:
        return math.hypot(self.re, self.im)

    def __eq__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return self.re == o.re and self.im == o.im

    def __hash__(self):
        if self.im == 0:
            return hash(self.re)
        return hash((self.re, self.im))

    def __bool__(self):
        return bool(self.re) or bool(self.im)

    def __complex__(self):
        return complex(float(self.re), float(self.im))

    def __repr__(self):
        return f"QQi({self.re}, {self.im})"


def _fraction(x) -> Fraction:
    if isinstance(x, Fraction):
        return x
    if isinstance(x, (int, _RationalABC)):
        return Fraction(x)
    if isinstance(x, float):
        return Fraction(x)
    if isinstance(x, str):
        return Fraction(x)
    if isinstance(x, np.generic):
        return _fraction(x.item())
    raise TypeError(f"cannot represent {x!r} exactly as a rational")


@lru_cache(maxsize=None)
def _mp_context(digits: int) -> mpmath.ctx_mp.MPContext:
    ctx = mpmath.MPContext()
    ctx.dps = digits
    return ctx


class Backend:
    """Scalar arithmetic policy shared by every solver in the package."""

    exact = False

    def scalar(self, x):
        raise NotImplementedError

    def real_scalar(self, x):
        return self.scalar(x)

    def to_complex(self, x) -> complex:
        return complex(x)

    def to_float(self, x) -> float:
        return float(complex(x).real)

    def fsum(self, values: Iterable):
        raise NotImplementedError

    def magnitude(self, x):
        """Comparable size of ``x`` (exact ``|x|^2`` for rationals)."""
        return abs(x)

    @property
    def rtol(self) -> float:
        raise NotImplementedError

    def label(self) -> str:
        raise NotImplementedError

    def __str__(self):
        return self.label()


@dataclass(frozen=True)
class Float64(Backend):
    def scalar(self, x) -> complex:
        return complex(x)

    def real_scalar(self, x) -> float:
        return float(x)

    def fsum(self, values):
        re, im = [], []
        for v in values:
            v = complex(v)
            re.append(v.real)
            im.append(v.imag)
        return complex(math.fsum(re), math.fsum(im))

    @property
    def rtol(self) -> float:
        return 1e-9

    def label(self) -> str:
        return "f64"


@dataclass(frozen=True)
class ExtendedFloat(Backend):
    digits: int = 60

    @property
    def ctx(self):
        return _mp_context(self.digits)

    def scalar(self, x):
        ctx = self.ctx
        if isinstance(x, QQi):
            return ctx.mpc(self.real_scalar(x.re), self.real_scalar(x.im))
        if isinstance(x, Fraction):
            return ctx.mpc(ctx.mpf(x.numerator) / x.denominator)
        return ctx.mpc(x)

    def real_scalar(self, x):
        ctx = self.ctx
        if isinstance(x, Fraction):
            return ctx.mpf(x.numerator) / x.denominator
        return ctx.mpf(x)

    def fsum(self, values):
        return self.ctx.fsum(values)

    @property
    def rtol(self):
        # an mpf, since 10**-(digits-10) underflows a double beyond ~330 digits
        return self.ctx.mpf(10) ** (-(self.digits - 10))

    def label(self) -> str:
        return f"ext:{self.digits}"


@dataclass(frozen=True)
class Rational(Backend):
    exact = True

    def scalar(self, x):
        if isinstance(x, QQi):
            return x.re if x.im == 0 else x
        if isinstance(x, (complex, np.complexfloating)):
            x = complex(x)
            if x.imag == 0:
                return Fraction(x.real)
            return QQi(Fraction(x.real), Fraction(x.imag))
        if isinstance(x, (mpmath.mpf, mpmath.mpc)) or type(x).__name__ in ("mpf", "mpc"):
            raise TypeError("extended-precision floats have no exact rational image here")
        return _fraction(x)

    def real_scalar(self, x):
        return _fraction(x)

    def fsum(self, values):
        total = Fraction(0)
        for v in values:
            total = total + v
        return total

    def magnitude(self, x):
        return x.abs2() if isinstance(x, QQi) else x * x

    def to_float(self, x) -> float:
        return float(x.real) if isinstance(x, QQi) else float(x)

    @property
    def rtol(self) -> float:
        return 0.0

    def label(self) -> str:
        return "rational"


PrecisionBackend = Backend

DEFAULT_EXTENDED_DIGITS = 60


def parse_backend(spec) -> Backend:
    """Turn ``None``, a label (``f64``, ``ext:60``, ``rational``) or a backend into a backend."""
    if isinstance(spec, Backend):
        return spec
    if spec is None:
        return Float64()
    s = str(spec).strip().lower()
    if s in ("f64", "float64", "float"):
        return Float64()
    if s in ("rational", "exact", "q"):
        return Rational()
    if s.startswith("ext"):
        _, _, digits = s.partition(":")
        return ExtendedFloat(int(digits) if digits else DEFAULT_EXTENDED_DIGITS)
    raise ValueError(f"unknown backend {spec!r}; use f64, ext[:digits] or rational")


def backend_from_env(default=None) -> Backend | None:
    """Backend named by ``$OPA_BACKEND``, else ``default`` (``None`` stays ``None``)."""
    spec = os.environ.get("OPA_BACKEND") or default
    return None if spec is None else parse_backend(spec)


def is_simple_rational(x, max_den: int = 1 << 20) -> bool:
    """True when ``x`` has a small exact rational (or Gaussian rational) value."""
    if isinstance(x, (int, Fraction)):
        return True
    if isinstance(x, QQi):
        return True
    try:
        c = complex(x)
    except TypeError:
        return False
    for part in (c.real, c.imag):
        if not math.isfinite(part):
            return False
        if Fraction(part).denominator > max_den:
            return False
    return True


def auto_backend(integer_weight: bool, values: Iterable, dim: int, purpose: str = "solve") -> Backend:
    """Default backend choice.

    Rational for integer power weights with small rational data and ``dim <= 8``,
    extended precision for asymptotic sweeps, machine floats otherwise.
    """
    if purpose == "asymptotic":
        return ExtendedFloat(DEFAULT_EXTENDED_DIGITS)
    if purpose == "solve" and integer_weight and dim <= 8 and all(is_simple_rational(v) for v in values):
        return Rational()
    return Float64()


# --------------------------------------------------------------------------
# helpers


def as_matrix(A, backend: Backend) -> list[list]:
    rows = [list(r) for r in A]
    n = len(rows)
    if any(len(r) != len(rows[0]) for r in rows):
        raise ValueError("ragged matrix")
    return [[backend.scalar(x) for x in r] for r in rows] if n else []


def _square(M: list[list]) -> int:
    n = len(M)
    if any(len(r) != n for r in M):
        raise ValueError(f"matrix must be square, got {n}x{len(M[0]) if M else 0}")
    return n


def _max_entry(M, backend: Backend):
    return max((backend.magnitude(x) for r in M for x in r), default=0)


def _diag_scaling(M: list[list], backend: Backend):
    """``s_i = |M_ii|^(-1/2)`` when every diagonal entry is real and positive, else ``None``.

    Gram and moment matrices mix entries of wildly different sizes (``|z|^(2N)``
    next to ``N``); pivot thresholds are only meaningful on ``S M S``, whose
    diagonal is all ones.  Exact arithmetic needs no scaling.
    """
    if backend.exact or not M:
        return None
    out = []
    for i in range(len(M)):
        x = M[i][i]
        if isinstance(backend, Float64):
            c = complex(x)
            re, im = c.real, c.imag
        else:
            re, im = backend.ctx.re(x), backend.ctx.im(x)
        if not re > 0 or abs(im) > re * 1e-8:
            return None
        out.append(1 / math.sqrt(re) if isinstance(backend, Float64) else 1 / backend.ctx.sqrt(re))
    return out


def _scaled(M: list[list], s) -> list[list]:
    return [[s[i] * x * s[j] for j, x in enumerate(row)] for i, row in enumerate(M)]


def _to_numpy(M, backend: Backend) -> np.ndarray:
    return np.array([[backend.to_complex(x) for x in r] for r in M], dtype=complex)


def condition_estimate(A, backend: Backend | None = None) -> float:
    backend = parse_backend(backend)
    M = _to_numpy(as_matrix(A, backend), backend)
    with np.errstate(all="ignore"):
        try:
            return float(np.linalg.cond(M))
        except np.linalg.LinAlgError:
            return math.inf


def _generic_lu(M: list[list], backend: Backend):
    """In-place LU with partial pivoting. Returns (LU, perm, sign)."""
    n = _square(M)
    LU = [row[:] for row in M]
    perm = list(range(n))
    sign = 1
    scale = _max_entry(LU, backend)
    if backend.exact:
        threshold = 0
    else:
        # magnitudes in extended precision are mpf; compare in that type
        threshold = scale * (10 ** (-(backend.digits - 3)))
    for k in range(n):
        p = max(range(k, n), key=lambda i: backend.magnitude(LU[i][k]))
        pmag = backend.magnitude(LU[p][k])
        if pmag == 0 or pmag <= threshold:
            raise SingularMatrix(
                f"pivot {k} is numerically zero (backend {backend.label()})",
                condition=condition_estimate(M, backend) if not backend.exact else math.inf,
            )
        if p != k:
            LU[k], LU[p] = LU[p], LU[k]
            perm[k], perm[p] = perm[p], perm[k]
            sign = -sign
        piv = LU[k][k]
        for i in range(k + 1, n):
            f = LU[i][k] / piv
            LU[i][k] = f
            if f:
                row_i, row_k = LU[i], LU[k]
                for j in range(k + 1, n):
                    row_i[j] = row_i[j] - f * row_k[j]
    return LU, perm, sign


def _float_lu(M: np.ndarray):
    n = M.shape[0]
    if n == 0:
        return M, np.arange(0)
    if not np.all(np.isfinite(M)):
        raise PrecisionExhausted("matrix has non-finite entries (float64 overflow); use an extended backend")
    with warnings.catch_warnings():
        # an exactly zero pivot is reported below as SingularMatrix
        warnings.simplefilter("ignore", scipy.linalg.LinAlgWarning)
        lu, piv = scipy.linalg.lu_factor(M, check_finite=False)
    threshold = 1e3 * _EPS * np.max(np.abs(M))
    if np.any(np.abs(np.diag(lu)) < threshold):
        raise SingularMatrix(
            "numerically singular matrix (pivot below threshold)",
            condition=float(np.linalg.cond(M)),
        )
    return lu, piv


def solve(A, b: Sequence, backend: Backend | str | None = None) -> list:
    """Solve ``A x = b`` with pivoted elimination in the given backend."""
    backend = parse_backend(backend)
    M = as_matrix(A, backend)
    n = _square(M)
    if len(b) != n:
        raise ValueError(f"right-hand side has length {len(b)}, expected {n}")
    rhs = [backend.scalar(v) for v in b]
    s = _diag_scaling(M, backend)
    if s is not None:
        # solve (S M S) y = S b, then x = S y
        x = _solve_unscaled(_scaled(M, s), [si * v for si, v in zip(s, rhs)], backend)
        return [si * v for si, v in zip(s, x)]
    return _solve_unscaled(M, rhs, backend)


def _solve_unscaled(M: list[list], rhs: list, backend: Backend) -> list:
    n = len(M)
    if isinstance(backend, Float64):
        Mn = np.array(M, dtype=complex)
        lu, piv = _float_lu(Mn)
        x = scipy.linalg.lu_solve((lu, piv), np.array(rhs, dtype=complex), check_finite=False)
        _check_residual(Mn, x, np.array(rhs, dtype=complex))
        return [complex(v) for v in x]
    LU, perm, _ = _generic_lu(M, backend)
    y = [rhs[p] for p in perm]
    for i in range(n):
        s = y[i]
        for j in range(i):
            s = s - LU[i][j] * y[j]
        y[i] = s
    for i in reversed(range(n)):
        s = y[i]
        for j in range(i + 1, n):
            s = s - LU[i][j] * y[j]
        y[i] = s / LU[i][i]
    return y


def _check_residual(M: np.ndarray, x: np.ndarray, b: np.ndarray) -> None:
    r = np.max(np.abs(M @ x - b), initial=0.0)
    scale = np.max(np.abs(M), initial=0.0) * np.max(np.abs(x), initial=0.0) + np.max(np.abs(b), initial=0.0)
    if not np.isfinite(r) or r > 1e3 * M.shape[0] * _EPS * scale:
        raise PrecisionExhausted(f"solve residual {r:.3e} exceeds backward-error bound")


def matvec(A, x: Sequence, backend: Backend | str | None = None) -> list:
    backend = parse_backend(backend)
    M = as_matrix(A, backend)
    return [backend.fsum(a * v for a, v in zip(row, x)) for row in M]


def determinant(A, backend: Backend | str | None = None):
    """LU determinant; 0 for a singular matrix."""
    backend = parse_backend(backend)
    M = as_matrix(A, backend)
    n = _square(M)
    if n == 0:
        return backend.scalar(1)
    s = _diag_scaling(M, backend)
    if s is not None:
        # det M = det(S M S) / prod s_i^2
        det = _determinant_unscaled(_scaled(M, s), backend)
        for si in s:
            det = det / (si * si)
        return det
    return _determinant_unscaled(M, backend)


def _determinant_unscaled(M: list[list], backend: Backend):
    n = len(M)
    if isinstance(backend, Float64):
        Mn = np.array(M, dtype=complex)
        if not np.all(np.isfinite(Mn)):
            raise PrecisionExhausted("matrix has non-finite entries")
        lu, piv = scipy.linalg.lu_factor(Mn, check_finite=False)
        sign = (-1) ** int(np.sum(piv != np.arange(n)))
        return complex(sign * np.prod(np.diag(lu)))
    try:
        LU, _, sign = _generic_lu(M, backend)
    except SingularMatrix:
        return backend.scalar(0)
    det = backend.scalar(sign)
    for i in range(n):
        det = det * LU[i][i]
    return det


def _minor(M, row: int, col: int):
    return [[x for j, x in enumerate(r) if j != col] for i, r in enumerate(M) if i != row]


def inverse_entry(A, i: int, j: int, backend: Backend | str | None = None):
    """Entry ``(i, j)`` (0-based) of ``A^{-1}`` by Cramer's rule."""
    backend = parse_backend(backend)
    M = as_matrix(A, backend)
    n = _square(M)
    if not (0 <= i < n and 0 <= j < n):
        raise IndexError(f"entry ({i}, {j}) outside {n}x{n} matrix")
    det = determinant(M, backend)
    if det == 0 or (not backend.exact and backend.magnitude(det) == 0):
        raise SingularMatrix("matrix is singular", condition=math.inf)
    if isinstance(backend, Float64):
        sc = _diag_scaling(M, backend)
        _float_lu(np.array(M if sc is None else _scaled(M, sc), dtype=complex))
    cof = determinant(_minor(M, j, i), backend) if n > 1 else backend.scalar(1)
    sign = -1 if (i + j) % 2 else 1
    return sign * cof / det


def inverse(A, backend: Backend | str | None = None) -> list[list]:
    backend = parse_backend(backend)
    M = as_matrix(A, backend)
    n = _square(M)
    cols = []
    for j in range(n):
        e = [backend.scalar(1 if i == j else 0) for i in range(n)]
        cols.append(solve(M, e, backend))
    return [[cols[j][i] for j in range(n)] for i in range(n)]


# --------------------------------------------------------------------------
# positive-definiteness certificate


def _real(x, backend: Backend):
    if isinstance(backend, Float64):
        return complex(x).real
    if isinstance(backend, Rational):
        return x.re if isinstance(x, QQi) else Fraction(x)
    return backend.ctx.re(x)


def _abs2(x, backend: Backend):
    if isinstance(backend, Rational):
        return backend.magnitude(x)
    if isinstance(backend, Float64):
        x = complex(x)
        return x.real * x.real + x.imag * x.imag
    return backend.ctx.re(x * backend.ctx.conj(x))


def _l1(x, backend: Backend):
    """|Re x| + |Im x|, an upper bound for |x| available in every backend."""
    if isinstance(backend, Rational):
        return abs(x.re) + abs(x.im) if isinstance(x, QQi) else abs(x)
    if isinstance(backend, Float64):
        x = complex(x)
        return abs(x.real) + abs(x.imag)
    ctx = backend.ctx
    return abs(ctx.re(x)) + abs(ctx.im(x))


def check_hermitian(M: list[list], backend: Backend) -> None:
    n = _square(M)
    scale = max((_l1(x, backend) for r in M for x in r), default=0)
    if backend.exact:
        tol = 0
    elif isinstance(backend, Float64):
        tol = 1e3 * _EPS * scale
    else:
        tol = scale * backend.ctx.mpf(10) ** (-(backend.digits - 5))
    for i in range(n):
        for j in range(i, n):
            if _l1(M[i][j] - M[j][i].conjugate(), backend) > tol:
                raise NotHermitian(f"entries ({i},{j}) and ({j},{i}) are not conjugate")


def is_positive_definite(A, backend: Backend | str | None = None, shift=0) -> bool:
    """LDL^H factorization of ``A - shift*I``; succeeds iff positive definite."""
    backend = parse_backend(backend)
    M = as_matrix(A, backend)
    _square(M)
    return _ldl_positive(M, _as_backend_real(shift, backend), backend)


def _ldl_positive(M: list[list], shift, backend: Backend) -> bool:
    n = len(M)
    D = []
    L = [[None] * n for _ in range(n)]
    for j in range(n):
        d = _real(M[j][j], backend) - shift
        for k in range(j):
            d = d - _abs2(L[j][k], backend) * D[k]
        if not d > 0:
            return False
        D.append(d)
        for i in range(j + 1, n):
            s = M[i][j]
            for k in range(j):
                s = s - L[i][k] * L[j][k].conjugate() * D[k]
            L[i][j] = s / d
    return True


def eigenvalue_bracket(A, backend: Backend | str | None = None, rtol: float = 1e-8):
    """Bracket ``(lo, hi)`` on the smallest eigenvalue of a Hermitian matrix.

    ``A - lo*I`` admits an LDL^H factorization with positive pivots (so
    ``lambda_min > lo``) and ``A - hi*I`` does not.  Bisection stops once
    ``hi - lo <= rtol*max(|lo|, |hi|)`` or the width reaches the working
    precision times ``||A||``.
    """
    backend = parse_backend(backend)
    M = as_matrix(A, backend)
    n = _square(M)
    if n == 0:
        raise ValueError("empty matrix")
    check_hermitian(M, backend)
    if isinstance(backend, Rational):
        return _exact_bracket(M, rtol)
    diag = [_real(M[i][i], backend) for i in range(n)]
    zero = _as_backend_real(0, backend)
    radii = [sum((_l1(M[i][j], backend) for j in range(n) if j != i), zero) for i in range(n)]
    norm = max(d + r for d, r in zip((abs(x) for x in diag), radii))
    if norm == 0:
        return 0.0, 0.0
    hi = min(diag)
    lo = min(d - r for d, r in zip(diag, radii)) - norm * _as_backend_real(rtol, backend)
    while not _ldl_positive(M, lo, backend):
        lo = lo - norm
    # relative to the eigenvalue itself, with an absolute floor near roundoff
    tol = _as_backend_real(rtol, backend)
    floor = norm * _as_backend_real(_unit_roundoff(backend), backend) * 16
    while hi - lo > max(tol * max(abs(lo), abs(hi)), floor):
        mid = (lo + hi) / 2
        if _ldl_positive(M, mid, backend):
            lo = mid
        else:
            hi = mid
    return float(lo), float(hi)


def _exact_bracket(M: list[list], rtol: float):
    """Bisect in 60-digit floats, then confirm both ends with exact factorizations.

    Exact bisection is slow (denominators grow at every step); a single exact
    LDL^H at each end keeps the bracket rigorous.
    """
    q = Rational()
    lo, hi = eigenvalue_bracket(M, ExtendedFloat(DEFAULT_EXTENDED_DIGITS), rtol)
    norm = max(sum(_l1(x, q) for x in row) for row in M)
    step = max(_fraction(hi) - _fraction(lo), _fraction(rtol) * norm, Fraction(1, 10**30))
    lo_q, hi_q = _fraction(lo), _fraction(hi)
    while not _ldl_positive(M, lo_q, q):
        lo_q -= step
        step *= 2
    step = max(_fraction(hi) - _fraction(lo), Fraction(1, 10**30))
    while _ldl_positive(M, hi_q, q):
        hi_q += step
        step *= 2
    lo_f = float(lo_q)
    if lo_f > lo_q:
        lo_f = math.nextafter(lo_f, -math.inf)
    return lo_f, float(hi_q)


def _unit_roundoff(backend: Backend) -> float:
    if isinstance(backend, ExtendedFloat):
        return 10.0 ** (-backend.digits)
    return 2.0 ** -52


def _as_backend_real(x, backend: Backend):
    if isinstance(backend, Rational):
        return _fraction(x)
    if isinstance(backend, Float64):
        return float(x)
    return backend.real_scalar(x)


def min_eigenvalue_hermitian(A, backend: Backend | str | None = None, rtol: float = 1e-8) -> float:
    """Certified lower end of the smallest-eigenvalue bracket."""
    return eigenvalue_bracket(A, backend, rtol)[0]


__all__ = [
    "Backend",
    "ExtendedFloat",
    "Float64",
    "OPAError",
    "PrecisionBackend",
    "QQi",
    "Rational",
    "auto_backend",
    "backend_from_env",
    "condition_estimate",
    "determinant",
    "eigenvalue_bracket",
    "inverse",
    "inverse_entry",
    "is_positive_definite",
    "matvec",
    "min_eigenvalue_hermitian",
    "parse_backend",
    "solve",
]
