"""Closed-form projections onto ``P_n * f`` for f with simple zeros.

The orthogonal complement of ``P_n * f`` inside ``P_{n+d}`` is spanned by the
truncated kernels ``k_{n+d}(., z_i)`` at the zeros of ``f``.  Everything
therefore reduces to the ``d x d`` Gram matrix ``E[l][m] = k_{n+d}(z_l, z_m)``.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Iterable, Sequence

from . import linalg
from .errors import (
    InconsistentResidual,
    NotInterior,
    NotUnimodular,
    PrecisionExhausted,
)
from .linalg import Backend, ExtendedFloat, Float64, auto_backend, parse_backend
from .polynomials import ComplexPolynomial, ZeroSet, evaluate, from_zeros, quotient_pn, recover_pn
from .solution import ApproximantSolution, ProjectionResult
from .weights import WeightSequence, full_kernel, kernel_partial_sum, reciprocal_weight_sum

log = logging.getLogger(__name__)


def resolve_backend(backend, omega: WeightSequence, values: Iterable, dim: int, purpose: str = "solve") -> Backend:
    """``None``/``"auto"`` picks a default; anything else goes through :func:`parse_backend`."""
    if backend is None or (isinstance(backend, str) and backend.lower() == "auto"):
        return auto_backend(omega.is_integer_power, list(values), dim, purpose)
    return parse_backend(backend)


def _as_zeroset(zeros) -> ZeroSet:
    return zeros if isinstance(zeros, ZeroSet) else ZeroSet(zeros)


@dataclass(frozen=True)
class GramSystem:
    n: int
    omega: WeightSequence
    zeros: ZeroSet
    E: tuple
    backend: Backend

    @property
    def d(self) -> int:
        return len(self.zeros)

    @property
    def m(self) -> int:
        """Kernel truncation index ``n + d``."""
        return self.n + self.d

    def zeros_in_backend(self) -> list:
        return [self.backend.scalar(z) for z in self.zeros]

    def matrix(self) -> list[list]:
        return [list(r) for r in self.E]


def build_gram(omega: WeightSequence, zeros, n: int, backend=None) -> GramSystem:
    """Assemble ``E[l][m] = k_{n+d}(z_l, z_m)``."""
    if n < 0:
        raise ValueError("n must be >= 0")
    zs = _as_zeroset(zeros)
    b = resolve_backend(backend, omega, zs, len(zs))
    d = len(zs)
    zb = [b.scalar(z) for z in zs]
    E = [[None] * d for _ in range(d)]
    for l in range(d):
        for m in range(l, d):
            v = kernel_partial_sum(omega, n + d, zb[l], zb[m], b)
            E[l][m] = v
            E[m][l] = v.conjugate()
    return GramSystem(n, omega, zs, tuple(tuple(r) for r in E), b)


def _real_checked(value, backend: Backend):
    """Real part of a mathematically real quantity; raises if the imaginary drift is too large."""
    if backend.exact:
        if value.imag != 0:
            raise PrecisionExhausted(f"exact distance has imaginary part {value.imag}")
        return value.real
    # the same absolute-plus-relative 1e-10 rule in every inexact backend: the drift
    # grows with the conditioning of E, which extra digits do not remove
    if isinstance(backend, Float64):
        v = complex(value)
        re, im = v.real, v.imag
    else:
        ctx = backend.ctx
        re, im = ctx.re(value), ctx.im(value)
    tol = 1e-10 * (1 + abs(complex(value)))
    if abs(im) >= tol:
        raise PrecisionExhausted(
            f"squared distance has imaginary part {float(im):.3e}; the Gram solve lost precision"
        )
    return re


def _residual_from_A(sys: GramSystem, A: Sequence) -> list:
    b = sys.backend
    recips = sys.omega.reciprocals(sys.m, b)
    conj_z = [z.conjugate() for z in sys.zeros_in_backend()]
    powers = [b.scalar(1)] * sys.d
    out = []
    for k in range(sys.m + 1):
        s = b.fsum(A[i] * powers[i] for i in range(sys.d))
        out.append(s * recips[k])
        powers = [p * c for p, c in zip(powers, conj_z)]
    return out


def project(sys: GramSystem, g) -> ProjectionResult:
    """``g - P_n(g)`` for a polynomial ``g`` of degree at most ``d``."""
    gp = g if isinstance(g, ComplexPolynomial) else ComplexPolynomial(g)
    if gp.degree > sys.d:
        raise ValueError(f"deg(g) = {gp.degree} exceeds deg(f) = {sys.d}")
    if sys.n < max(gp.degree, 0):
        raise ValueError(f"n = {sys.n} must be >= deg(g) = {gp.degree}")
    b = sys.backend
    gc = [b.scalar(c) for c in gp.coeffs]
    gZ = [evaluate(gc, z) if gc else b.scalar(0) for z in sys.zeros_in_backend()]
    A = linalg.solve(sys.matrix(), gZ, b)
    residual = _residual_from_A(sys, A)
    dist = b.fsum(gz.conjugate() * a for gz, a in zip(gZ, A))
    return ProjectionResult(tuple(A), tuple(residual), _real_checked(dist, b))


def solve_optimal(sys: GramSystem, leading=1, tol: float | None = None) -> ApproximantSolution:
    """Optimal approximant to ``1/f`` with ``f = leading * prod (z - z_i)``."""
    b = sys.backend
    proj = project(sys, [1])
    total = b.fsum(proj.A)
    total_re = _real_checked(total, b)
    diff = total_re - proj.distance_sq
    if (b.exact and diff != 0) or (not b.exact and abs(complex(diff)) > _tol(b) * (1 + abs(complex(total_re)))):
        raise PrecisionExhausted("sum of A differs from v0 E^-1 v0^t")
    f = from_zeros(sys.zeros_in_backend(), b.scalar(leading))
    rtol = _recovery_tol(sys) if tol is None else tol
    try:
        pn = recover_pn(list(proj.residual_coeffs), f, sys.n, tol=rtol)
        pn_method = "series"
    except InconsistentResidual:
        if b.exact or not sys.zeros.any_interior:
            raise
        # interior zeros blow up the Taylor series of 1/f; divide factor by factor instead
        log.debug("series recovery of p_n unstable; using linear-factor division")
        pn = quotient_pn(list(proj.residual_coeffs), f, sys.zeros_in_backend(), sys.n, tol=rtol)
        pn_method = "division"
    return ApproximantSolution(
        n=sys.n,
        d=sys.d,
        zeros=tuple(sys.zeros_in_backend()),
        A=proj.A,
        residual_coeffs=proj.residual_coeffs,
        pn_coeffs=pn,
        distance_sq=proj.distance_sq,
        omega=sys.omega,
        backend=b,
        leading=b.scalar(leading),
        method="gram",
        pn_method=pn_method,
    )


def _tol(b: Backend) -> float:
    if b.exact:
        return 0.0
    if isinstance(b, ExtendedFloat):
        return b.rtol
    return 1e-9


def _recovery_tol(sys: GramSystem) -> float:
    """Tolerance for the ``p_n f + r = 1`` check: working precision times cond(E), capped at 1e-9."""
    b = sys.backend
    if not isinstance(b, ExtendedFloat):
        return _tol(b)
    ctx = b.ctx
    E = ctx.matrix(sys.matrix())
    try:
        kappa = ctx.mnorm(E, 1) * ctx.mnorm(ctx.inverse(E), 1)
    except ZeroDivisionError:
        return 1e-9
    return float(min(ctx.mpf("1e-9"), b.rtol * max(kappa, 1)))


def optimal_approximant(omega: WeightSequence, zeros, n: int, leading=1, backend=None) -> ApproximantSolution:
    """Convenience wrapper: :func:`build_gram` followed by :func:`solve_optimal`."""
    return solve_optimal(build_gram(omega, zeros, n, backend), leading)


def interior_distance(omega: WeightSequence, zeros, tol: float = 1e-12, backend=None):
    """Squared distance from 1 to the invariant subspace ``[f]`` for zeros inside the disc.

    The Gramian of full kernels at the zeros has entries ``k(z_l, z_m)``
    (reproducing property), and the distance is ``v0 K^-1 v0^t``.
    """
    zs = _as_zeroset(zeros)
    outside = [complex(z) for z in zs if abs(complex(z)) >= 1]
    if outside:
        raise NotInterior(f"zeros {outside} are not inside the unit disc")
    b = parse_backend(backend)
    d = len(zs)
    K = [[None] * d for _ in range(d)]
    for l in range(d):
        for m in range(l, d):
            v = full_kernel(omega, zs[l], zs[m], tol, b)
            K[l][m] = v
            K[m][l] = v.conjugate()
    A = linalg.solve(K, [b.scalar(1)] * d, b)
    return _real_checked(b.fsum(A), b)


def inverse_entry_bounds(sys: GramSystem) -> list[list[float]]:
    """``|(E^-1)_{ij}| * sum_{k<=n} 1/omega_k``, bounded in n when all zeros are unimodular."""
    if not sys.zeros.all_unimodular:
        bad = [complex(z) for z in sys.zeros if not sys.zeros.on_circle(z)]
        raise NotUnimodular(f"zeros {bad} are not on the unit circle")
    inv = linalg.inverse(sys.matrix(), sys.backend)
    s = reciprocal_weight_sum(sys.omega, sys.n)
    return [[abs(complex(x)) * s for x in row] for row in inv]


def normalized_determinant(sys: GramSystem, extra_power: int | None = None) -> float:
    """``det E / [(n+d+1)^(d1+extra) * prod |z_l|^(2(n+d+1))]``.

    ``extra_power`` defaults to ``d`` for the Bergman weight and 0 otherwise.
    """
    b = sys.backend
    if extra_power is None:
        extra_power = sys.d if (sys.omega.is_power and float(sys.omega.alpha) == -1.0) else 0
    N = sys.n + sys.d + 1
    det = linalg.determinant(sys.matrix(), b)
    if isinstance(b, ExtendedFloat):
        ctx = b.ctx
        denom = ctx.mpf(N) ** (sys.zeros.d1 + extra_power)
        for z in sys.zeros_in_backend():
            denom *= abs(z) ** (2 * N)
        return float(ctx.re(det) / denom)
    if b.exact:
        denom = N ** (sys.zeros.d1 + extra_power)
        for z in sys.zeros_in_backend():
            denom *= b.magnitude(z) ** N
        return float(det.real / denom)
    denom = float(N) ** (sys.zeros.d1 + extra_power)
    ratio = complex(det).real / denom
    for z in sys.zeros:
        ratio /= abs(complex(z)) ** (2 * N)
    return ratio


def b_matrix(zetas: Sequence, backend=None) -> list[list]:
    """``B[l][m] = 1 / (zeta_l conj(zeta_m) - 1)`` for points outside the closed disc.

    This is the limit shape of the Gram matrix for exterior zeros (rescaled);
    it is Hermitian positive definite whenever every ``|zeta| > 1``.
    """
    b = parse_backend(backend)
    zs = [b.scalar(z) for z in zetas]
    inside = [complex(z) for z in zs if abs(complex(z)) <= 1]
    if inside:
        raise ValueError(f"points {inside} are not outside the closed unit disc")
    one = b.scalar(1)
    return [[one / (zl * zm.conjugate() - one) for zm in zs] for zl in zs]
