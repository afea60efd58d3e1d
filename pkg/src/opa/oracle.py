"""Brute-force least squares for ``min ||g - p f||_omega`` over ``deg p <= n``.

Works directly in the monomial basis: the normal matrix has entries
``G[j][k] = <z^k f, z^j f>_omega = sum_m omega_m f(m-k) conj(f(m-j))`` and the
right-hand side is ``<g, z^j f>_omega``.  Nothing here touches the kernel
machinery, so agreement with the closed-form solvers is a genuine check.
"""

from __future__ import annotations

from dataclasses import dataclass

from . import linalg
from .errors import ZeroAtOrigin
from .linalg import Backend, ExtendedFloat, Float64, auto_backend, parse_backend
from .polynomials import ComplexPolynomial, convolve
from .solution import ApproximantSolution, ProjectionResult
from .weights import WeightSequence


@dataclass(frozen=True)
class NormalSystem:
    G: tuple
    rhs: tuple
    n: int
    backend: Backend


def _coeffs(p) -> list:
    return list(p.coeffs if isinstance(p, ComplexPolynomial) else p)


def _backend_for(backend, omega: WeightSequence, values: list, dim: int) -> Backend:
    if backend is None or (isinstance(backend, str) and backend.lower() == "auto"):
        return auto_backend(omega.is_integer_power, values, dim)
    return parse_backend(backend)


def _conj(x):
    return x.conjugate()


def build_normal_system(omega: WeightSequence, f, g, n: int, backend: Backend) -> NormalSystem:
    fc = [backend.scalar(c) for c in _coeffs(f)]
    gc = [backend.scalar(c) for c in _coeffs(g)]
    d = len(fc) - 1
    top = max(n + d, len(gc) - 1)
    w = omega.values(top, backend)
    G = [[None] * (n + 1) for _ in range(n + 1)]
    for j in range(n + 1):
        for k in range(j, n + 1):
            # z^k f occupies indices k..k+d, z^j f occupies j..j+d
            lo, hi = max(j, k), min(j, k) + d
            s = backend.fsum(w[m] * fc[m - k] * _conj(fc[m - j]) for m in range(lo, hi + 1)) if lo <= hi else backend.scalar(0)
            G[j][k] = s
            G[k][j] = _conj(s)
    rhs = []
    for j in range(n + 1):
        terms = [w[m] * gc[m] * _conj(fc[m - j]) for m in range(j, min(j + d, len(gc) - 1) + 1)]
        rhs.append(backend.fsum(terms) if terms else backend.scalar(0))
    return NormalSystem(tuple(tuple(r) for r in G), tuple(rhs), n, backend)


def _weighted_norm_sq(coeffs: list, omega: WeightSequence, backend: Backend):
    w = omega.values(len(coeffs) - 1, backend)
    if backend.exact:
        return sum((backend.magnitude(c) * w[k] for k, c in enumerate(coeffs)), start=0)
    return backend.fsum(abs(c) ** 2 * w[k] for k, c in enumerate(coeffs))


def oracle_project(omega: WeightSequence, f, g, n: int, backend=None) -> ProjectionResult:
    """``g - q f`` for the best ``q`` of degree ``<= n``; ``A`` holds the coefficients of ``q``."""
    fc_raw = _coeffs(f)
    gc_raw = _coeffs(g) or [0]
    if n < 0:
        raise ValueError("n must be >= 0")
    if not fc_raw or fc_raw[0] == 0:
        raise ZeroAtOrigin("f(0) = 0: every approximant vanishes at the origin")
    b = _backend_for(backend, omega, fc_raw + gc_raw, n + 1)
    sysn = build_normal_system(omega, fc_raw, gc_raw, n, b)
    c = linalg.solve([list(r) for r in sysn.G], list(sysn.rhs), b)
    fc = [b.scalar(x) for x in fc_raw]
    qf = convolve(c, fc)
    d = len(fc) - 1
    length = max(n + d + 1, len(gc_raw))
    residual = [b.scalar(0)] * length
    for k, v in enumerate(gc_raw):
        residual[k] = residual[k] + b.scalar(v)
    for k, v in enumerate(qf):
        residual[k] = residual[k] - v
    dist = _weighted_norm_sq(residual, omega, b)
    if isinstance(b, ExtendedFloat):
        dist = b.ctx.re(dist)
    elif isinstance(b, Float64):
        dist = complex(dist).real
    return ProjectionResult(tuple(c), tuple(residual), dist)


def oracle_solve(omega: WeightSequence, f, n: int, backend=None) -> ApproximantSolution:
    """Optimal approximant to ``1/f`` by direct least squares."""
    fpoly = f if isinstance(f, ComplexPolynomial) else ComplexPolynomial(f)
    proj = oracle_project(omega, fpoly, [1], n, backend)
    b = _backend_for(backend, omega, list(fpoly.coeffs) + [1], n + 1)
    return ApproximantSolution(
        n=n,
        d=fpoly.degree,
        zeros=(),
        A=(),
        residual_coeffs=proj.residual_coeffs,
        pn_coeffs=ComplexPolynomial(proj.A),
        distance_sq=proj.distance_sq,
        omega=omega,
        backend=b,
        leading=b.scalar(fpoly.leading),
        method="oracle",
        pn_method="normal-equations",
        extra={"f": tuple(b.scalar(c) for c in fpoly.coeffs)},
    )
