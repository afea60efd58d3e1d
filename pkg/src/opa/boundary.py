"""Evaluating ``1 - p_n f`` on the closed disc and tracking its decay in ``n``.

Suprema are estimated by sampling (4096 boundary points plus a 128 x 128
polar grid by default), so they are lower bounds for the true supremum.
"""

from __future__ import annotations

import csv
import io
import json
import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from . import gram, multiplicity
from .errors import EmptyCompact, OutOfDomain, PrecisionExhausted, SingularMatrix
from .linalg import ExtendedFloat, Float64, parse_backend
from .polynomials import ComplexPolynomial, ZeroSet, parse_complex_list
from .solution import ApproximantSolution
from .weights import Monotone, WeightSequence, kernel_closed_form, kernel_partial_sum, reciprocal_weight_sum

log = logging.getLogger(__name__)

DEFAULT_BOUNDARY_POINTS = 4096
DEFAULT_GRID = 128
DEFAULT_EXCLUSION = 0.1
_DISC_SLACK = 1e-12


# --------------------------------------------------------------------------
# compact sets


@dataclass(frozen=True)
class CompactSampler:
    """A compact subset of the closed unit disc, minus exclusion balls.

    ``kind`` is one of ``"disc"``, ``"arc"``, ``"points"`` or ``"union"``.
    """

    kind: str
    radius: float = 1.0
    boundary_points: int = DEFAULT_BOUNDARY_POINTS
    grid: int = DEFAULT_GRID
    center_angle: float = 0.0
    half_width: float = math.pi
    points: tuple = ()
    parts: tuple = ()
    exclusion: tuple = ()

    def __post_init__(self):
        if self.kind not in ("disc", "arc", "points", "union"):
            raise ValueError(f"unknown compact kind {self.kind!r}")
        if self.kind == "disc" and not (0 <= self.radius <= 1):
            raise OutOfDomain(f"disc radius must lie in [0, 1], got {self.radius}")
        for z in self.points:
            if abs(z) > 1 + _DISC_SLACK:
                raise OutOfDomain(f"sample point {z} lies outside the closed unit disc")
            for c, r in self.exclusion:
                if abs(z - c) < r:
                    raise OutOfDomain(f"sample point {z} lies within {r} of the excluded point {c}")

    def excluding(self, balls: Iterable[tuple[complex, float]]) -> "CompactSampler":
        balls = tuple((complex(c), float(r)) for c, r in balls)
        parts = tuple(p.excluding(balls) for p in self.parts)
        return CompactSampler(self.kind, self.radius, self.boundary_points, self.grid, self.center_angle,
                              self.half_width, self.points, parts, self.exclusion + balls)

    def avoiding_zeros(self, zeros: Iterable, radius: float = DEFAULT_EXCLUSION) -> "CompactSampler":
        """Exclude balls around the zeros, and around ``1/conj(z)`` for zeros outside the disc."""
        balls = []
        for z in zeros:
            z = complex(z)
            balls.append((z, radius))
            if abs(z) > 1:
                balls.append((1 / z.conjugate(), radius))
        return self.excluding(balls)

    def _raw(self) -> np.ndarray:
        if self.kind == "points":
            return np.array(self.points, dtype=complex)
        if self.kind == "union":
            chunks = [p._raw() for p in self.parts]
            return np.concatenate(chunks) if chunks else np.zeros(0, dtype=complex)
        if self.kind == "arc":
            t = np.linspace(self.center_angle - self.half_width, self.center_angle + self.half_width,
                            self.boundary_points)
            return np.exp(1j * t)
        theta = 2 * np.pi * np.arange(self.boundary_points) / self.boundary_points
        ring = self.radius * np.exp(1j * theta)
        radii = np.linspace(0.0, self.radius, self.grid)
        angles = 2 * np.pi * np.arange(self.grid) / self.grid
        polar = (radii[:, None] * np.exp(1j * angles)[None, :]).ravel()
        return np.concatenate([ring, polar])

    def samples(self) -> np.ndarray:
        z = self._raw()
        keep = np.abs(z) <= 1 + _DISC_SLACK
        for c, r in self.exclusion:
            keep &= np.abs(z - c) >= r
        z = z[keep]
        if z.size == 0:
            raise EmptyCompact("compact set has no sample points after exclusions")
        return z


def Disc(radius: float = 1.0, boundary_points: int = DEFAULT_BOUNDARY_POINTS, grid: int = DEFAULT_GRID) -> CompactSampler:
    return CompactSampler("disc", radius=radius, boundary_points=boundary_points, grid=grid)


def Arc(center_angle: float, half_width: float, points: int = DEFAULT_BOUNDARY_POINTS) -> CompactSampler:
    return CompactSampler("arc", center_angle=center_angle, half_width=half_width, boundary_points=points)


def Points(points: Iterable) -> CompactSampler:
    return CompactSampler("points", points=tuple(complex(p) for p in points))


def Union(parts: Sequence[CompactSampler]) -> CompactSampler:
    return CompactSampler("union", parts=tuple(parts))


def parse_compact(text: str) -> CompactSampler:
    """Parse ``point:re[,im]``, ``points:re,im;re,im``, ``disc:r[:grid]``,
    ``arc:center:half_width`` or several of these joined by ``+``."""
    pieces = [p.strip() for p in text.split("+") if p.strip()]
    if not pieces:
        raise ValueError("empty compact-set specification")
    parsed = [_parse_one(p) for p in pieces]
    return parsed[0] if len(parsed) == 1 else Union(parsed)


def _parse_one(text: str) -> CompactSampler:
    kind, _, rest = text.partition(":")
    kind = kind.strip().lower()
    if kind in ("point", "points"):
        return Points(parse_complex_list(rest))
    if kind == "disc":
        args = [a for a in rest.split(":") if a] if rest else []
        radius = float(args[0]) if args else 1.0
        grid = int(args[1]) if len(args) > 1 else DEFAULT_GRID
        return Disc(radius, grid=grid)
    if kind == "arc":
        args = rest.split(":")
        if len(args) != 2:
            raise ValueError("arc needs 'arc:center_angle:half_width'")
        return Arc(float(args[0]), float(args[1]))
    raise ValueError(f"unknown compact set {text!r}")


# --------------------------------------------------------------------------
# residual evaluation


def _horner(coeffs: np.ndarray, z: np.ndarray) -> np.ndarray:
    acc = np.zeros_like(z, dtype=complex)
    for c in coeffs[::-1]:
        acc = acc * z + c
    return acc


def residual_values(sol: ApproximantSolution, z) -> np.ndarray:
    """Vectorized Horner evaluation of the residual polynomial."""
    return _horner(sol.residual_array(), np.asarray(z, dtype=complex))


def residual_at(sol: ApproximantSolution, z) -> complex:
    """``(1 - p_n f)(z) = sum_i A_i k_{n+d}(z, z_i)``.

    Uses the kernel representation when the solution carries ``A`` from the
    Gram system (closed form for Hardy/Bergman away from ``conj(z_i) z = 1``),
    and Horner on the coefficients otherwise.
    """
    z = complex(z)
    if sol.method != "gram" or sol.omega is None:
        return complex(residual_values(sol, z))
    m = sol.n + sol.d
    omega = sol.omega
    closed = omega.is_power and float(omega.alpha) in (0.0, -1.0)
    total = 0j
    for a, zi in zip(sol.A, sol.zeros):
        zi = complex(zi)
        q = z * zi.conjugate()
        if closed and abs(1 - q) > 1e-3:
            k = complex(kernel_closed_form(omega, m, z, zi, Float64()))
        else:
            k = complex(kernel_partial_sum(omega, m, z, zi, Float64()))
        total += complex(a) * k
    return total


def wiener_norm(sol: ApproximantSolution) -> float:
    """``sum_k |d_k|`` over the residual coefficients."""
    return math.fsum(abs(complex(c)) for c in sol.residual_coeffs)


def sup_on_compact(sol: ApproximantSolution, K: CompactSampler) -> float:
    return float(np.max(np.abs(residual_values(sol, K.samples()))))


# --------------------------------------------------------------------------
# sweeps


@dataclass(frozen=True)
class RateRow:
    n: int
    sup_K: float
    wiener: float
    dist_sq: float
    bound: float | None


@dataclass
class RateReport:
    rows: list[RateRow] = field(default_factory=list)

    def __post_init__(self):
        ns = [r.n for r in self.rows]
        if any(b <= a for a, b in zip(ns, ns[1:])):
            raise ValueError("rate report rows must be strictly increasing in n")

    def column(self, name: str) -> list:
        return [getattr(r, name) for r in self.rows]

    def ratios(self) -> list[float | None]:
        """``sup_K / bound``; bounded in n whenever the monotone-weight rate holds."""
        return [None if r.bound is None else r.sup_K / r.bound for r in self.rows]

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["n", "sup_K", "wiener", "dist_sq", "bound"])
        for r in self.rows:
            w.writerow([r.n, repr(r.sup_K), repr(r.wiener), repr(r.dist_sq), "" if r.bound is None else repr(r.bound)])
        return buf.getvalue()

    def to_json(self) -> str:
        return json.dumps({"rows": [r.__dict__ for r in self.rows]}, sort_keys=True)

    @classmethod
    def from_csv(cls, text: str) -> "RateReport":
        rows = []
        for rec in csv.DictReader(io.StringIO(text)):
            rows.append(RateRow(int(rec["n"]), float(rec["sup_K"]), float(rec["wiener"]),
                                float(rec["dist_sq"]), float(rec["bound"]) if rec["bound"] else None))
        return cls(rows)


def rate_bound(omega: WeightSequence, n: int) -> float | None:
    """``(sum_{k<=n} s_n/omega_k)^-1`` for monotone weights whose flags hold,
    ``(sum_{k<=n} 1/omega_k)^-1`` when monotone but the flags fail, and
    ``None`` for non-monotone tables."""
    flags = omega.flags()
    if flags.monotone is Monotone.NO:
        return None
    s = reciprocal_weight_sum(omega, n)
    if flags.divergent_reciprocal_sum is not False and flags.doubling_constant is not None:
        return 1.0 / (omega.s(n) * s)
    return 1.0 / s


def parse_n_range(text: str) -> list[int]:
    """``"a..b"``, ``"a..b:step"`` or a single integer; empty ranges raise ValueError."""
    text = text.strip()
    if ".." not in text:
        return [int(text)]
    lo, _, rest = text.partition("..")
    hi, _, step = rest.partition(":")
    lo, hi, step = int(lo), int(hi), int(step) if step else 1
    if step <= 0:
        raise ValueError("step must be positive")
    values = list(range(lo, hi + 1, step))
    if not values:
        raise ValueError(f"empty n range {text!r}")
    if lo < 0:
        raise ValueError("n must be >= 0")
    return values


def _sweep_solution(omega, zeros, g, n, backend, mult):
    if mult:
        return multiplicity.multiplicity_approximant(omega, mult, n, backend)
    sys = gram.build_gram(omega, zeros, n, backend)
    proj = gram.project(sys, g)
    return ApproximantSolution(
        n=n, d=sys.d, zeros=tuple(sys.zeros_in_backend()), A=proj.A, residual_coeffs=proj.residual_coeffs,
        pn_coeffs=ComplexPolynomial(), distance_sq=proj.distance_sq, omega=omega, backend=sys.backend,
        method="gram", pn_method="none",
    )


def _sweep_row(omega, zeros, g, n, K, backend, mult) -> RateRow:
    chain = [backend] if backend is not None else [Float64(), ExtendedFloat(60)]
    for i, b in enumerate(chain):
        try:
            sol = _sweep_solution(omega, zeros, g, n, b, mult)
            break
        except (PrecisionExhausted, SingularMatrix, OverflowError):
            if i == len(chain) - 1:
                raise
            log.info("n=%d: float64 insufficient, retrying in extended precision", n)
    return RateRow(n, sup_on_compact(sol, K), wiener_norm(sol), float(complex(sol.distance_sq).real),
                   rate_bound(omega, n))


def rate_sweep(omega: WeightSequence, zeros, g_or_unit, n_range: Iterable[int], K: CompactSampler,
               backend=None, multiplicity_d: int | None = None, workers: int | None = None) -> RateReport:
    """Solve for every ``n`` and record sup over ``K``, Wiener norm, distance and rate bound.

    ``g_or_unit`` is ``"unit"`` (or ``None``) for ``g = 1`` or polynomial coefficients.
    With ``multiplicity_d`` the zero set is ignored and ``(z-1)^d`` is used.
    Float64 is tried first and extended precision used when it breaks down,
    unless ``backend`` pins one.
    """
    ns = list(n_range)
    if not ns:
        raise ValueError("n range is empty")
    if any(b <= a for a, b in zip(ns, ns[1:])):
        raise ValueError("n range must be strictly increasing")
    g = [1] if g_or_unit in (None, "unit", 1) else g_or_unit
    b = None if backend is None else parse_backend(backend)
    if multiplicity_d is None:
        zeros = zeros if isinstance(zeros, ZeroSet) else ZeroSet(zeros)
    if workers and workers > 1:
        with ThreadPoolExecutor(workers) as ex:
            rows = list(ex.map(lambda n: _sweep_row(omega, zeros, g, n, K, b, multiplicity_d), ns))
    else:
        rows = [_sweep_row(omega, zeros, g, n, K, b, multiplicity_d) for n in ns]
    return RateReport(rows)
