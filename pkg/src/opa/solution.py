"""Result containers shared by the closed-form solvers and the oracle."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .linalg import Backend, parse_backend
from .polynomials import ComplexPolynomial, convolve, to_pairs
from .weights import WeightSequence


def _real_float(x) -> float:
    return complex(x).real


@dataclass(frozen=True)
class ProjectionResult:
    """Solve vector, coefficients of ``g - P_n(g)`` and the squared distance."""

    A: tuple
    residual_coeffs: tuple
    distance_sq: object

    def residual_array(self) -> np.ndarray:
        return np.array([complex(c) for c in self.residual_coeffs], dtype=complex)


@dataclass(frozen=True)
class ApproximantSolution:
    """Optimal approximant ``p_n`` to ``1/f`` and the residual ``1 - p_n f``.

    Scalars stay in the backend that produced them (exact rationals stay
    exact); use :meth:`to_dict` / :meth:`residual_array` for floats.
    """

    n: int
    d: int
    zeros: tuple
    A: tuple
    residual_coeffs: tuple
    pn_coeffs: ComplexPolynomial
    distance_sq: object
    omega: WeightSequence | None = None
    backend: Backend | None = None
    leading: object = 1
    method: str = "gram"
    pn_method: str = "series"
    extra: dict = field(default_factory=dict, compare=False)

    @property
    def f(self) -> ComplexPolynomial:
        if "f" in self.extra:
            return ComplexPolynomial(self.extra["f"])
        coeffs = [self.leading]
        for z in self.zeros:
            coeffs = convolve(coeffs, [-z, 1])
        return ComplexPolynomial(coeffs)

    def residual_array(self) -> np.ndarray:
        return np.array([complex(c) for c in self.residual_coeffs], dtype=complex)

    def pn_array(self) -> np.ndarray:
        return np.array([complex(c) for c in self.pn_coeffs.coeffs], dtype=complex)

    @property
    def distance_sq_float(self) -> float:
        return _real_float(self.distance_sq)

    def to_dict(self) -> dict:
        return {
            "n": self.n,
            "d": self.d,
            "zeros": to_pairs(self.zeros),
            "A": to_pairs(self.A),
            "residual_coeffs": to_pairs(self.residual_coeffs),
            "pn_coeffs": to_pairs(self.pn_coeffs.coeffs) if self.pn_coeffs.coeffs else [[0.0, 0.0]],
            "distance_sq": self.distance_sq_float,
        }

    def to_json(self, **kw) -> str:
        kw.setdefault("sort_keys", True)
        return json.dumps(self.to_dict(), **kw)


def orthogonality_defects(residual: Sequence, f: Sequence, omega: WeightSequence, n: int,
                          backend: Backend | str | None = None) -> list:
    """Normalized ``|<r, z^j f>_omega| / (||r|| ||z^j f||)`` for ``j = 0..n``.

    Exact backends return the raw inner products (all zero for a true projection).
    """
    b = parse_backend(backend)
    r = [b.scalar(x) for x in residual]
    fc = [b.scalar(x) for x in f]
    d = len(fc) - 1
    top = max(len(r) - 1, n + d)
    w = omega.values(top, b)
    out = []
    r_norm = math.sqrt(max(sum(abs(complex(x)) ** 2 * float(w[k]) for k, x in enumerate(r)), 0.0))
    for j in range(n + 1):
        ip = b.fsum(
            r[j + i] * fc[i].conjugate() * w[j + i] for i in range(d + 1) if j + i < len(r)
        ) if j < len(r) else b.scalar(0)
        if b.exact:
            out.append(ip)
            continue
        zf = math.sqrt(sum(abs(complex(fc[i])) ** 2 * float(w[j + i]) for i in range(d + 1)))
        denom = r_norm * zf
        out.append(abs(complex(ip)) / denom if denom else abs(complex(ip)))
    return out
