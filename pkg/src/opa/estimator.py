"""scikit-learn style front end: fit on a zero set, predict ``p_n`` values."""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_is_fitted

from . import gram, multiplicity
from .errors import InvalidZeroSet
from .polynomials import EPS_SEP, ZeroSet
from .weights import PowerWeight, WeightSequence


def check_points(X) -> np.ndarray:
    """Complex 1-D array from complex input or an ``(m, 2)`` array of ``(re, im)`` rows."""
    arr = np.asarray(X)
    if arr.ndim == 2 and arr.shape[1] == 2 and not np.iscomplexobj(arr):
        arr = arr[:, 0] + 1j * arr[:, 1]
    arr = np.atleast_1d(arr).astype(complex)
    if arr.ndim != 1:
        raise ValueError(f"expected a 1-D array of complex points, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ValueError("points must be finite")
    return arr


def check_zeros(X):
    """Validate zeros; returns ``("simple", ZeroSet)`` or ``("multiple", d)`` for ``(z-1)^d``."""
    arr = check_points(X)
    if arr.size == 0:
        raise InvalidZeroSet("zero set is empty")
    if arr.size > 1 and np.all(np.abs(arr - 1) <= EPS_SEP):
        return "multiple", int(arr.size)
    return "simple", ZeroSet([complex(z) for z in arr])


def resolve_weight(alpha=0.0, weights: WeightSequence | None = None) -> WeightSequence:
    return weights if weights is not None else PowerWeight(alpha)


class OptimalApproximant(TransformerMixin, BaseEstimator):
    """Optimal polynomial approximant of degree ``n`` to ``1/f``.

    ``fit`` takes the zeros of ``f``; a zero at 1 repeated ``d`` times is
    handled by the moment (Hankel) solver.  After fitting, ``predict`` gives
    ``p_n(z)`` and ``transform`` gives the residual ``1 - p_n f``.
    """

    def __init__(self, n: int = 10, alpha: float = 0.0, weights: WeightSequence | None = None,
                 backend: str | None = "auto", leading: complex = 1.0):
        self.n = n
        self.alpha = alpha
        self.weights = weights
        self.backend = backend
        self.leading = leading

    def fit(self, X, y=None):
        if int(self.n) != self.n or self.n < 0:
            raise ValueError(f"n must be a non-negative integer, got {self.n!r}")
        omega = resolve_weight(self.alpha, self.weights)
        kind, zs = check_zeros(X)
        if kind == "multiple":
            if self.leading != 1:
                raise ValueError("repeated zeros are supported only for the monic (z-1)^d")
            sol = multiplicity.multiplicity_approximant(omega, zs, int(self.n), self.backend)
        else:
            sol = gram.optimal_approximant(omega, zs, int(self.n), self.leading, self.backend)
        self.solution_ = sol
        self.zeros_ = np.array([complex(z) for z in sol.zeros])
        self.coef_ = sol.pn_array()
        self.residual_coef_ = sol.residual_array()
        self.A_ = np.array([complex(a) for a in sol.A])
        self.distance_sq_ = sol.distance_sq_float
        return self

    def predict(self, X) -> np.ndarray:
        """``p_n`` evaluated at the points ``X``."""
        check_is_fitted(self, "coef_")
        return np.polynomial.polynomial.polyval(check_points(X), self.coef_)

    def transform(self, X) -> np.ndarray:
        """``1 - p_n f`` evaluated at the points ``X``."""
        check_is_fitted(self, "residual_coef_")
        return np.polynomial.polynomial.polyval(check_points(X), self.residual_coef_)

    def score(self, X=None, y=None) -> float:
        """Negative squared distance ``-||1 - p_n f||^2`` (larger is better)."""
        check_is_fitted(self, "distance_sq_")
        return -self.distance_sq_
