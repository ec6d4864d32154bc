"""Theoretical convergence exponents and the smoothness toolkit.

Smoothness is measured on the spectral scale: a kernel whose Fourier
transform decays like ``(1 + |w|^2)^-m`` has RKHS equal to the Sobolev space
``H^m``.  ``m0`` refers to the truth, ``m`` to the imposed kernel.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np
import scipy.linalg as la
from scipy import integrate

from .regress import NumericalError, gram_matrix

__all__ = [
    "RateSpec",
    "DeterministicTarget",
    "EigenDecayEstimate",
    "regime_of",
    "theoretical_gp_slope",
    "theoretical_krr_rate",
    "triangle_target",
    "zero_target",
    "triangle_fourier",
    "triangle_sobolev_integral",
    "triangle_q",
    "estimate_eigendecay",
    "ols_slope",
]

OVERSMOOTHED = "oversmoothed"
WELL_SPECIFIED = "well-specified"
UNDERSMOOTHED = "undersmoothed"


def regime_of(m0: float, m: float) -> str:
    if m > m0:
        return OVERSMOOTHED
    if m < m0:
        return UNDERSMOOTHED
    return WELL_SPECIFIED


@dataclass(frozen=True)
class RateSpec:
    m0: float
    m: float
    d: int = 1

    def __post_init__(self):
        if self.m0 <= self.d / 2 or self.m <= self.d / 2:
            raise ValueError(f"need m0, m > d/2 = {self.d / 2}, got m0={self.m0}, m={self.m}")

    @property
    def regime(self) -> str:
        return regime_of(self.m0, self.m)


def theoretical_gp_slope(spec: RateSpec) -> float:
    """Exponent of ``n^-1`` in the squared L2 error of GP regression.

    ``(2 s - d) / (2 s)`` with ``s = min(m0, m)``: oversmoothing costs
    nothing (given a quasi-uniform design and the matching nugget
    schedule), undersmoothing caps the rate at the imposed smoothness.
    """
    s = min(spec.m0, spec.m)
    return (2.0 * s - spec.d) / (2.0 * s)


def theoretical_krr_rate(m0f: float, m: float, d: int = 1) -> float:
    """Exponent of ``n^-1`` in the (unsquared) L2 error of kernel ridge regression.

    ``m0f / (2 m0f + d)`` when ``m >= m0f / 2``, otherwise ``2m / (4m + d)``.
    If the target is not in ``H^m0f`` the rate holds only up to a
    sub-polynomial factor.
    """
    if m0f <= d / 2 or m <= d / 2:
        raise ValueError(f"need m0f, m > d/2 = {d / 2}")
    if m >= m0f / 2:
        return m0f / (2.0 * m0f + d)
    return 2.0 * m / (4.0 * m + d)


@dataclass(frozen=True)
class DeterministicTarget:
    """A regression function on ``[0, 1]^d`` with known Sobolev smoothness."""

    name: str
    evaluator: Callable[[np.ndarray], np.ndarray]
    smoothness: float
    in_sobolev_at_smoothness: bool
    d: int = 1

    def __post_init__(self):
        if self.smoothness <= self.d / 2:
            raise ValueError("target smoothness must exceed d/2")

    def __call__(self, x):
        return self.evaluator(x)


def _triangle(x):
    x = np.asarray(x, dtype=float)
    if x.ndim == 2:
        x = x[:, 0]
    return np.maximum(0.0, 1.0 - np.abs(2.0 * x - 1.0))


def triangle_target() -> DeterministicTarget:
    """Hat function ``max(0, 1 - |t|)`` with ``t = 2x - 1`` mapping [0,1] onto [-1,1].

    Its smoothness is 3/2 but it is not itself in ``H^{3/2}``.
    """
    return DeterministicTarget("triangle", _triangle, 1.5, False)


def _zero(x):
    x = np.asarray(x, dtype=float)
    return np.zeros(x.shape[0] if x.ndim else 1)


def zero_target(smoothness: float = math.inf) -> DeterministicTarget:
    """The identically zero function (infinitely smooth; a noise-only baseline)."""
    return DeterministicTarget("zero", _zero, smoothness, True)


def triangle_fourier(omega):
    """Fourier transform of the hat function on [-1, 1], ``(2 pi)^(-1/2)`` convention.

    ``4 sin^2(w/2) / (sqrt(2 pi) w^2)``, equal to ``1/sqrt(2 pi)`` at 0.
    """
    w = np.asarray(omega, dtype=float)
    half = 0.5 * w
    # sin(w/2)/(w/2) -> 1 as w -> 0; np.sinc(t) = sin(pi t)/(pi t)
    out = np.sinc(half / math.pi) ** 2 / math.sqrt(2.0 * math.pi)
    return out if out.ndim else float(out)


def triangle_sobolev_integral(upper: float, exponent: float) -> float:
    """``int_{-upper}^{upper} |F(f)(w)|^2 (1 + w^2)^exponent dw`` for the hat function.

    Converges as ``upper -> inf`` iff ``exponent < 3/2``; at exactly 3/2 the
    partial integrals grow like ``(6/pi) log(upper)``.
    """

    def integrand(w):
        return triangle_fourier(w) ** 2 * (1.0 + w * w) ** exponent

    # integrate period by period: the integrand oscillates with period 2 pi
    edges = np.arange(0.0, upper, 2.0 * math.pi)
    edges = np.append(edges, upper)
    total = 0.0
    for a, b in zip(edges[:-1], edges[1:]):
        total += integrate.quad(integrand, a, b, epsabs=1e-14, epsrel=1e-12, limit=200)[0]
    return 2.0 * total


def triangle_q(t, c: float = 1.0):
    """Sub-polynomial factor ``c log^2(1 + t)`` attached to the hat function."""
    return c * np.log1p(np.asarray(t, dtype=float)) ** 2


def ols_slope(x, y):
    """Least-squares fit ``y ~ a + b x``; return ``(b, a, r2)``."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.shape != y.shape or x.size < 2:
        raise ValueError("need two equal-length sequences with at least 2 entries")
    xc = x - x.mean()
    sxx = float(xc @ xc)
    if sxx == 0.0:
        raise ValueError("regressor has zero variance")
    yc = y - y.mean()
    b = float(xc @ yc) / sxx
    a = float(y.mean() - b * x.mean())
    syy = float(yc @ yc)
    if syy == 0.0:
        r2 = 1.0
    else:
        resid = yc - b * xc
        r2 = min(max(1.0 - float(resid @ resid) / syy, 0.0), 1.0)
    return b, a, r2


@dataclass(frozen=True)
class EigenDecayEstimate:
    index_range: tuple[int, int]
    slope: float
    r2: float
    eigenvalues: np.ndarray


def estimate_eigendecay(kernel, X, k_lo: int, k_hi: int, *, gram=None) -> EigenDecayEstimate:
    """Fit ``log lambda_k ~ slope * log k`` for the eigenvalues of ``R / n``.

    The eigenvalues of the scaled Gram matrix approximate the Mercer
    eigenvalues of the kernel on the domain; for a kernel with spectral
    exponent ``m`` in dimension ``d`` the slope should approach ``-2m/d``.
    Eigenvalues are indexed from 1 in decreasing order; the window starts at
    ``k_lo >= 2`` because the top eigenvalue reflects the constant mode.  Pass `gram` to
    supply a precomputed matrix instead of building one from `kernel`.
    """
    R = gram_matrix(kernel, X) if gram is None else np.asarray(gram, dtype=float)
    n = R.shape[0]
    if not 2 <= k_lo < k_hi <= n:
        raise ValueError(f"need 2 <= k_lo < k_hi <= n={n}")
    try:
        evals = la.eigvalsh(R / n)[::-1]
    except la.LinAlgError as exc:
        raise NumericalError(f"eigen-decomposition failed: {exc}") from exc
    k = np.arange(k_lo, k_hi + 1)
    lam = evals[k - 1]
    if np.any(lam <= 0):
        raise NumericalError("non-positive eigenvalue inside the fitting window")
    slope, _, r2 = ols_slope(np.log(k), np.log(lam))
    return EigenDecayEstimate((k_lo, k_hi), slope, r2, evals)
