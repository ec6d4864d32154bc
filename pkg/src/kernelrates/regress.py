"""Gram matrices, GP simulation and the regularized kernel predictor.

Gaussian process regression with an imposed correlation ``Phi`` and nugget
``mu`` predicts ``r(x)^T (R + mu I)^{-1} y``.  Kernel ridge regression with
penalty ``lam`` gives the same function when ``mu = n * lam``; both are
represented by :class:`FittedPredictor` through the dual weights
``w = (R + mu I)^{-1} y``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg as la
from scipy.spatial.distance import cdist, pdist, squareform

from .designs import Design
from .kernels import Kernel

__all__ = [
    "NumericalError",
    "Observations",
    "GPSpec",
    "FittedPredictor",
    "cross_correlation",
    "gram_matrix",
    "jitter_cholesky",
    "sample_gp_realization",
    "fit_regularized",
    "fit_krr",
    "krr_objective",
    "predict",
    "conditional_variance",
    "power_function",
    "power_lower_bound",
    "mspe",
    "rkhs_norm_of_fit",
    "mu_schedule",
    "lambda_schedule",
]

# Relative jitter ladder (multiples of trace/n) tried after a plain Cholesky.
_JITTERS = tuple(10.0**k for k in range(-12, -5))
_NEG_VAR_TOL = 1e-10


class NumericalError(np.linalg.LinAlgError):
    """A factorisation or solve failed beyond the tolerated rounding."""


@dataclass(frozen=True, eq=False)
class Observations:
    design: Design
    y: np.ndarray
    noise_variance: float = 0.0

    def __post_init__(self):
        y = np.array(self.y, dtype=float).ravel()
        if y.shape[0] != self.design.n:
            raise ValueError(f"got {y.shape[0]} responses for {self.design.n} design points")
        if self.noise_variance < 0:
            raise ValueError("noise variance must be non-negative")
        y.setflags(write=False)
        object.__setattr__(self, "y", y)


@dataclass(frozen=True)
class GPSpec:
    """Zero-mean stationary GP with covariance ``process_variance * kernel``."""

    kernel: Kernel
    process_variance: float = 1.0

    def __post_init__(self):
        if not self.process_variance > 0:
            raise ValueError("process variance must be positive")


def _as_points(x, d):
    """Return ``(points (T, d), single)`` for a point or a stack of points."""
    x = np.asarray(x, dtype=float)
    if x.ndim <= 1 and x.size == d:
        return x.reshape(1, d), True
    if x.ndim == 1 and d == 1:
        return x[:, None], False
    if x.ndim == 2 and x.shape[1] == d:
        return x, False
    raise ValueError(f"cannot interpret array of shape {x.shape} as points in R^{d}")


def cross_correlation(kernel, A, B) -> np.ndarray:
    """Matrix ``kernel(a_i - b_j)`` for point arrays `A` (p, d) and `B` (q, d)."""
    return kernel.correlation(cdist(np.atleast_2d(A), np.atleast_2d(B)))


def gram_matrix(kernel, X) -> np.ndarray:
    """Correlation matrix ``R_jk = kernel(x_j - x_k)`` of a design.

    Each pair is evaluated once, so the result is exactly symmetric, and the
    diagonal is exactly 1.
    """
    pts = X.points if isinstance(X, Design) else np.atleast_2d(np.asarray(X, float))
    n = pts.shape[0]
    if n == 1:
        return np.ones((1, 1))
    dists = pdist(pts)
    if dists.min() == 0.0:
        raise ValueError("duplicate design points make the Gram matrix singular")
    R = squareform(kernel.correlation(dists), checks=False)
    np.fill_diagonal(R, 1.0)
    return R


def jitter_cholesky(A):
    """Lower Cholesky factor of `A`, adding diagonal jitter only if needed.

    Tries no jitter first, then ``trace(A)/n`` times 1e-12, 1e-11, ... 1e-6.

    Returns
    -------
    L : ndarray
        Lower-triangular factor of ``A + jitter * I``.
    jitter : float
        The absolute jitter that was added.
    """
    A = np.asarray(A, dtype=float)
    scale = np.trace(A) / A.shape[0]
    for rel in (0.0,) + _JITTERS:
        jitter = rel * scale
        try:
            L = la.cholesky(A + jitter * np.eye(A.shape[0]), lower=True)
        except la.LinAlgError:
            continue
        return L, jitter
    lam_min = float(la.eigvalsh(A, subset_by_index=[0, 0])[0])
    raise NumericalError(
        f"Cholesky failed even with jitter {_JITTERS[-1]:g}*trace/n; "
        f"smallest eigenvalue {lam_min:.3e}"
    )


def sample_gp_realization(spec: GPSpec, X, rng: np.random.Generator) -> np.ndarray:
    """One draw of the GP at the points of `X` (a Design or (n, d) array)."""
    L, _ = jitter_cholesky(spec.process_variance * gram_matrix(spec.kernel, X))
    return L @ rng.standard_normal(L.shape[0])


@dataclass(frozen=True, eq=False)
class FittedPredictor:
    """Regularized kernel predictor ``x -> r(x)^T w`` in dual form."""

    kernel: Kernel
    mu: float
    design: Design
    weights: np.ndarray
    gram: np.ndarray = field(repr=False)

    def __call__(self, x):
        return predict(self, x)

    @property
    def lam(self) -> float:
        """Equivalent kernel ridge penalty ``mu / n``."""
        return self.mu / self.design.n


def _solve_regularized(R, mu, y):
    n = R.shape[0]
    try:
        factor = la.cho_factor(R + mu * np.eye(n), lower=True)
    except la.LinAlgError as exc:
        raise NumericalError(
            f"R + mu I is not numerically positive definite (mu={mu:g}); "
            "use a positive mu or add jitter"
        ) from exc
    w = la.cho_solve(factor, y)
    resid = np.linalg.norm(R @ w + mu * w - y)
    if resid > 1e-8 * max(np.linalg.norm(y), np.finfo(float).tiny):
        raise NumericalError(
            f"regularized solve residual {resid:.2e} too large (mu={mu:g}); "
            "the system is too ill-conditioned; use a positive mu or add jitter"
        )
    return w


def fit_regularized(obs: Observations, kernel, mu: float) -> FittedPredictor:
    """Solve ``(R + mu I) w = y`` by Cholesky.

    ``mu = 0`` gives the noiseless interpolant and requires a well-conditioned
    Gram matrix.

    Raises
    ------
    NumericalError
        If the system is singular or the solve is inaccurate.
    """
    if mu < 0:
        raise ValueError("mu must be non-negative")
    R = gram_matrix(kernel, obs.design)
    w = _solve_regularized(R, mu, obs.y)
    return FittedPredictor(kernel, float(mu), obs.design, w, R)


def fit_krr(obs: Observations, kernel, lam: float) -> FittedPredictor:
    """Kernel ridge regression with penalty `lam` on the squared RKHS norm.

    Minimises ``(1/n) sum (y_k - f(x_k))^2 + lam ||f||^2`` over
    ``f = sum_j a_j kernel(. - x_j)``.  The stationarity condition
    ``R (R + n lam I) a = R y`` is solved in the eigenbasis of ``R``, which
    does not go through the Cholesky route of :func:`fit_regularized`.
    """
    if not lam > 0:
        raise ValueError("lam must be positive")
    n = obs.design.n
    R = gram_matrix(kernel, obs.design)
    evals, evecs = la.eigh(R)
    a = evecs @ ((evecs.T @ obs.y) / (evals + n * lam))
    return FittedPredictor(kernel, n * lam, obs.design, a, R)


def krr_objective(fit: FittedPredictor, obs: Observations, lam: float) -> float:
    """Penalised empirical risk of a dual-form fit."""
    fitted = fit.gram @ fit.weights
    return float(np.mean((obs.y - fitted) ** 2) + lam * fit.weights @ fitted)


def predict(fit: FittedPredictor, x):
    """Evaluate the fitted predictor at a point or a stack of points."""
    pts, single = _as_points(x, fit.design.d)
    out = cross_correlation(fit.kernel, pts, fit.design.points) @ fit.weights
    return float(out[0]) if single else out


def _quad_forms(kernel, X, mu, x):
    """``r^T (R+mu I)^{-1} r`` and ``r^T (R+mu I)^{-2} r`` at each point of `x`."""
    pts, single = _as_points(x, X.d)
    R = gram_matrix(kernel, X)
    r = cross_correlation(kernel, X.points, pts)  # (n, T)
    try:
        factor = la.cho_factor(R + mu * np.eye(X.n), lower=True)
    except la.LinAlgError as exc:
        raise NumericalError(f"R + mu I is singular (mu={mu:g})") from exc
    u = la.cho_solve(factor, r)
    return np.einsum("ij,ij->j", r, u), np.einsum("ij,ij->j", u, u), single


def _clamp_variance(v):
    if np.any(v < -_NEG_VAR_TOL):
        raise NumericalError(f"negative variance {v.min():.3e} beyond rounding")
    return np.maximum(v, 0.0)


def conditional_variance(spec: GPSpec, X: Design, mu: float, x):
    """``sigma^2 (1 - r(x)^T (R + mu I)^{-1} r(x))`` under the GP `spec`.

    With ``mu = noise_variance / sigma^2`` this is the posterior variance of
    ``Z(x)`` given noisy observations on `X`.  Small negative values from
    rounding (down to -1e-10) are clamped to 0.
    """
    if mu < 0:
        raise ValueError("mu must be non-negative")
    quad, _, single = _quad_forms(spec.kernel, X, mu, x)
    v = _clamp_variance(spec.process_variance * (1.0 - quad))
    return float(v[0]) if single else v


def power_function(kernel, X: Design, mu1: float, x):
    """Unit-variance conditional variance ``1 - r^T (R + mu1 I)^{-1} r``."""
    if not mu1 > 0:
        raise ValueError("mu1 must be positive")
    return conditional_variance(GPSpec(kernel, 1.0), X, mu1, x)


def power_lower_bound(kernel, X: Design, mu1: float, x):
    """``mu1 r^T (R + mu1 I)^{-2} r``, which never exceeds the power function."""
    _, quad2, single = _quad_forms(kernel, X, mu1, x)
    v = mu1 * quad2
    return float(v[0]) if single else v


def mspe(truth: GPSpec, kernel, X: Design, mu: float, noise_variance: float, x):
    """Exact mean squared prediction error of the imposed-kernel predictor.

    The truth is ``Z ~ GP(0, sigma^2 Psi)`` observed with white noise of
    variance `noise_variance`; the predictor uses `kernel` with nugget `mu`.
    With ``u = (R_Phi + mu I)^{-1} r_Phi(x)``::

        MSPE(x) = sigma^2 Psi(0) - 2 sigma^2 u^T r_Psi(x)
                  + u^T (sigma^2 R_Psi + noise_variance I) u
    """
    pts, single = _as_points(x, X.d)
    s2 = truth.process_variance
    R_phi = gram_matrix(kernel, X)
    r_phi = cross_correlation(kernel, X.points, pts)
    u = la.cho_solve(la.cho_factor(R_phi + mu * np.eye(X.n), lower=True), r_phi)
    R_psi = gram_matrix(truth.kernel, X)
    r_psi = cross_correlation(truth.kernel, X.points, pts)
    cov = s2 * R_psi + noise_variance * np.eye(X.n)
    v = s2 - 2.0 * s2 * np.einsum("ij,ij->j", u, r_psi) + np.einsum("ij,ij->j", u, cov @ u)
    v = _clamp_variance(v)
    return float(v[0]) if single else v


def rkhs_norm_of_fit(fit: FittedPredictor) -> float:
    """Norm of the fitted function in the imposed kernel's RKHS, ``sqrt(w^T R w)``."""
    return math.sqrt(max(float(fit.weights @ fit.gram @ fit.weights), 0.0))


def mu_schedule(n: int, m0: float, m: float, base: float = 0.1) -> float:
    """GP nugget: ``base * n^(1 - m/m0)`` when ``m >= m0``, else ``base``."""
    if not base > 0:
        raise ValueError("base must be positive")
    return base * n ** (1.0 - m / m0) if m >= m0 else base


def lambda_schedule(n: int, m0f: float, m: float, d: int = 1, base: float = 1.0) -> float:
    """KRR penalty ``base * n^(-2m / (2 m0f + d))``."""
    if m0f <= d / 2 or m <= d / 2:
        raise ValueError("smoothness parameters must exceed d/2")
    if not base > 0:
        raise ValueError("base must be positive")
    return base * n ** (-2.0 * m / (2.0 * m0f + d))
