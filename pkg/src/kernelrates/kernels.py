"""Isotropic correlation functions and their spectral metadata.

Two families are provided:

* :class:`MaternKernel` with smoothness ``nu`` and scale ``phi``, using the
  ``2 sqrt(nu) phi ||x||`` parameterisation;
* :class:`WendlandKernel`, the compactly supported generalized Wendland
  function, evaluated from its Beta-normalised integral by adaptive
  quadrature.

Fourier transforms use the un-normalised convention
``F(f)(w) = int f(x) exp(-i x.w) dx``.  Under this convention the Matérn
spectral density is exactly :func:`matern_spectral_density` and the
inversion formula in one dimension reads
``f(r) = (1/pi) int_0^inf F(f)(w) cos(w r) dw``.

Kernels are frozen dataclasses and can be used as dictionary keys.  Both
families are radial, so :meth:`correlation` takes lag *norms*; use
:func:`matern_eval` / :func:`wendland_eval` for lag vectors.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Union

import numpy as np
from scipy import integrate

from .specfun import bessel_k, log_beta

__all__ = [
    "MaternKernel",
    "WendlandKernel",
    "SpectralEnvelope",
    "Smoothness",
    "Kernel",
    "matern_eval",
    "matern_spectral_density",
    "wendland_eval",
    "spectral_envelope_of",
    "smoothness_of_matern_function",
    "matern_for_smoothness",
    "kernel_to_dict",
    "kernel_from_dict",
]


@dataclass(frozen=True)
class MaternKernel:
    """Matérn correlation function.

    Parameters
    ----------
    nu : float
        Smoothness, ``nu > 0``.
    phi : float
        Scale, ``phi > 0``.  Larger values give shorter correlation length.
    """

    nu: float
    phi: float = 1.0

    def __post_init__(self):
        if not (math.isfinite(self.nu) and self.nu > 0):
            raise ValueError(f"Matern smoothness must be positive, got {self.nu}")
        if not (math.isfinite(self.phi) and self.phi > 0):
            raise ValueError(f"Matern scale must be positive, got {self.phi}")

    def correlation(self, r):
        """Evaluate at lag norms `r` (array_like, ``r >= 0``)."""
        r = np.asarray(r, dtype=float)
        z = 2.0 * math.sqrt(self.nu) * self.phi * r
        out = np.ones_like(z)
        pos = z > 0
        if pos.any():
            zp = z[pos]
            log_norm = math.lgamma(self.nu) + (self.nu - 1.0) * math.log(2.0)
            kz = bessel_k(self.nu, zp)
            with np.errstate(divide="ignore"):
                out[pos] = np.exp(self.nu * np.log(zp) - log_norm) * kz
        return out if out.ndim else float(out)

    def __call__(self, r):
        return self.correlation(r)


@dataclass(frozen=True)
class WendlandKernel:
    """Generalized Wendland correlation function (compact support ``1/phi``).

    Requires ``eta >= (dim + 1)/2 + kappa``.
    """

    kappa: float
    eta: float
    phi: float = 1.0
    dim: int = 1

    def __post_init__(self):
        if not self.kappa > 0:
            raise ValueError(f"Wendland kappa must be positive, got {self.kappa}")
        if not self.phi > 0:
            raise ValueError(f"Wendland phi must be positive, got {self.phi}")
        if int(self.dim) != self.dim or self.dim < 1:
            raise ValueError(f"dimension must be a positive integer, got {self.dim}")
        if self.eta < (self.dim + 1) / 2 + self.kappa:
            raise ValueError(
                f"inadmissible Wendland parameters: eta={self.eta} < "
                f"(d+1)/2 + kappa = {(self.dim + 1) / 2 + self.kappa}"
            )

    def _value(self, s):
        if s >= 1.0:
            return 0.0
        if s == 0.0:
            # the two singular factors merge into u^(2 kappa - 1)
            val, _ = integrate.quad(
                lambda u: 1.0, 0.0, 1.0, weight="alg", wvar=(2.0 * self.kappa - 1.0, self.eta)
            )
            return val * math.exp(-log_beta(2.0 * self.kappa, self.eta + 1.0))
        # weight (u - s)^(kappa-1) (1 - u)^eta is handled exactly by QUADPACK
        val, _ = integrate.quad(
            lambda u: u * (u + s) ** (self.kappa - 1.0),
            s,
            1.0,
            weight="alg",
            wvar=(self.kappa - 1.0, self.eta),
            epsabs=1e-12,
            epsrel=1e-12,
            limit=200,
        )
        return val * math.exp(-log_beta(2.0 * self.kappa, self.eta + 1.0))

    def correlation(self, r):
        """Evaluate at lag norms `r` (array_like, ``r >= 0``)."""
        r = np.asarray(r, dtype=float)
        s = self.phi * r
        uniq, inv = np.unique(s, return_inverse=True)
        vals = np.array([self._value(v) for v in uniq])
        out = vals[inv].reshape(s.shape)
        return out if out.ndim else float(out)

    def __call__(self, r):
        return self.correlation(r)


Kernel = Union[MaternKernel, WendlandKernel]


def _lag_norm(lag):
    lag = np.asarray(lag, dtype=float)
    if lag.ndim == 0:
        return abs(float(lag))
    return np.linalg.norm(lag, axis=-1)


def matern_eval(k: MaternKernel, lag):
    """Matérn correlation at a lag vector (or stack of vectors, last axis = d).

    Lag zero returns exactly 1.
    """
    return k.correlation(_lag_norm(lag))


def _freq_sq(omega, d):
    omega = np.asarray(omega, dtype=float)
    if d == 1 and omega.ndim <= 1:
        return omega**2  # a batch of scalar frequencies
    if omega.shape[-1] != d:
        raise ValueError(f"frequency vectors must have length d={d}, got shape {omega.shape}")
    return np.sum(omega**2, axis=-1)


def matern_spectral_density(k: MaternKernel, omega, d: int):
    """Matérn spectral density at frequency `omega` in dimension `d`.

    In one dimension `omega` may be a scalar or a 1-d array of frequencies;
    otherwise its last axis must have length `d`.

    ``4^(nu+d/2) pi^(d/2) Gamma(nu+d/2)/Gamma(nu) (nu phi^2)^nu
    (4 nu phi^2 + |omega|^2)^-(nu+d/2)``.
    """
    nu, phi = k.nu, k.phi
    m = nu + d / 2
    w2 = _freq_sq(omega, d)
    log_const = (
        m * math.log(4.0)
        + 0.5 * d * math.log(math.pi)
        + math.lgamma(m)
        - math.lgamma(nu)
        + nu * math.log(nu * phi * phi)
    )
    out = np.exp(log_const - m * np.log(4.0 * nu * phi * phi + w2))
    return out if np.ndim(out) else float(out)


def wendland_eval(k: WendlandKernel, lag):
    """Generalized Wendland correlation at a lag vector (last axis = d).

    Returns exactly 0 outside the support ``||lag|| >= 1/phi``.
    """
    return k.correlation(_lag_norm(lag))


@dataclass(frozen=True)
class SpectralEnvelope:
    """Algebraic envelope ``c_lower (1+|w|^2)^-m <= F(k)(w) <= c_upper (1+|w|^2)^-m``.

    `c_lower` and `c_upper` are ``None`` when the envelope exponent is taken
    from the literature without computable constants (``verified=False``).
    """

    m: float
    d: int
    c_lower: float | None
    c_upper: float | None
    verified: bool = True
    note: str = ""

    def __post_init__(self):
        if self.m <= self.d / 2:
            raise ValueError(f"envelope exponent m={self.m} must exceed d/2={self.d / 2}")
        if self.c_lower is not None and self.c_upper is not None:
            if not 0 < self.c_lower <= self.c_upper:
                raise ValueError("need 0 < c_lower <= c_upper")

    def contains(self, density, omega) -> np.ndarray:
        """Pointwise check that `density` values at `omega` lie in the envelope."""
        if self.c_lower is None or self.c_upper is None:
            raise ValueError("envelope constants unknown for this kernel")
        base = (1.0 + _freq_sq(omega, self.d)) ** (-self.m)
        density = np.asarray(density)
        tol = 1e-12 * np.abs(density)
        return (self.c_lower * base <= density + tol) & (density <= self.c_upper * base + tol)


def spectral_envelope_of(kernel: Kernel, d: int = 1) -> SpectralEnvelope:
    """Spectral decay exponent and sandwich constants of `kernel` in dimension `d`.

    For Matérn, ``m = nu + d/2`` and the ratio of the density to
    ``(1+|w|^2)^-m`` is monotone in ``|w|``, so its extremes at ``w = 0`` and
    ``|w| -> inf`` are tight constants valid for every frequency.

    For Wendland, ``m = kappa + (d+1)/2`` is a literature value that is not
    checked here; constants are left unknown.
    """
    if isinstance(kernel, MaternKernel):
        m = kernel.nu + d / 2
        at_zero = float(matern_spectral_density(kernel, np.zeros((1, d)), d)[0])
        a = 4.0 * kernel.nu * kernel.phi**2
        at_inf = at_zero * a**m
        return SpectralEnvelope(m, d, min(at_zero, at_inf), max(at_zero, at_inf))
    if isinstance(kernel, WendlandKernel):
        return SpectralEnvelope(
            kernel.kappa + (d + 1) / 2,
            d,
            None,
            None,
            verified=False,
            note="cited, not verified",
        )
    raise TypeError(f"unsupported kernel {kernel!r}")


@dataclass(frozen=True)
class Smoothness:
    """Sobolev smoothness ``sup{k : f in H^k}`` and whether the sup is attained."""

    value: float
    attained: bool


def smoothness_of_matern_function(nu: float, d: int) -> Smoothness:
    """Smoothness of the Matérn function itself, ``2 nu + d/2`` (not attained).

    The squared spectral density decays like ``|w|^(-4 nu - 2d)``, so
    ``int (1+|w|^2)^k F^2 dw`` is finite exactly when ``k < 2 nu + d/2``.
    """
    if not nu > 0:
        raise ValueError(f"nu must be positive, got {nu}")
    return Smoothness(2.0 * nu + d / 2.0, attained=False)


def matern_for_smoothness(m: float, d: int = 1, phi: float = 1.0) -> MaternKernel:
    """Matérn kernel whose spectral decay exponent is `m` (``nu = m - d/2``)."""
    if m <= d / 2:
        raise ValueError(f"spectral exponent m={m} must exceed d/2={d / 2}")
    return MaternKernel(m - d / 2, phi)


def kernel_to_dict(kernel: Kernel) -> dict:
    """JSON-ready ``{"family": ..., "params": {...}}`` description."""
    if isinstance(kernel, MaternKernel):
        return {"family": "matern", "params": {"nu": kernel.nu, "phi": kernel.phi}}
    if isinstance(kernel, WendlandKernel):
        return {
            "family": "wendland",
            "params": {
                "kappa": kernel.kappa,
                "eta": kernel.eta,
                "phi": kernel.phi,
                "dim": kernel.dim,
            },
        }
    raise TypeError(f"unsupported kernel {kernel!r}")


def kernel_from_dict(spec: dict) -> Kernel:
    """Inverse of :func:`kernel_to_dict`."""
    family = spec.get("family")
    params = dict(spec.get("params", {}))
    if family == "matern":
        return MaternKernel(**params)
    if family == "wendland":
        return WendlandKernel(**params)
    raise ValueError(f"unknown kernel family {family!r}")
