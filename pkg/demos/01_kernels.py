"""Matérn and Wendland kernels, and the Bessel function behind them."""

import math

import numpy as np
from scipy import integrate

from kernelrates.kernels import (
    MaternKernel,
    WendlandKernel,
    matern_spectral_density,
    spectral_envelope_of,
)
from kernelrates.specfun import bessel_k

# K_nu for a fractional order; nu = 1.1 is the true kernel of the m0 = 1.6 runs.
x = np.array([1e-4, 0.1, 1.0, 5.0, 30.0])
print("K_1.1(x):", bessel_k(1.1, x))

# Half-integer orders have closed forms.
print("K_1/2(1) =", bessel_k(0.5, 1.0), " closed form:", math.sqrt(math.pi / 2) / math.e)

# Matérn correlations decay with the lag; larger nu is flatter at the origin.
r = np.linspace(0, 2, 5)
for nu in (0.5, 1.5, 2.5):
    print(f"Matern nu={nu}:", np.round(MaternKernel(nu)(r), 4))

# The spectral density inverts back to the kernel with a cosine transform.
k = MaternKernel(1.1)
for lag in (0.1, 1.0):
    back, _ = integrate.quad(lambda w: matern_spectral_density(k, w, 1) / math.pi, 0, np.inf,
                             weight="cos", wvar=lag)
    print(f"lag {lag}: kernel {k(lag):.10f}  inverted spectrum {back:.10f}")

# The spectral envelope gives the Sobolev order of the RKHS: m = nu + d/2.
env = spectral_envelope_of(k, d=1)
print(f"envelope m={env.m:g}, constants [{env.c_lower:.3f}, {env.c_upper:.3f}]")

# Generalized Wendland kernels are compactly supported.
w = WendlandKernel(kappa=1.0, eta=3.0, phi=1.0)
print("Wendland:", np.round(w(np.linspace(0, 1.2, 7)), 5))
print("Wendland envelope:", spectral_envelope_of(w).m, spectral_envelope_of(w).note)
