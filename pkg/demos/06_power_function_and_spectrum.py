"""Decay of the worst-case power function and of Gram eigenvalues."""

from kernelrates.designs import grid_design
from kernelrates.harness import power_function_sweep
from kernelrates.kernels import MaternKernel
from kernelrates.rates import estimate_eigendecay

# Slopes approach the bound exponent 1 - 1/(2 m0) only at large n.
for m0 in (1.0, 2.0, 3.0):
    small = power_function_sweep(m0)
    large = power_function_sweep(m0, n_grid=(150, 300, 600, 1200))
    print(f"m0={m0}: bound {small.theoretical_slope:.3f}  "
          f"n<=150 {small.slope:.3f}  n=150..1200 {large.slope:.3f}")

# Eigenvalues of R/n decay like k^(-2m) for a kernel of spectral order m.
for nu, window in ((0.5, (5, 100)), (1.5, (5, 40))):
    est = estimate_eigendecay(MaternKernel(nu), grid_design(500), *window)
    print(f"nu={nu}: slope {est.slope:.3f} (predicted {-2 * (nu + 0.5):g}) over k={window}")
