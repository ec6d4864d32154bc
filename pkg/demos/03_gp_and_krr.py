"""The GP predictor and kernel ridge regression are the same function."""

import numpy as np

from kernelrates.designs import grid_design
from kernelrates.kernels import MaternKernel
from kernelrates.regress import (
    GPSpec,
    Observations,
    conditional_variance,
    fit_krr,
    fit_regularized,
    predict,
    rkhs_norm_of_fit,
    sample_gp_realization,
)

rng = np.random.default_rng(0)
X = grid_design(30)
truth = GPSpec(MaternKernel(1.5), process_variance=1.0)
z = sample_gp_realization(truth, X, rng)
y = z + 0.5 * rng.standard_normal(X.n)
obs = Observations(X, y, noise_variance=0.25)

# Imposing a smoother kernel than the truth (oversmoothing).
kernel = MaternKernel(2.5)
lam = 1e-3
gp = fit_regularized(obs, kernel, mu=X.n * lam)
krr = fit_krr(obs, kernel, lam)

x = np.linspace(0, 1, 9)
print("GP :", np.round(predict(gp, x), 6))
print("KRR:", np.round(predict(krr, x), 6))
print("max difference:", np.max(np.abs(predict(gp, x) - predict(krr, x))))
print("RKHS norm of the fit:", rkhs_norm_of_fit(gp))

# Posterior variance under the honest model (mu = noise variance / sigma^2).
print("conditional variance:", np.round(conditional_variance(truth, X, 0.25, x), 4))
