"""Kernel ridge regression on the triangle function.

The squared-error slopes at n <= 150 differ from the asymptotic predictions:
the m = 2 run decays faster, and the m = 0.6 run is limited by the bias of
the prescribed penalty.  A longer ladder brings m = 2 into line.
"""

from kernelrates.harness import run_krr_convergence

for m in (2.0, 0.6):
    rep = run_krr_convergence("triangle", m, seed=42)
    print(f"m={m}: slope={rep.slope:.3f} predicted={rep.theoretical_slope:.3f} notes={rep.notes}")

rep = run_krr_convergence("triangle", 2.0, n_grid=(100, 200, 400, 800, 1600), replications=20, seed=42)
print(f"m=2 on n=100..1600: slope={rep.slope:.3f}")

# A zero target has no rate; the errors show the noise floor of the smoother.
rep = run_krr_convergence("zero", 2.0, n_grid=(20, 80, 150), replications=50)
print("zero target:", [round(r.mean_sq_error, 5) for r in rep.rows], rep.notes)
