"""Grid and Halton designs with their fill distance and separation radius."""

from kernelrates.designs import (
    diagnostics,
    grid_design,
    halton_points,
    perturb_with_near_duplicate,
)

# Grids are quasi-uniform: the mesh ratio h/q stays at 1 as n grows.
for n in (10, 50, 150):
    d = diagnostics(grid_design(n))
    print(f"grid n={n:4d}  fill={d.fill:.5f}  sep={d.separation:.5f}  ratio={d.ratio:.3f}")

# Halton points fill space well, but their ratio is larger and drifts.
for n in (10, 50, 150):
    d = diagnostics(halton_points(n))
    print(f"halton n={n:4d}  fill={d.fill:.5f}  sep={d.separation:.5f}  ratio={d.ratio:.3f}")

# One near-duplicate point leaves the fill distance alone but ruins the ratio.
X = grid_design(11)
Y = perturb_with_near_duplicate(X, 1e-4)
print("before:", diagnostics(X))
print("after: ", diagnostics(Y))

# Two-dimensional Halton points, written as CSV.
print(halton_points(5, 2).to_csv())
