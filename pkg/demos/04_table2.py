"""Reproduce the four-row convergence table (about 10 s)."""

from kernelrates.harness import TABLE2_ROWS, run_table2

reports = run_table2(seed=42, replications=100)
print(f"{'m0':>4} {'m':>4} {'slope':>8} {'theory':>7} {'diff':>7} {'R2':>6} {'published':>9}")
for (m0, m, published, _), rep in zip(TABLE2_ROWS, reports):
    print(f"{m0:4g} {m:4g} {rep.slope:8.4f} {rep.theoretical_slope:7.4f} "
          f"{rep.difference:7.4f} {rep.r2:6.3f} {published:9.4f}")

# The per-n errors behind the first row.
for row in reports[0].rows[:4]:
    print(row)
