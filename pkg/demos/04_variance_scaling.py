"""Variance of L_n grows linearly in n when one alphabet carries a third letter.

Run:  python3 demos/04_variance_scaling.py   (about half a minute)
"""

import numpy as np

from lcslab import estimate_gamma, exact_E_L10, run_variance_scaling, tail_envelope

print("exact E[LCS of two 10-bit strings] =", exact_E_L10(), "=", float(exact_E_L10()))

print("\nsample variance of L_n, p = 0.5, 2000 replications per n:")
rows, dn = run_variance_scaling([100, 400, 1600], 0.5, 2000, seed=1)
print(f"  {'n':>5} {'mean':>9} {'var':>8} {'var/n':>7}  95% bootstrap CI")
for r in rows:
    print(f"  {r.n:>5} {r.mean:>9.2f} {r.var:>8.1f} {r.var_over_n:>7.4f}"
          f"  [{r.ci_low:.1f}, {r.ci_high:.1f}]")

print("\nrescaled fluctuations D_n = (L_n - mean)/sqrt(n), sample std per n:")
for n, samples in dn.items():
    print(f"  n={n:<5} std(D_n) = {np.std(samples):.4f}")

c_hat, tail_rows = tail_envelope(1000, 0.5, 3000, [0.02, 0.05, 0.1], seed=2)
print("\nlarge-deviation envelope fit at n=1000: c_hat =", round(c_hat, 3))
for r in tail_rows:
    print(f"  P(|L_n - mean| >= {r['delta']:.2f} n) = {r['tail']:.4f}")

print("\nbinary/binary mean ratio (Chvatal-Sankoff regime):")
est = estimate_gamma(2000, 50, seed=3)
print(f"  n=2000: {est.mean_ratio:.4f}  CI [{est.ci_low:.4f}, {est.ci_high:.4f}]")
