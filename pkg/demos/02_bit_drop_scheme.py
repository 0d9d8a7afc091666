"""Growing a random string one bit at a time and watching the score curve.

Run:  python3 demos/02_bit_drop_scheme.py
"""

import numpy as np

from lcslab import (
    InsertionMode,
    RngStream,
    drop_init,
    drop_step,
    lcs_prefix_curve,
    simulate_Ln_coupled,
    uniformity_counts,
)

gen = RngStream(7).generator()
state = drop_init(gen)
print("Z^2 =", state.to_binary_sequence().to_text())
for _ in range(10):
    state = drop_step(state, gen)
    t, v = state.history[-1]
    print(f"insert bit {v} at position {t:2d} -> {state.to_binary_sequence().to_text()}")

y = RngStream(7).generator(1).integers(0, 2, 24, dtype=np.uint8)
curve = lcs_prefix_curve(state, y)
print("\nY =", "".join(map(str, y)))
print("score curve L^a(k), k = 0..12:", curve.values.tolist())

print("\neach intermediate string is uniform; counts of Z^3 over 100000 growths:")
for mode in InsertionMode:
    counts = uniformity_counts(3, 100_000, mode, seed=1)
    print(f"  {mode.value:15s}", counts.tolist())

ln, na, _ = simulate_Ln_coupled(40, 0.3, RngStream(99))
print(f"\ncoupled replication at n=40, p=0.3: N^a={na}, L^a(n - N^a)={ln}")
