"""
Order-preserving candidates
===========================

The network output is a vector in (0, 1). Quantization turns it into K
binary location vectors; a larger entry is never mapped below a smaller one.
"""

import numpy as np

from drto import QuantizerState, quantize

x_hat = np.array([0.2, 0.7, 0.4, 0.55, 0.9])
for j, cand in enumerate(quantize(x_hat, 5), start=1):
    print(j, cand.tolist())

# %%
# K shrinks once the winning index stays small. Frames 1..12 with delta 4:
state = QuantizerState(n_st=5, delta_big=4)
winners = [3, 1, 2, 1, 1, 1, 1, 1, 1, 1, 1, 1]
for t, k_star in enumerate(winners, start=1):
    state.maybe_adjust_k(t)
    k_star = min(k_star, state.k_current)
    print(f"t={t:2d}  K={state.k_current}  k*={k_star}")
    state.record_best(k_star)
