"""
Optimal bandwidth split
=======================

For fixed offloading locations the cost is a constant plus sum(c_j / alpha_j)
over the active links. The minimizer puts alpha_j proportional to sqrt(c_j);
here it is compared with the projected-gradient oracle.
"""

import numpy as np

from drto import ChannelConfig, ChannelGenerator, SystemParams
from drto.allocator import build_problem, solve_closed_form, solve_numeric_oracle

params = SystemParams()
channel = ChannelGenerator(ChannelConfig(seed=7), params).sample_frame(1)
x = np.array([1, 0, 1, 0, 0])

prob = build_problem(params, channel, x)
alpha, cost = solve_closed_form(prob)
alpha_num, cost_num = solve_numeric_oracle(prob)

print("active links:", prob.active.tolist())
print("closed form :", np.round(alpha, 4).tolist(), f"cost {cost:.6f}")
print("oracle      :", np.round(alpha_num, 4).tolist(), f"cost {cost_num:.6f}")

# %%
# At the optimum c_j / alpha_j^2 is the same on every active link.
ratios = prob.coeffs / alpha[prob.active] ** 2
print("c/alpha^2 spread:", np.ptp(ratios) / ratios.max())

# %%
# The shared forwarding link makes the cost depend only on how many tasks
# go to the cloud.
from drto.allocator import FrameAllocator

fa = FrameAllocator(params, channel)
for m in range(6):
    x = np.array([0] * m + [1] * (5 - m))
    print(f"{m} tasks to TC: cost {fa.solve(x).cost:.3f}")
