"""
Offloading cost of a single terminal
====================================

One ST sends an 800 Mbit task over a link with SNR 3 and a quarter of the
band. Computing on the satellite costs latency and energy; forwarding to the
terrestrial cloud adds a second hop but uses a faster CPU.
"""

import numpy as np

from drto import ChannelState, SystemParams
from drto.system import cost_sat_path, cost_tc_path, eval_cost

params = SystemParams(n_st=1)

# gains chosen so that p*h/N0 = 3 on both hops
h = 3 * params.noise / params.p_st[0]
h_tc = 3 * params.noise / params.p_sat
channel = ChannelState([h], h_tc)

t_sat, e_sat = cost_sat_path(params, channel, 0, 0.25)
print(f"satellite: latency {t_sat:.2f} s, energy {e_sat:.2f} J")

t_tc, e_tc = cost_tc_path(params, channel, 0, 0.25, 0.75)
print(f"cloud:     latency {t_tc:.2f} s, energy {e_tc:.2f} J")

# the weighted cost with lambda = 0.5
for x, alpha in (([1], [0.25, 0.0]), ([0], [0.25, 0.75])):
    print(f"x={x}: F = {eval_cost(params, channel, x, alpha):.3f}")

# %%
# Sweep the weight: lambda = 1 is pure latency, lambda = 0 pure energy.
for lam in np.linspace(0, 1, 5):
    p = params.replace(lam=lam)
    print(f"lambda={lam:.2f}  sat {eval_cost(p, channel, [1], [0.25, 0]):7.3f}"
          f"  tc {eval_cost(p, channel, [0], [0.25, 0.75]):7.3f}")
