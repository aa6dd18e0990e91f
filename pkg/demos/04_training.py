"""
Online learning
===============

A short DRTO run next to the exhaustive optimum. The loss drops and the
achieved cost approaches the enumeration cost within a few thousand frames.
"""

import numpy as np

from drto import ExperimentConfig, run_experiment

cfg = ExperimentConfig(total_frames=5000, algorithms=("enum", "drto", "pure-tc", "pure-sat"),
                       tail_frames=1000, record_timing=False)
summary = run_experiment(cfg)

s = summary.series[("drto", 0)]
for lo in range(0, 5000, 1000):
    window = slice(lo, lo + 1000)
    print(f"frames {lo + 1:5d}-{lo + 1000:5d}: loss {np.nanmean(s['loss'][window]):.4f}, "
          f"cost ratio {np.mean(s['cost_ratio'][window]):.4f}, "
          f"mean K {np.mean(s['K_t'][window]):.2f}")

# %%
for algo, agg in summary.aggregates().items():
    print(f"{algo:8s} mean cost {agg['mean_cost']:.3f}")
