"""
Decision runtime
================

Mean time per frame of the decision path (network, quantization, allocator
solves and argmin) for each algorithm as the number of terminals grows.
"""

from drto import ExperimentConfig
from drto.harness import bench_runtime

cfg = ExperimentConfig(total_frames=600, warmup_frames=100)
table = bench_runtime(cfg, [5, 7, 9], algorithms=("drto", "ddlo", "cd", "enum"))

print("algorithm     N=5       N=7       N=9")
for algo, row in table.items():
    print(f"{algo:8s}" + "".join(f"{row[n] * 1e3:9.3f}ms" for n in (5, 7, 9)))
