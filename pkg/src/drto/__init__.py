"""Learning-based task offloading for satellite-terrestrial edge computing.

A DNN maps channel gains to a relaxed offloading vector, an order-preserving
quantizer turns it into a few binary candidates, and each candidate gets its
optimal bandwidth split in closed form. Baselines (enumeration, coordinate
descent, a DNN ensemble, fixed placements) share the same cost model.
"""

from .agent import AgentConfig, DrtoAgent, FrameRecord
from .allocator import (AllocProblem, allocate, build_problem, solve_closed_form,
                        solve_numeric_oracle)
from .baselines import (BaselineKind, DdloEnsemble, coordinate_descent, enumerate_optimal,
                        pure_fixed)
from .channel import (ChannelConfig, ChannelGenerator, PathLossParams, mean_gain, read_trace,
                      write_trace)
from .config import ExperimentConfig, load_config
from .harness import MetricsSummary, bench_runtime, run_experiment, verify_allocator
from .nn import AdamState, Mlp, ReplayMemory, train_batch
from .quantizer import QuantizerState, quantize
from .system import (ChannelState, DomainError, OffloadDecision, SystemParams, cost_sat_path,
                     cost_tc_path, eval_cost, rate_first_hop, rate_second_hop)

__version__ = "0.1.0"
