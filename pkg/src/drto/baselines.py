"""Reference offloading policies: exhaustive enumeration, coordinate descent,
a DNN ensemble (DDLO), and the two fixed-location strategies.
"""

from __future__ import annotations

import enum
import itertools
import time

import numpy as np

from .agent import AgentConfig, FrameRecord, select_best
from .allocator import FrameAllocator
from .nn import AdamState, Mlp, ReplayMemory, train_batch
from .system import ChannelState, OffloadDecision, SystemParams

__all__ = [
    "BaselineKind",
    "MAX_ENUM_N",
    "enumerate_optimal",
    "coordinate_descent",
    "pure_fixed",
    "DdloEnsemble",
]

MAX_ENUM_N = 20


class BaselineKind(enum.Enum):
    ENUMERATION = "enum"
    COORDINATE_DESCENT = "cd"
    DDLO = "ddlo"
    PURE_TC = "pure-tc"
    PURE_SAT = "pure-sat"


def enumerate_optimal(params: SystemParams, channel: ChannelState,
                      max_n: int = MAX_ENUM_N) -> OffloadDecision:
    """Global optimum over all ``2**N`` location vectors (first minimum wins)."""
    n = params.n_st
    if n > max_n:
        raise ValueError(f"enumeration over 2**{n} vectors refused (guard N <= {max_n})")
    frame_alloc = FrameAllocator(params, channel)
    best = None
    for bits in itertools.product((0, 1), repeat=n):
        dec = frame_alloc.solve(np.array(bits, dtype=np.int8))
        if best is None or dec.cost < best.cost:
            best = dec
    best.info["solves"] = 2**n
    return best


def coordinate_descent(params: SystemParams, channel: ChannelState, start=None) -> OffloadDecision:
    """Greedy single-flip descent, starting from all-satellite by default.

    Each sweep evaluates every single-location flip and takes the one with
    the largest cost decrease; stops when no flip lowers the cost.
    ``info["accepted_costs"]`` records the cost after each accepted flip.
    """
    n = params.n_st
    x = np.ones(n, dtype=np.int8) if start is None else np.array(start, dtype=np.int8)
    frame_alloc = FrameAllocator(params, channel)
    current = frame_alloc.solve(x)
    solves = 1
    accepted = [current.cost]
    while True:
        best = None
        for i in range(n):
            trial = x.copy()
            trial[i] ^= 1
            dec = frame_alloc.solve(trial)
            solves += 1
            if best is None or dec.cost < best.cost:
                best = dec
        if best.cost < current.cost:
            current = best
            x = best.x.copy()
            accepted.append(current.cost)
        else:
            break
    current.info.update(solves=solves, accepted_costs=accepted, start="all-sat" if start is None else "custom")
    return current


def pure_fixed(params: SystemParams, channel: ChannelState, kind: BaselineKind) -> OffloadDecision:
    if kind is BaselineKind.PURE_TC:
        x = np.zeros(params.n_st, dtype=np.int8)
    elif kind is BaselineKind.PURE_SAT:
        x = np.ones(params.n_st, dtype=np.int8)
    else:
        raise ValueError(f"{kind} is not a fixed-location baseline")
    return FrameAllocator(params, channel).solve(x)


class DdloEnsemble:
    """``n_nets`` independently initialized networks sharing one replay memory.

    Each network proposes its own output rounded at 0.5; duplicate proposals
    are evaluated once. Every ``delta_train`` frames each network takes one
    Adam step on its own batch drawn from the shared memory.
    """

    def __init__(self, params: SystemParams, gain_scale, config: AgentConfig | None = None,
                 rng: np.random.Generator | int | None = None, n_nets: int | None = None):
        self.params = params
        self.config = config or AgentConfig()
        self.gain_scale = np.asarray(gain_scale, dtype=float).reshape(-1)
        n = params.n_st
        if self.gain_scale.shape != (n + 1,):
            raise ValueError(f"gain_scale must hold {n + 1} values")
        self.rng = rng if isinstance(rng, np.random.Generator) else np.random.default_rng(rng)
        cfg = self.config
        n_nets = n if n_nets is None else n_nets
        # distinct init streams, one per network
        self.nets = [Mlp.for_stations(n, hidden=cfg.hidden, rng=np.random.default_rng(s),
                                      init_std=cfg.init_std)
                     for s in self.rng.integers(0, 2**63, size=n_nets)]
        self.opts = [AdamState(learning_rate=cfg.learning_rate) for _ in self.nets]
        self.memory = ReplayMemory(cfg.memory_size, n + 1, n)

    def proposals(self, channel: ChannelState) -> list[np.ndarray]:
        """One rounded proposal per network, in network order."""
        inp = channel.vector / self.gain_scale
        return [(net.forward(inp) > 0.5).astype(np.int8) for net in self.nets]

    def decide(self, channel: ChannelState, frame: int | None = None) -> FrameRecord:
        start = time.perf_counter()
        unique = []
        seen = set()
        for x in self.proposals(channel):
            key = x.tobytes()
            if key not in seen:
                seen.add(key)
                unique.append(x)
        best, k_star, costs = select_best(self.params, channel, unique)
        elapsed = time.perf_counter() - start
        return FrameRecord(channel.frame if frame is None else frame, best, k_star,
                           len(unique), decide_seconds=elapsed, candidate_costs=costs)

    def step(self, channel: ChannelState, frame: int) -> FrameRecord:
        record = self.decide(channel, frame)
        self.memory.push(channel.vector / self.gain_scale, record.decision.x)
        if frame % self.config.delta_train == 0:
            start = time.perf_counter()
            losses = [train_batch(net, opt, self.memory.sample(self.config.batch_size, self.rng))
                      for net, opt in zip(self.nets, self.opts)]
            record.loss = float(np.mean(losses))
            record.train_seconds = time.perf_counter() - start
        return record
